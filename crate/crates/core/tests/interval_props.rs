//! Property tests for the interval kernels: inclusion soundness,
//! monotonicity under operand widening, and agreement with exact
//! arithmetic on degenerate inputs.

use parareach::interval::{Interval, IntervalMatrix, IntervalVector};
use proptest::prelude::*;

fn interval_in(range: f64) -> impl Strategy<Value = Interval> {
    (-range..range, -range..range).prop_map(|(a, b)| Interval::new(a.min(b), a.max(b)))
}

fn point_inside(iv: Interval, t: f64) -> f64 {
    iv.inf() + t * (iv.sup() - iv.inf())
}

proptest! {
    #[test]
    fn add_contains_pointwise(a in interval_in(100.0), b in interval_in(100.0),
                              ta in 0.0..1.0f64, tb in 0.0..1.0f64) {
        let x = point_inside(a, ta);
        let y = point_inside(b, tb);
        prop_assert!((a + b).contains(x + y));
    }

    #[test]
    fn sub_contains_pointwise(a in interval_in(100.0), b in interval_in(100.0),
                              ta in 0.0..1.0f64, tb in 0.0..1.0f64) {
        let x = point_inside(a, ta);
        let y = point_inside(b, tb);
        prop_assert!((a - b).contains(x - y));
    }

    #[test]
    fn mul_contains_pointwise(a in interval_in(100.0), b in interval_in(100.0),
                              ta in 0.0..1.0f64, tb in 0.0..1.0f64) {
        let x = point_inside(a, ta);
        let y = point_inside(b, tb);
        prop_assert!((a * b).contains(x * y));
    }

    #[test]
    fn sqr_contains_pointwise(a in interval_in(100.0), t in 0.0..1.0f64) {
        let x = point_inside(a, t);
        prop_assert!(a.sqr().contains(x * x));
    }

    #[test]
    fn recip_contains_pointwise(a in interval_in(100.0), t in 0.0..1.0f64) {
        let x = point_inside(a, t);
        if x != 0.0 {
            prop_assert!(a.recip().contains(1.0 / x));
        }
    }

    #[test]
    fn ops_are_inclusion_monotone(a in interval_in(50.0), b in interval_in(50.0),
                                  pad_a in 0.0..10.0f64, pad_b in 0.0..10.0f64) {
        let wa = Interval::new(a.inf() - pad_a, a.sup() + pad_a);
        let wb = Interval::new(b.inf() - pad_b, b.sup() + pad_b);
        prop_assert!((wa + wb).encloses(&(a + b)));
        prop_assert!((wa - wb).encloses(&(a - b)));
        prop_assert!((wa * wb).encloses(&(a * b)));
        prop_assert!(wa.sqr().encloses(&a.sqr()));
    }

    #[test]
    fn matvec_contains_sampled_products(
        entries in prop::collection::vec(-10.0..10.0f64, 9),
        vec_lo in prop::collection::vec(-5.0..5.0f64, 3),
        widths in prop::collection::vec(0.0..3.0f64, 3),
        ts in prop::collection::vec(0.0..1.0f64, 3),
    ) {
        let m = IntervalMatrix::from_fn(3, 3, |r, c| Interval::point(entries[3 * r + c]));
        let hi: Vec<f64> = vec_lo.iter().zip(&widths).map(|(l, w)| l + w).collect();
        let v = IntervalVector::from_bounds(&vec_lo, &hi);
        let x: Vec<f64> = (0..3).map(|i| point_inside(v.get(i), ts[i])).collect();
        let exact: Vec<f64> = (0..3)
            .map(|r| (0..3).map(|c| entries[3 * r + c] * x[c]).sum())
            .collect();
        let image = m.matvec(&v);
        for (r, e) in exact.iter().enumerate() {
            prop_assert!(image.get(r).contains(*e),
                "row {r}: {} misses {}", image.get(r), e);
        }
    }
}

/// Degenerate (point) interval matvec agrees with exact f64 matvec to a
/// few ulps per component.
#[test]
fn point_matvec_matches_exact_within_four_ulp() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(91);
    for _ in 0..500 {
        let entries: Vec<f64> = (0..9).map(|_| rng.random_range(-10.0..10.0)).collect();
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
        let m = IntervalMatrix::from_fn(3, 3, |r, c| Interval::point(entries[3 * r + c]));
        let image = m.matvec(&IntervalVector::point(&x));
        for r in 0..3 {
            let exact: f64 = (0..3).map(|c| entries[3 * r + c] * x[c]).sum();
            let iv = image.get(r);
            assert!(iv.contains(exact));
            // Rounding accumulates at the scale of the absolute-value
            // dot product, not of the (possibly cancelled) result.
            let scale: f64 = (0..3).map(|c| (entries[3 * r + c] * x[c]).abs()).sum();
            let ulp = scale.max(1e-300) * f64::EPSILON;
            assert!(iv.width() <= 4.0 * ulp, "width {} vs ulp {}", iv.width(), ulp);
        }
    }
}
