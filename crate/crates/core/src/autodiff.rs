//! Forward-mode differentiation with dual numbers, generic over the
//! scalar kind. One evaluation pass over `Dual<f64>` yields the point
//! Jacobian; the same pass over `Dual<Interval>` yields an elementwise
//! Jacobian enclosure over a box, used to build linear differential
//! inclusions `f(x) - f(x̊) ∈ M (x - x̊)`.

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use std::ops::{Add, Mul, Neg, Sub};

/// A map `ℝⁿ → ℝⁿ` evaluable over any [`Scalar`].
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

/// Dual number carrying a primal value and partials with respect to the
/// seeded inputs. An empty `deriv` means "constant": all partials zero,
/// broadcast against any seeding dimension. That keeps constants cheap
/// and, over interval scalars, exactly degenerate.
#[derive(Clone, Debug)]
pub struct Dual<S> {
    pub value: S,
    pub deriv: Vec<S>,
}

impl<S: Scalar> Dual<S> {
    pub fn constant(value: S) -> Dual<S> {
        Dual {
            value,
            deriv: Vec::new(),
        }
    }

    /// Input variable `index` of `dim` seeded with a unit partial.
    pub fn seeded(value: S, dim: usize, index: usize) -> Dual<S> {
        let mut deriv = vec![S::from_f64(0.0); dim];
        deriv[index] = S::from_f64(1.0);
        Dual { value, deriv }
    }

    /// Partial with respect to input `index`, honoring the constant
    /// broadcast convention.
    pub fn partial(&self, index: usize) -> S {
        self.deriv
            .get(index)
            .cloned()
            .unwrap_or_else(|| S::from_f64(0.0))
    }
}

fn zip_derivs<S: Scalar>(a: &[S], b: &[S], f: impl Fn(&S, &S) -> S) -> Vec<S> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Vec::new(),
        (false, true) => {
            let zero = S::from_f64(0.0);
            a.iter().map(|x| f(x, &zero)).collect()
        }
        (true, false) => {
            let zero = S::from_f64(0.0);
            b.iter().map(|y| f(&zero, y)).collect()
        }
        (false, false) => {
            assert_eq!(a.len(), b.len(), "dual seeding dimensions differ");
            a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
        }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Dual<S>;
    fn add(self, rhs: Dual<S>) -> Dual<S> {
        Dual {
            value: self.value.clone() + rhs.value.clone(),
            deriv: zip_derivs(&self.deriv, &rhs.deriv, |a, b| a.clone() + b.clone()),
        }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Dual<S>;
    fn sub(self, rhs: Dual<S>) -> Dual<S> {
        Dual {
            value: self.value.clone() - rhs.value.clone(),
            deriv: zip_derivs(&self.deriv, &rhs.deriv, |a, b| a.clone() - b.clone()),
        }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Dual<S>;
    fn neg(self) -> Dual<S> {
        Dual {
            value: -self.value,
            deriv: self.deriv.into_iter().map(|d| -d).collect(),
        }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Dual<S>;
    // Product rule: the derivative of a product is a sum of products.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Dual<S>) -> Dual<S> {
        let deriv = zip_derivs(&self.deriv, &rhs.deriv, |da, db| {
            da.clone() * rhs.value.clone() + self.value.clone() * db.clone()
        });
        Dual {
            value: self.value * rhs.value,
            deriv,
        }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_f64(value: f64) -> Dual<S> {
        Dual::constant(S::from_f64(value))
    }

    fn sqr(&self) -> Dual<S> {
        let two_v = self.value.clone() + self.value.clone();
        Dual {
            value: self.value.sqr(),
            deriv: self.deriv.iter().map(|d| two_v.clone() * d.clone()).collect(),
        }
    }

    fn recip(&self) -> Dual<S> {
        let inv = self.value.recip();
        let neg_inv_sq = -self.value.sqr().recip();
        Dual {
            value: inv,
            deriv: self
                .deriv
                .iter()
                .map(|d| neg_inv_sq.clone() * d.clone())
                .collect(),
        }
    }
}

/// How the columns of a Jacobian enclosure were evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    /// Every column evaluated over the full box.
    Plain,
    /// Columns evaluated with earlier coordinates (in a given order)
    /// pinned to the center; tighter for mean-value containment.
    Mixed,
}

/// Which enclosure to build, chosen per experiment. The plain interval
/// Jacobian is always sound; the mixed form needs a coordinate order
/// and is tighter when the center is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JacobianSpec {
    Plain,
    Mixed { order: Vec<usize> },
}

/// Elementwise Jacobian enclosure, valid over `domain`.
#[derive(Clone, Debug)]
pub struct JacobianEnclosure {
    pub matrix: IntervalMatrix,
    pub domain: IntervalVector,
    pub mode: JacobianMode,
}

/// Jacobian at a point via `n` seeded dual evaluations in one pass.
pub fn jacobian_point<F: VectorField + ?Sized>(field: &F, x: &[f64]) -> Result<Matrix> {
    let n = field.dim();
    assert_eq!(x.len(), n, "state dimension mismatch");
    let seeds: Vec<Dual<f64>> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| Dual::seeded(v, n, i))
        .collect();
    let out = field.eval(&seeds);
    let jac = Matrix::from_fn(out.len(), n, |r, c| out[r].partial(c));
    if !jac.is_finite() {
        return Err(Error::NonFinite {
            context: "point Jacobian",
        });
    }
    Ok(jac)
}

/// Elementwise enclosure of the Jacobian over a box.
pub fn jacobian_interval<F: VectorField + ?Sized>(
    field: &F,
    domain: &IntervalVector,
) -> JacobianEnclosure {
    let n = field.dim();
    assert_eq!(domain.len(), n, "box dimension mismatch");
    let seeds: Vec<Dual<Interval>> = (0..n)
        .map(|i| Dual::seeded(domain.get(i), n, i))
        .collect();
    let out = field.eval(&seeds);
    let matrix = IntervalMatrix::from_fn(out.len(), n, |r, c| out[r].partial(c));
    JacobianEnclosure {
        matrix,
        domain: domain.clone(),
        mode: JacobianMode::Plain,
    }
}

/// Elementwise enclosures of the output Hessians over a box, one
/// interval matrix per output row, via one nested-dual evaluation pass.
/// Analytically constant second derivatives stay degenerate.
pub fn hessians_interval<F: VectorField + ?Sized>(
    field: &F,
    domain: &IntervalVector,
) -> Vec<IntervalMatrix> {
    let n = field.dim();
    assert_eq!(domain.len(), n, "box dimension mismatch");
    let seeds: Vec<Dual<Dual<Interval>>> = (0..n)
        .map(|k| {
            let inner = Dual::seeded(domain.get(k), n, k);
            let mut outer = vec![Dual::constant(Interval::point(0.0)); n];
            outer[k] = Dual::constant(Interval::point(1.0));
            Dual {
                value: inner,
                deriv: outer,
            }
        })
        .collect();
    let out = field.eval(&seeds);
    out.iter()
        .map(|row| IntervalMatrix::from_fn(n, n, |r, c| row.partial(r).partial(c)))
        .collect()
}

/// Exact-to-roundoff Hessians at a point, one matrix per output row.
pub fn hessians_point<F: VectorField + ?Sized>(field: &F, x: &[f64]) -> Result<Vec<Matrix>> {
    let n = field.dim();
    assert_eq!(x.len(), n, "state dimension mismatch");
    let seeds: Vec<Dual<Dual<f64>>> = (0..n)
        .map(|k| {
            let inner = Dual::seeded(x[k], n, k);
            let mut outer = vec![Dual::constant(0.0); n];
            outer[k] = Dual::constant(1.0);
            Dual {
                value: inner,
                deriv: outer,
            }
        })
        .collect();
    let out = field.eval(&seeds);
    let mats: Vec<Matrix> = out
        .iter()
        .map(|row| Matrix::from_fn(n, n, |r, c| row.partial(r).partial(c)))
        .collect();
    if mats.iter().any(|m| !m.is_finite()) {
        return Err(Error::NonFinite {
            context: "point Hessian",
        });
    }
    Ok(mats)
}

/// Third-derivative tensor of one output row, `entry(a, b, c)` holding
/// an enclosure of `∂³f/∂x_a ∂x_b ∂x_c` over the evaluation box.
#[derive(Clone, Debug)]
pub struct ThirdDerivs {
    dim: usize,
    data: Vec<Interval>,
}

impl ThirdDerivs {
    pub fn zeros(dim: usize) -> ThirdDerivs {
        ThirdDerivs {
            dim,
            data: vec![Interval::point(0.0); dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, a: usize, b: usize, c: usize) -> Interval {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, value: Interval) {
        self.data[(a * self.dim + b) * self.dim + c] = value;
    }
}

/// Elementwise enclosures of all third derivatives over a box, one
/// tensor per output row, via one triply-nested dual pass.
pub fn third_derivs_interval<F: VectorField + ?Sized>(
    field: &F,
    domain: &IntervalVector,
) -> Vec<ThirdDerivs> {
    let n = field.dim();
    assert_eq!(domain.len(), n, "box dimension mismatch");
    type D1 = Dual<Interval>;
    type D2 = Dual<D1>;
    type D3 = Dual<D2>;
    let seeds: Vec<D3> = (0..n)
        .map(|k| {
            let level1: D1 = Dual::seeded(domain.get(k), n, k);
            let mut d2_deriv = vec![D1::from_f64(0.0); n];
            d2_deriv[k] = D1::from_f64(1.0);
            let level2 = D2 {
                value: level1,
                deriv: d2_deriv,
            };
            let mut d3_deriv = vec![D2::from_f64(0.0); n];
            d3_deriv[k] = D2::from_f64(1.0);
            D3 {
                value: level2,
                deriv: d3_deriv,
            }
        })
        .collect();
    let out = field.eval(&seeds);
    out.iter()
        .map(|row| {
            let mut t = ThirdDerivs::zeros(n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        t.set(a, b, c, row.partial(a).partial(b).partial(c));
                    }
                }
            }
            t
        })
        .collect()
}

/// Mixed Jacobian enclosure: the column for the coordinate at position
/// `p` of `order` is evaluated with coordinates earlier in the order
/// pinned to `center` and the rest ranging over the box. The result
/// satisfies the mean-value containment
/// `f(x) - f(center) ∈ M · (x - center)` for all `x` in the box when the
/// product is evaluated in interval arithmetic.
pub fn jacobian_mixed<F: VectorField + ?Sized>(
    field: &F,
    center: &[f64],
    domain: &IntervalVector,
    order: &[usize],
) -> Result<JacobianEnclosure> {
    let n = field.dim();
    assert_eq!(center.len(), n, "center dimension mismatch");
    assert_eq!(domain.len(), n, "box dimension mismatch");
    let mut seen = vec![false; n];
    for &j in order {
        if j >= n || seen[j] {
            return Err(Error::NotAPermutation {
                order: order.to_vec(),
                dim: n,
            });
        }
        seen[j] = true;
    }
    if order.len() != n {
        return Err(Error::NotAPermutation {
            order: order.to_vec(),
            dim: n,
        });
    }
    for (coord, &c) in center.iter().enumerate() {
        if !domain.get(coord).contains(c) {
            return Err(Error::CenterOutsideBox { coordinate: coord });
        }
    }

    let mut matrix = IntervalMatrix::zeros(n, n);
    for p in 0..n {
        let col = order[p];
        let seeds: Vec<Dual<Interval>> = (0..n)
            .map(|coord| {
                let position = order.iter().position(|&j| j == coord).unwrap();
                let value = if position < p {
                    Interval::point(center[coord])
                } else {
                    domain.get(coord)
                };
                Dual::seeded(value, n, coord)
            })
            .collect();
        let out = field.eval(&seeds);
        for r in 0..n {
            matrix.set(r, col, out[r].partial(col));
        }
    }
    Ok(JacobianEnclosure {
        matrix,
        domain: domain.clone(),
        mode: JacobianMode::Mixed,
    })
}

/// All corner matrices of an enclosure: entries with positive width are
/// enumerated at their endpoints, degenerate entries stay at their point
/// value. The convex hull of the result contains the interval matrix
/// set. Errors when `2^k` would exceed `cap`.
pub fn ldi_corners(enclosure: &JacobianEnclosure, cap: usize) -> Result<Vec<Matrix>> {
    let varying = enclosure.matrix.varying_entries();
    let k = varying.len();
    let needed: u128 = if k >= 128 { u128::MAX } else { 1u128 << k };
    if needed > cap as u128 {
        return Err(Error::CornerBudget { needed, cap });
    }
    let rows = enclosure.matrix.rows();
    let cols = enclosure.matrix.cols();
    let base = Matrix::from_fn(rows, cols, |r, c| enclosure.matrix.get(r, c).inf());
    let mut corners = Vec::with_capacity(needed as usize);
    for mask in 0..(needed as usize) {
        let mut m = base.clone();
        for (bit, &(r, c)) in varying.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                m.set(r, c, enclosure.matrix.get(r, c).sup());
            }
        }
        corners.push(m);
    }
    Ok(corners)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Square;

    impl VectorField for Square {
        fn dim(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
            vec![x[0].sqr()]
        }
    }

    struct IdentityField(usize);

    impl VectorField for IdentityField {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
            x.to_vec()
        }
    }

    #[test]
    fn identity_field_has_identity_jacobian() {
        let jac = jacobian_point(&IdentityField(3), &[0.3, -2.0, 5.0]).unwrap();
        assert_eq!(jac, Matrix::identity(3));
    }

    #[test]
    fn square_derivative_over_box() {
        let domain = IntervalVector::from_bounds(&[-1.0], &[1.0]);
        let enc = jacobian_interval(&Square, &domain);
        // d/dx x² = 2x over [-1, 1] is [-2, 2].
        assert_eq!(enc.matrix.get(0, 0), Interval::new(-2.0, 2.0));
        assert_eq!(enc.mode, JacobianMode::Plain);
    }

    #[test]
    fn mixed_with_point_box_matches_point_jacobian() {
        let center = [0.7];
        let domain = IntervalVector::point(&center);
        let enc = jacobian_mixed(&Square, &center, &domain, &[0]).unwrap();
        let jac = jacobian_point(&Square, &center).unwrap();
        let entry = enc.matrix.get(0, 0);
        assert_eq!(entry.inf(), jac.get(0, 0));
        assert_eq!(entry.sup(), jac.get(0, 0));
    }

    #[test]
    fn mixed_rejects_center_outside_box() {
        let domain = IntervalVector::from_bounds(&[0.0], &[1.0]);
        let err = jacobian_mixed(&Square, &[2.0], &domain, &[0]).unwrap_err();
        assert!(matches!(err, Error::CenterOutsideBox { coordinate: 0 }));
    }

    #[test]
    fn mixed_rejects_bad_order() {
        let domain = IntervalVector::from_bounds(&[0.0, 0.0], &[1.0, 1.0]);
        let err = jacobian_mixed(&IdentityField(2), &[0.5, 0.5], &domain, &[0, 0]).unwrap_err();
        assert!(matches!(err, Error::NotAPermutation { .. }));
    }

    #[test]
    fn point_hessian_of_square() {
        let h = hessians_point(&Square, &[0.7]).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].get(0, 0), 2.0);
        let enc = hessians_interval(&Square, &IntervalVector::point(&[0.7]));
        assert!(enc[0].get(0, 0).contains(2.0));
    }

    #[test]
    fn third_derivatives_of_cube_field() {
        struct Cube;
        impl VectorField for Cube {
            fn dim(&self) -> usize {
                1
            }
            fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
                vec![x[0].sqr() * x[0].clone()]
            }
        }
        // d³/dx³ x³ = 6, constant, so the enclosure is degenerate.
        let t = third_derivs_interval(&Cube, &IntervalVector::from_bounds(&[-2.0], &[3.0]));
        assert_eq!(t[0].entry(0, 0, 0), Interval::point(6.0));
    }

    #[test]
    fn corners_of_point_enclosure() {
        let domain = IntervalVector::point(&[1.0, 2.0]);
        let enc = jacobian_interval(&IdentityField(2), &domain);
        let corners = ldi_corners(&enc, 64).unwrap();
        assert_eq!(corners.len(), 1);
        assert_eq!(corners[0], Matrix::identity(2));
    }

    #[test]
    fn corners_of_one_varying_entry() {
        let mut matrix = Matrix::identity(2).to_intervals();
        matrix.set(0, 1, Interval::new(-1.0, 1.0));
        let enc = JacobianEnclosure {
            matrix,
            domain: IntervalVector::point(&[0.0, 0.0]),
            mode: JacobianMode::Plain,
        };
        let corners = ldi_corners(&enc, 64).unwrap();
        assert_eq!(corners.len(), 2);
        assert_eq!(corners[0].get(0, 1), -1.0);
        assert_eq!(corners[1].get(0, 1), 1.0);
    }

    #[test]
    fn corner_budget_exceeded() {
        let matrix = IntervalMatrix::from_fn(2, 2, |_, _| Interval::new(0.0, 1.0));
        let enc = JacobianEnclosure {
            matrix,
            domain: IntervalVector::point(&[0.0, 0.0]),
            mode: JacobianMode::Plain,
        };
        let err = ldi_corners(&enc, 8).unwrap_err();
        assert!(matches!(err, Error::CornerBudget { needed: 16, cap: 8 }));
    }
}
