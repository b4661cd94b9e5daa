//! End-to-end oracles for the embedding integrator: a closed-form
//! adjoint solution for linear systems, pointwise dominance of the
//! facet bounds, and nonnegativity of the ellipsoid growth rate.

use parareach::autodiff::{jacobian_point, JacobianSpec};
use parareach::embedding::{
    adjoint_update, ellipsoid_growth_rate, embedding_rhs, integrate, xi_facet_bound,
    BoundStrategy, EmbeddingState, IntegrationMethod,
};
use parareach::linalg::Matrix;
use parareach::parametope::{FacetId, Parametope, ParametopeKind};
use parareach::systems::DynamicalSystem;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Matrix exponential by scaling and squaring with a Taylor series;
/// ample accuracy for small matrices with moderate norm.
fn expm(a: &Matrix, t: f64) -> Matrix {
    let n = a.rows();
    let scaled_norm = a.inf_norm() * t.abs();
    let squarings = if scaled_norm > 0.5 {
        (scaled_norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a.scale(t / 2f64.powi(squarings as i32));
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=24 {
        term = term.matmul(&b).scale(1.0 / k as f64);
        sum = sum.add(&term);
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

fn rotation_matrix() -> Matrix {
    Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]])
}

fn unit_box_at_origin() -> Parametope {
    Parametope::symmetric_polytope(
        vec![0.0, 0.0],
        Matrix::identity(2),
        vec![-1.0, -1.0],
        vec![1.0, 1.0],
    )
    .unwrap()
}

#[test]
fn expm_oracle_matches_rotation_closed_form() {
    let t = 1.234;
    let e = expm(&rotation_matrix().neg(), t);
    // exp(-A t) for the rotation generator is [[cos, -sin], [sin, cos]].
    assert!((e.get(0, 0) - t.cos()).abs() < 1e-12);
    assert!((e.get(0, 1) + t.sin()).abs() < 1e-12);
    assert!((e.get(1, 0) - t.sin()).abs() < 1e-12);
    assert!((e.get(1, 1) - t.cos()).abs() < 1e-12);
}

/// The adjoint frame of a rotation returns to the identity after a full
/// period and matches alpha0 · exp(-A t) along the way; the offsets stay
/// constant because the linear bracket cancels exactly.
#[test]
fn rotation_adjoint_returns_and_offsets_freeze() {
    let sys = DynamicalSystem::linear(rotation_matrix());
    let state = EmbeddingState::from_parametope(&unit_box_at_origin());
    let tf = std::f64::consts::TAU;
    let traj = integrate(
        &sys,
        &state,
        &BoundStrategy::IntervalFacet,
        0.0,
        tf,
        500,
        IntegrationMethod::Rk4,
    )
    .unwrap();

    let y0 = &traj.states[0].offset;
    let mut max_drift: f64 = 0.0;
    for s in &traj.states {
        for (a, b) in s.offset.iter().zip(y0) {
            max_drift = max_drift.max((a - b).abs());
        }
    }
    assert!(max_drift <= 1e-6, "offset drift {max_drift}");

    let final_alpha = &traj.states.last().unwrap().alpha;
    for r in 0..2 {
        for c in 0..2 {
            let expect = if r == c { 1.0 } else { 0.0 };
            assert!(
                (final_alpha.get(r, c) - expect).abs() < 1e-5,
                "alpha(2pi) entry ({r},{c}) = {}",
                final_alpha.get(r, c)
            );
        }
    }

    // Mid-trajectory check against the closed-form adjoint solution.
    let idx = 125;
    let t = traj.times[idx];
    let oracle = expm(&rotation_matrix().neg(), t);
    for r in 0..2 {
        for c in 0..2 {
            assert!(
                (traj.states[idx].alpha.get(r, c) - oracle.get(r, c)).abs() < 1e-5,
                "alpha({t}) entry ({r},{c})"
            );
        }
    }
}

/// Pointwise growth values sampled on a facet never exceed the facet
/// rate bound.
#[test]
fn facet_bound_dominates_sampled_growth() {
    let sys = DynamicalSystem::vanderpol(0.25);
    let set = Parametope::symmetric_polytope(
        vec![-2.0, 0.0],
        Matrix::identity(2),
        vec![-0.125, -0.00125],
        vec![0.125, 0.00125],
    )
    .unwrap();
    let state = EmbeddingState::from_parametope(&set);
    let jac = jacobian_point(&sys, &state.center).unwrap();
    let u = adjoint_update(&state.alpha, &jac);
    let inv = state.alpha.invert().unwrap();
    let f_center = sys.eval_f64(&state.center);
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    for facet in set.facet_ids() {
        let bound = xi_facet_bound(&sys, &state, &u, facet, None).unwrap();
        let z_box = set.facet_box_z(facet).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let z: Vec<f64> = (0..2)
                .map(|k| {
                    let iv = z_box.get(k);
                    if iv.sup() > iv.inf() {
                        rng.random_range(iv.inf()..iv.sup())
                    } else {
                        iv.inf()
                    }
                })
                .collect();
            let x: Vec<f64> = state
                .center
                .iter()
                .zip(inv.matvec(&z))
                .map(|(c, d)| c + d)
                .collect();
            let fx = sys.eval_f64(&x);
            let dx: Vec<f64> = x.iter().zip(&state.center).map(|(a, b)| a - b).collect();
            let bracket: Vec<f64> = u
                .matvec(&dx)
                .iter()
                .zip(state.alpha.matvec(
                    &fx.iter().zip(&f_center).map(|(a, b)| a - b).collect::<Vec<f64>>(),
                ))
                .map(|(p, q)| p + q)
                .collect();
            let xi = match facet {
                FacetId::Lower(k) => -bracket[k],
                FacetId::Upper(k) => bracket[k],
                FacetId::Boundary => unreachable!(),
            };
            worst = worst.max(xi);
        }
        assert!(
            worst <= bound + 1e-7,
            "facet {facet:?}: sampled {worst} above bound {bound}"
        );
        assert!(bound.is_finite());
    }
}

#[test]
fn ellipsoid_rate_dominates_boundary_quadratic_growth() {
    let sys = DynamicalSystem::robot_arm();
    let alpha = Matrix::identity(4).scale(10.0);
    let set = Parametope::ellipsoid(vec![1.5, 0.75, 0.0, 0.0], alpha.clone(), 1.0).unwrap();
    let state = EmbeddingState::from_parametope(&set);
    let strategy = BoundStrategy::EllipsoidEig {
        jacobian: JacobianSpec::Mixed {
            order: vec![2, 3, 0, 1],
        },
        corner_cap: 64,
    };
    let c = ellipsoid_growth_rate(&sys, &state, &strategy).unwrap();
    assert!(c >= 0.0 && c.is_finite());

    let y = match set.kind() {
        ParametopeKind::Ellipsoid { offset } => *offset,
        _ => unreachable!(),
    };
    // Full boundary growth functional with the adjoint parameter rate:
    // 2 (x - x̊)ᵀ αᵀ [U (x - x̊) + α (f(x) - f(x̊))].
    let jac0 = jacobian_point(&sys, set.center()).unwrap();
    let u = adjoint_update(&alpha, &jac0);
    let f_center = sys.eval_f64(set.center());
    for x in set.boundary_samples(1000, 9).unwrap() {
        let dx: Vec<f64> = x.iter().zip(set.center()).map(|(a, b)| a - b).collect();
        let df: Vec<f64> = sys
            .eval_f64(&x)
            .iter()
            .zip(&f_center)
            .map(|(a, b)| a - b)
            .collect();
        let z = alpha.matvec(&dx);
        let inner: Vec<f64> = u
            .matvec(&dx)
            .iter()
            .zip(alpha.matvec(&df))
            .map(|(a, b)| a + b)
            .collect();
        let growth: f64 = 2.0 * z.iter().zip(&inner).map(|(a, b)| a * b).sum::<f64>();
        assert!(
            growth <= c * y + 1e-7,
            "boundary growth {growth} above c*y = {}",
            c * y
        );
    }
}

/// The embedding right-hand side at the reference state reproduces the
/// field value at the center.
#[test]
fn rhs_center_derivative_is_field_value() {
    let sys = DynamicalSystem::vanderpol(0.25);
    let set = Parametope::symmetric_polytope(
        vec![-2.0, 0.0],
        Matrix::identity(2),
        vec![-0.125, -0.00125],
        vec![0.125, 0.00125],
    )
    .unwrap();
    let state = EmbeddingState::from_parametope(&set);
    let rhs = embedding_rhs(&sys, &state, &BoundStrategy::IntervalFacet, None).unwrap();
    assert_eq!(rhs.center_dot, vec![0.0, 2.0]);
}

/// Growth rates stay (numerically) nonnegative along a full robot-arm
/// run: the enclosure always contains the center Jacobian, so the
/// corner maximum cannot be negative.
#[test]
fn growth_rate_never_negative_along_run() {
    let sys = DynamicalSystem::robot_arm();
    let alpha = Matrix::identity(4).scale(10.0);
    let set = Parametope::ellipsoid(vec![1.5, 0.75, 0.0, 0.0], alpha, 1.0).unwrap();
    let state = EmbeddingState::from_parametope(&set);
    let strategy = BoundStrategy::EllipsoidEig {
        jacobian: JacobianSpec::Mixed {
            order: vec![2, 3, 0, 1],
        },
        corner_cap: 64,
    };
    let traj = integrate(
        &sys,
        &state,
        &strategy,
        0.0,
        2.0,
        200,
        IntegrationMethod::Euler,
    )
    .unwrap();
    for (i, d) in traj.meta.diagnostics.iter().enumerate() {
        let c = d.growth_rate.expect("ellipsoid runs record growth rates");
        assert!(c >= -1e-12, "step {i}: c = {c}");
    }
}

/// Bit-identical reruns: the integrator is deterministic.
#[test]
fn integration_is_deterministic() {
    let sys = DynamicalSystem::vanderpol(0.25);
    let set = Parametope::symmetric_polytope(
        vec![-2.0, 0.0],
        Matrix::identity(2),
        vec![-0.125, -0.00125],
        vec![0.125, 0.00125],
    )
    .unwrap();
    let state = EmbeddingState::from_parametope(&set);
    let a = integrate(
        &sys,
        &state,
        &BoundStrategy::IntervalFacet,
        0.0,
        1.0,
        100,
        IntegrationMethod::Rk4,
    )
    .unwrap();
    let b = integrate(
        &sys,
        &state,
        &BoundStrategy::IntervalFacet,
        0.0,
        1.0,
        100,
        IntegrationMethod::Rk4,
    )
    .unwrap();
    for (sa, sb) in a.states.iter().zip(&b.states) {
        assert_eq!(sa, sb);
    }
}
