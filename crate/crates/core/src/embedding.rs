//! The controlled embedding system. One trajectory of
//!
//! ```text
//! ẋ̊ = f(x̊, ẘ),   α̇ = -α Df(x̊),   ẏ = E(x̊, α, y)
//! ```
//!
//! yields a time-indexed family of sets guaranteed to contain every
//! trajectory of the original system started in the initial set, as
//! long as each offset rate `ẏ_k` upper-bounds the growth functional
//!
//! ```text
//! ξ_k(x, w) = ∂h_k [ α̇ (x - x̊) + α (f(x) - f(x̊)) + C (w - ẘ) ]
//! ```
//!
//! over the k-th facet and the disturbance set. The adjoint frame law
//! `α̇ = -α Df(x̊)` cancels the first-order part of `f` inside the
//! bracket, so the rates are second order in the set's diameter.
//!
//! Two sound rate engines are provided:
//!
//! * [`xi_facet_bound`] — per-facet bound for symmetric polytopes.
//!   Taylor's theorem with the Lagrange remainder turns the bracket
//!   into
//!
//!   ```text
//!   (U + α Df(x̊)) dx  +  ½ α [dxᵀ Hᵢ(x̊) dx]ᵢ  +  ⅙ α [D³fᵢ(ζ) dx⊗³]ᵢ
//!   ```
//!
//!   with `dx = x - x̊` and `ζ` on the center-to-facet segment. For the
//!   adjoint choice of `U` the linear part vanishes exactly. The
//!   quadratic term uses the Hessian at the center, enclosed to a few
//!   ulps over a degenerate box — true signed curvature, essentially no
//!   interval width — and the cubic remainder uses third-derivative
//!   enclosures over the set's hull. Both are evaluated as polynomial
//!   forms in the transformed coordinate `z = α dx` with power-aware
//!   ranges (`z_i²` nonnegative, `z_i³` monotone), so contraction shows
//!   up as negative rates. Evaluating
//!   the bracket as separate first-order interval terms instead would
//!   lose the cancellation — widths add instead of cancel and the tube
//!   inflates at first order, diverging in finite time; an interval
//!   Hessian over the whole set is sound but its width multiplies the
//!   always-positive `z_i²` range and still inflates the tube far
//!   beyond the true growth.
//! * [`ellipsoid_growth_rate`] — for ellipsoids, encloses
//!   `f(x) - f(x̊) ∈ M (x - x̊)` by an interval matrix, enumerates its
//!   corners, and returns the largest eigenvalue
//!   `c = max_i λ_max((α (M_i - Df(x̊)) α⁻¹)ᵀ + α (M_i - Df(x̊)) α⁻¹)`,
//!   so that `ẏ = c y` is sound on the boundary facet.
//!
//! Time stepping is ordinary fixed-step Euler/RK4; the step error is
//! not rigorously enclosed. This is a deliberate caveat: the bounds are
//! exact-arithmetic sound per right-hand-side evaluation, and the
//! Monte-Carlo verifier provides an end-to-end check.

use crate::autodiff::{
    hessians_interval, jacobian_interval, jacobian_mixed, jacobian_point, ldi_corners,
    third_derivs_interval, JacobianSpec, ThirdDerivs, VectorField,
};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalVector};
use crate::linalg::Matrix;
use crate::parametope::{FacetId, Parametope, ParametopeKind};
use crate::systems::DynamicalSystem;

/// Which set family an embedding state describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetShape {
    SymmetricPolytope,
    Ellipsoid,
}

/// Stacked state of the embedding system.
///
/// For a symmetric polytope, `offset` holds the `2n` stacked constraint
/// offsets `[-lo; hi]`, so every facet rate enters with a uniform sign.
/// For an ellipsoid it is the single sublevel value `[y]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingState {
    pub center: Vec<f64>,
    pub alpha: Matrix,
    pub offset: Vec<f64>,
    pub shape: SetShape,
}

impl EmbeddingState {
    pub fn from_parametope(set: &Parametope) -> EmbeddingState {
        let (offset, shape) = match set.kind() {
            ParametopeKind::SymmetricPolytope { lo, hi } => (
                lo.iter().map(|v| -v).chain(hi.iter().copied()).collect(),
                SetShape::SymmetricPolytope,
            ),
            ParametopeKind::Ellipsoid { offset } => (vec![*offset], SetShape::Ellipsoid),
        };
        EmbeddingState {
            center: set.center().to_vec(),
            alpha: set.alpha().clone(),
            offset,
            shape,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Decode the stacked offsets back into a set. Fails if the state
    /// has degraded (inverted box, negative ellipsoid level, singular
    /// frame).
    pub fn to_parametope(&self) -> Result<Parametope> {
        let n = self.dim();
        match self.shape {
            SetShape::SymmetricPolytope => {
                let lo: Vec<f64> = self.offset[..n].iter().map(|v| -v).collect();
                let hi = self.offset[n..].to_vec();
                Parametope::symmetric_polytope(self.center.clone(), self.alpha.clone(), lo, hi)
            }
            SetShape::Ellipsoid => {
                Parametope::ellipsoid(self.center.clone(), self.alpha.clone(), self.offset[0])
            }
        }
    }

    fn offset_len(&self) -> usize {
        match self.shape {
            SetShape::SymmetricPolytope => 2 * self.dim(),
            SetShape::Ellipsoid => 1,
        }
    }
}

/// The offset-rate engine used for `ẏ`.
#[derive(Clone, Debug)]
pub enum BoundStrategy {
    /// Interval bound of the growth functional along each polytope facet.
    IntervalFacet,
    /// Ellipsoid growth rate from corner eigenvalues of an LDI enclosure.
    EllipsoidEig {
        jacobian: JacobianSpec,
        corner_cap: usize,
    },
}

impl BoundStrategy {
    pub fn describe(&self) -> String {
        match self {
            BoundStrategy::IntervalFacet => "interval_facet".to_string(),
            BoundStrategy::EllipsoidEig {
                jacobian,
                corner_cap,
            } => match jacobian {
                JacobianSpec::Plain => format!("ellipsoid_eig(plain, cap={corner_cap})"),
                JacobianSpec::Mixed { order } => {
                    format!("ellipsoid_eig(mixed {order:?}, cap={corner_cap})")
                }
            },
        }
    }
}

/// The adjoint frame law: `α̇ = -α · Df(x̊)`. Row `j` of `α` evolves as
/// the adjoint of the linearization, `α̇_j = -Df(x̊)ᵀ α_j`.
pub fn adjoint_update(alpha: &Matrix, jac: &Matrix) -> Matrix {
    alpha.matmul(jac).neg()
}

/// Constant interval term `C (W - ẘ)` contributed by the disturbance.
fn disturbance_box(sys: &DynamicalSystem, w_center: &[f64]) -> Option<IntervalVector> {
    sys.disturbance().map(|d| {
        let shifted = d.bounds.sub_point(w_center);
        d.gain.to_intervals().matvec(&shifted)
    })
}

/// Sound upper bound on the growth functional over one polytope facet,
/// in stacked-offset orientation: for an upper facet the bound caps
/// `+e_kᵀ(·)`, for a lower facet `-e_kᵀ(·)` (the derivative of `-lo_k`).
pub fn xi_facet_bound(
    sys: &DynamicalSystem,
    state: &EmbeddingState,
    frame_rate: &Matrix,
    facet: FacetId,
    w_center: Option<&[f64]>,
) -> Result<f64> {
    if state.shape != SetShape::SymmetricPolytope {
        return Err(Error::WrongSetKind {
            expected: "symmetric polytope",
        });
    }
    let set = state.to_parametope()?;
    let bracket = facet_bracket(sys, &set, frame_rate, w_center)?;
    let z_face = set.facet_box_z(facet)?;
    match facet {
        FacetId::Upper(k) => Ok(bracket.row_range(k, &z_face).sup()),
        FacetId::Lower(k) => Ok(-bracket.row_range(k, &z_face).inf()),
        FacetId::Boundary => unreachable!("polytope facets are Lower/Upper"),
    }
}

/// The bracket at one state, decomposed into Taylor pieces and mapped
/// to the transformed frame: a linear interval matrix
/// `(U + α Df(x̊)) α⁻¹` (exactly zero under the adjoint law), one
/// quadratic form `α⁻ᵀ (½ Σᵢ α_kᵢ Hᵢ(x̊)) α⁻¹` and one cubic remainder
/// tensor per coordinate, and the constant disturbance term. Built once
/// per state and reused across that state's facets.
struct FacetBracket {
    lin_z: crate::interval::IntervalMatrix,
    quad_z: Vec<crate::interval::IntervalMatrix>,
    cubic_z: Vec<ThirdDerivs>,
    disturbance: Option<IntervalVector>,
}

impl FacetBracket {
    /// Range of bracket component `k` over a facet box in the
    /// transformed frame.
    fn row_range(&self, k: usize, z: &IntervalVector) -> Interval {
        let mut acc = self.lin_z.matvec(z).get(k);
        acc = acc + quad_form_range(&self.quad_z[k], z);
        acc = acc + cubic_form_range(&self.cubic_z[k], z);
        if let Some(d) = &self.disturbance {
            acc = acc + d.get(k);
        }
        acc
    }
}

/// Sign-aware range of `zᵀ Q z` over a box: diagonal terms go through
/// the tight square rule, so they stay one-sided.
fn quad_form_range(q: &crate::interval::IntervalMatrix, z: &IntervalVector) -> Interval {
    let n = z.len();
    let mut acc = Interval::point(0.0);
    for i in 0..n {
        acc = acc + q.get(i, i) * z.get(i).sqr();
        for j in (i + 1)..n {
            acc = acc + (q.get(i, j) + q.get(j, i)) * (z.get(i) * z.get(j));
        }
    }
    acc
}

/// Power-aware range of the cubic form `Σ T_pqr z_p z_q z_r` over a
/// box: repeated indices route through the tight square and cube rules
/// instead of decorrelated products.
fn cubic_form_range(t: &ThirdDerivs, z: &IntervalVector) -> Interval {
    let n = z.len();
    let mut acc = Interval::point(0.0);
    for p in 0..n {
        for q in p..n {
            for r in q..n {
                // Sum the enclosures over the distinct permutations of
                // (p, q, r); each encloses the same true derivative.
                let coeff = if p == q && q == r {
                    t.entry(p, p, p)
                } else if p == q {
                    t.entry(p, p, r) + t.entry(p, r, p) + t.entry(r, p, p)
                } else if q == r {
                    t.entry(p, q, q) + t.entry(q, p, q) + t.entry(q, q, p)
                } else {
                    t.entry(p, q, r)
                        + t.entry(p, r, q)
                        + t.entry(q, p, r)
                        + t.entry(q, r, p)
                        + t.entry(r, p, q)
                        + t.entry(r, q, p)
                };
                let power = if p == q && q == r {
                    z.get(p).cube()
                } else if p == q {
                    z.get(p).sqr() * z.get(r)
                } else if q == r {
                    z.get(q).sqr() * z.get(p)
                } else {
                    z.get(p) * z.get(q) * z.get(r)
                };
                acc = acc + coeff * power;
            }
        }
    }
    acc
}

fn facet_bracket(
    sys: &DynamicalSystem,
    set: &Parametope,
    frame_rate: &Matrix,
    w_center: Option<&[f64]>,
) -> Result<FacetBracket> {
    let n = set.dim();
    let alpha = set.alpha();
    let inv_enc = alpha.enclose_inverse()?;
    let (lin_z, quad_z, cubic_z) = if let Some(a) = sys.linear_matrix() {
        // Linear fast path: U + αA cancels exactly in floats because
        // frame_rate was produced as -(α·A) by the same kernel, and the
        // higher derivatives vanish identically.
        let assembled = frame_rate.add(&alpha.matmul(a));
        (
            assembled.to_intervals().matmul(&inv_enc),
            vec![crate::interval::IntervalMatrix::zeros(n, n); n],
            vec![ThirdDerivs::zeros(n); n],
        )
    } else {
        // Center derivatives enclosed over the degenerate point box, so
        // their own floating-point rounding is accounted for.
        let center_box = IntervalVector::point(set.center());
        let jac0 = jacobian_interval(sys, &center_box);
        let lin = frame_rate
            .to_intervals()
            .add(&alpha.to_intervals().matmul(&jac0.matrix));
        let lin_z = lin.matmul(&inv_enc);

        // Quadratic term with the Hessians at the center. Halving the
        // row weights is exact.
        let hessians = hessians_interval(sys, &center_box);
        let inv_t = inv_enc.transpose();
        let quad_z: Vec<crate::interval::IntervalMatrix> = (0..n)
            .map(|k| {
                let mut combo = crate::interval::IntervalMatrix::zeros(n, n);
                for (i, h) in hessians.iter().enumerate() {
                    let weight = 0.5 * alpha.get(k, i);
                    if weight != 0.0 {
                        combo = combo.add(&h.scale(weight));
                    }
                }
                inv_t.matmul(&combo).matmul(&inv_enc)
            })
            .collect();

        // Cubic Lagrange remainder: third derivatives enclosed over the
        // hull of the set and its center, which covers the Lagrange
        // point of every center-to-facet segment; then transformed to
        // the z frame.
        let z_hull = offset_box_z(set)?.hull_with_zero();
        let x_hull = inv_enc.matvec(&z_hull).shift_by(set.center());
        let thirds = third_derivs_interval(sys, &x_hull);
        let sixth = Interval::point(1.0) * Interval::point(6.0).recip();
        let cubic_z: Vec<ThirdDerivs> = (0..n)
            .map(|k| {
                // S_abc = 1/6 Σᵢ α_kᵢ T_i[abc]
                let mut weighted = ThirdDerivs::zeros(n);
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let mut acc = Interval::point(0.0);
                            for (i, t) in thirds.iter().enumerate() {
                                let w = alpha.get(k, i);
                                if w != 0.0 {
                                    acc = acc + Interval::point(w) * t.entry(a, b, c);
                                }
                            }
                            weighted.set(a, b, c, acc * sixth);
                        }
                    }
                }
                // C_pqr = Σ_abc S_abc (α⁻¹)_ap (α⁻¹)_bq (α⁻¹)_cr
                let mut transformed = ThirdDerivs::zeros(n);
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            let mut acc = Interval::point(0.0);
                            for a in 0..n {
                                let iap = inv_enc.get(a, p);
                                if iap == Interval::point(0.0) {
                                    continue;
                                }
                                for b in 0..n {
                                    let ibq = inv_enc.get(b, q);
                                    for c in 0..n {
                                        acc = acc
                                            + weighted.entry(a, b, c)
                                                * iap
                                                * ibq
                                                * inv_enc.get(c, r);
                                    }
                                }
                            }
                            transformed.set(p, q, r, acc);
                        }
                    }
                }
                transformed
            })
            .collect();
        (lin_z, quad_z, cubic_z)
    };
    let nominal = w_center
        .map(|w| w.to_vec())
        .or_else(|| sys.nominal_disturbance());
    let disturbance = nominal.and_then(|w| disturbance_box(sys, &w));
    Ok(FacetBracket {
        lin_z,
        quad_z,
        cubic_z,
        disturbance,
    })
}

/// Full offset box of a polytope in the transformed frame.
fn offset_box_z(set: &Parametope) -> Result<IntervalVector> {
    match set.kind() {
        ParametopeKind::SymmetricPolytope { lo, hi } => Ok(IntervalVector::from_bounds(lo, hi)),
        ParametopeKind::Ellipsoid { offset } => {
            let r = offset.sqrt();
            Ok(IntervalVector::new(vec![
                Interval::new(-r, r);
                set.dim()
            ]))
        }
    }
}

/// Growth rate `c` such that `ẏ = c y` soundly bounds the growth
/// functional on an ellipsoid's boundary facet.
pub fn ellipsoid_growth_rate(
    sys: &DynamicalSystem,
    state: &EmbeddingState,
    strategy: &BoundStrategy,
) -> Result<f64> {
    let BoundStrategy::EllipsoidEig {
        jacobian,
        corner_cap,
    } = strategy
    else {
        return Err(Error::WrongSetKind {
            expected: "ellipsoid",
        });
    };
    if state.shape != SetShape::Ellipsoid {
        return Err(Error::WrongSetKind {
            expected: "ellipsoid",
        });
    }
    let set = state.to_parametope()?;
    let alpha = set.alpha();
    let inv = alpha.invert()?;
    let inv_enc = alpha.enclose_inverse()?;
    let z_box = offset_box_z(&set)?;
    let x_box = inv_enc.matvec(&z_box).shift_by(set.center());

    let enclosure = match jacobian {
        JacobianSpec::Plain => jacobian_interval(sys, &x_box),
        JacobianSpec::Mixed { order } => jacobian_mixed(sys, set.center(), &x_box, order)?,
    };
    let corners = ldi_corners(&enclosure, *corner_cap)?;
    let jac0 = jacobian_point(sys, set.center())?;

    let mut c = f64::NEG_INFINITY;
    for corner in &corners {
        let delta = alpha.matmul(&corner.sub(&jac0)).matmul(&inv);
        let sym = delta.transpose().add(&delta);
        c = c.max(sym.max_eigenvalue_sym()?);
    }
    Ok(c)
}

/// Sound disturbance inflation for the ellipsoid rate: on the boundary,
/// `2 zᵀ α C (w - ẘ) ≤ 2 √y · max_corner ‖α C δ‖₂`.
fn ellipsoid_disturbance_rate(
    sys: &DynamicalSystem,
    state: &EmbeddingState,
    w_center: Option<&[f64]>,
) -> f64 {
    let Some(d) = sys.disturbance() else {
        return 0.0;
    };
    let nominal = w_center
        .map(|w| w.to_vec())
        .unwrap_or_else(|| d.bounds.midpoint());
    let m = d.bounds.len();
    let ac = state.alpha.matmul(&d.gain);
    let mut worst: f64 = 0.0;
    for mask in 0..(1usize << m) {
        let delta: Vec<f64> = (0..m)
            .map(|j| {
                let iv = d.bounds.get(j);
                let corner = if mask & (1 << j) != 0 { iv.sup() } else { iv.inf() };
                corner - nominal[j]
            })
            .collect();
        let v = ac.matvec(&delta);
        worst = worst.max(v.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    2.0 * state.offset[0].max(0.0).sqrt() * worst
}

/// Derivative of the embedding state, plus the ellipsoid growth rate
/// when that engine is in use.
#[derive(Clone, Debug)]
pub struct EmbeddingRhs {
    pub center_dot: Vec<f64>,
    pub alpha_dot: Matrix,
    pub offset_dot: Vec<f64>,
    pub growth_rate: Option<f64>,
}

impl EmbeddingRhs {
    pub fn max_offset_rate(&self) -> f64 {
        self.offset_dot.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Assemble the right-hand side of the embedding ODE at one state.
///
/// Transiently invalid states (inverted offset boxes or a negative
/// ellipsoid level, as can appear inside a Runge-Kutta stage) get zero
/// offset rates: an empty facet constrains nothing.
pub fn embedding_rhs(
    sys: &DynamicalSystem,
    state: &EmbeddingState,
    strategy: &BoundStrategy,
    w_center: Option<&[f64]>,
) -> Result<EmbeddingRhs> {
    let n = state.dim();
    assert_eq!(sys.dim(), n, "system and state dimensions differ");
    let jac0 = jacobian_point(sys, &state.center)?;
    let alpha_dot = adjoint_update(&state.alpha, &jac0);
    let nominal = w_center
        .map(|w| w.to_vec())
        .or_else(|| sys.nominal_disturbance());
    let center_dot = sys.drift(&state.center, nominal.as_deref());

    let (offset_dot, growth_rate) = match (&state.shape, strategy) {
        (SetShape::SymmetricPolytope, BoundStrategy::IntervalFacet) => {
            let lo_ok = (0..n).all(|k| -state.offset[k] <= state.offset[n + k]);
            if !lo_ok {
                (vec![0.0; 2 * n], None)
            } else {
                let set = state.to_parametope()?;
                let bracket = facet_bracket(sys, &set, &alpha_dot, w_center)?;
                let mut rates = vec![0.0; 2 * n];
                for facet in set.facet_ids() {
                    let z = set.facet_box_z(facet)?;
                    match facet {
                        FacetId::Lower(k) => rates[k] = -bracket.row_range(k, &z).inf(),
                        FacetId::Upper(k) => rates[n + k] = bracket.row_range(k, &z).sup(),
                        FacetId::Boundary => unreachable!(),
                    }
                }
                (rates, None)
            }
        }
        (SetShape::Ellipsoid, BoundStrategy::EllipsoidEig { .. }) => {
            let y = state.offset[0];
            if y < 0.0 {
                (vec![0.0], None)
            } else {
                let c = ellipsoid_growth_rate(sys, state, strategy)?;
                let rate = c * y + ellipsoid_disturbance_rate(sys, state, w_center);
                (vec![rate], Some(c))
            }
        }
        (SetShape::SymmetricPolytope, BoundStrategy::EllipsoidEig { .. }) => {
            return Err(Error::WrongSetKind {
                expected: "ellipsoid",
            })
        }
        (SetShape::Ellipsoid, BoundStrategy::IntervalFacet) => {
            return Err(Error::WrongSetKind {
                expected: "symmetric polytope",
            })
        }
    };

    Ok(EmbeddingRhs {
        center_dot,
        alpha_dot,
        offset_dot,
        growth_rate,
    })
}

/// Fixed-step integration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrationMethod {
    Euler,
    Rk4,
}

impl IntegrationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            IntegrationMethod::Euler => "euler",
            IntegrationMethod::Rk4 => "rk4",
        }
    }
}

/// Per-step record of the offset rates, taken at the step's first stage.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics {
    pub max_offset_rate: f64,
    pub growth_rate: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryMeta {
    pub method: IntegrationMethod,
    pub dt: f64,
    pub strategy: String,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Stored embedding trajectory: `steps + 1` states at uniform times.
#[derive(Clone, Debug)]
pub struct EmbeddingTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<EmbeddingState>,
    pub meta: TrajectoryMeta,
}

impl EmbeddingTrajectory {
    /// Decode every stored state into a set.
    pub fn parametopes(&self) -> Result<Vec<Parametope>> {
        self.states.iter().map(|s| s.to_parametope()).collect()
    }
}

fn flatten(state: &EmbeddingState) -> Vec<f64> {
    let mut flat = state.center.clone();
    flat.extend_from_slice(state.alpha.as_row_major());
    flat.extend_from_slice(&state.offset);
    flat
}

fn unflatten(template: &EmbeddingState, flat: &[f64]) -> EmbeddingState {
    let n = template.dim();
    let k = template.offset_len();
    debug_assert_eq!(flat.len(), n + n * n + k);
    EmbeddingState {
        center: flat[..n].to_vec(),
        alpha: Matrix::from_row_major(n, n, flat[n..n + n * n].to_vec()),
        offset: flat[n + n * n..].to_vec(),
        shape: template.shape,
    }
}

fn flatten_rhs(rhs: &EmbeddingRhs) -> Vec<f64> {
    let mut flat = rhs.center_dot.clone();
    flat.extend_from_slice(rhs.alpha_dot.as_row_major());
    flat.extend_from_slice(&rhs.offset_dot);
    flat
}

fn axpy(base: &[f64], scale: f64, dir: &[f64]) -> Vec<f64> {
    base.iter().zip(dir).map(|(b, d)| b + scale * d).collect()
}

/// Integrate the embedding ODE with a fixed step. Aborts with the step
/// index if the state goes non-finite, the frame becomes singular, or
/// the offsets invert.
pub fn integrate(
    sys: &DynamicalSystem,
    initial: &EmbeddingState,
    strategy: &BoundStrategy,
    t0: f64,
    tf: f64,
    steps: usize,
    method: IntegrationMethod,
) -> Result<EmbeddingTrajectory> {
    assert!(tf > t0, "tf must exceed t0");
    assert!(steps >= 1, "at least one step required");
    initial.to_parametope().map_err(|e| Error::Aborted {
        step: 0,
        cause: format!("invalid initial state: {e}"),
    })?;

    let h = (tf - t0) / steps as f64;
    let w_center = sys.nominal_disturbance();
    let w = w_center.as_deref();

    let eval = |flat: &[f64]| -> Result<(Vec<f64>, StepDiagnostics)> {
        let state = unflatten(initial, flat);
        let rhs = embedding_rhs(sys, &state, strategy, w)?;
        let diag = StepDiagnostics {
            max_offset_rate: rhs.max_offset_rate(),
            growth_rate: rhs.growth_rate,
        };
        Ok((flatten_rhs(&rhs), diag))
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps);
    times.push(t0);
    states.push(initial.clone());

    let mut flat = flatten(initial);
    for step in 0..steps {
        let wrap = |e: Error| Error::Aborted {
            step,
            cause: e.to_string(),
        };
        let next = match method {
            IntegrationMethod::Euler => {
                let (k1, diag) = eval(&flat).map_err(wrap)?;
                diagnostics.push(diag);
                axpy(&flat, h, &k1)
            }
            IntegrationMethod::Rk4 => {
                let (k1, diag) = eval(&flat).map_err(wrap)?;
                diagnostics.push(diag);
                let (k2, _) = eval(&axpy(&flat, 0.5 * h, &k1)).map_err(wrap)?;
                let (k3, _) = eval(&axpy(&flat, 0.5 * h, &k2)).map_err(wrap)?;
                let (k4, _) = eval(&axpy(&flat, h, &k3)).map_err(wrap)?;
                let mut combo = vec![0.0; flat.len()];
                for i in 0..flat.len() {
                    combo[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
                }
                axpy(&flat, h, &combo)
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Aborted {
                step,
                cause: "state became non-finite".to_string(),
            });
        }
        let state = unflatten(initial, &next);
        state.to_parametope().map_err(|e| Error::Aborted {
            step,
            cause: e.to_string(),
        })?;
        times.push(t0 + (step + 1) as f64 * h);
        states.push(state);
        flat = next;
    }

    Ok(EmbeddingTrajectory {
        times,
        states,
        meta: TrajectoryMeta {
            method,
            dt: h,
            strategy: strategy.describe(),
            diagnostics,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation() -> DynamicalSystem {
        DynamicalSystem::linear(Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]))
    }

    fn unit_box_state() -> EmbeddingState {
        let set = Parametope::symmetric_polytope(
            vec![0.0, 0.0],
            Matrix::identity(2),
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        EmbeddingState::from_parametope(&set)
    }

    #[test]
    fn adjoint_of_identity_negates_jacobian() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -0.75]]);
        let u = adjoint_update(&Matrix::identity(2), &a);
        assert_eq!(u, a.neg());
        let zero = Matrix::zeros(2, 2);
        assert_eq!(adjoint_update(&zero, &a), zero);
    }

    #[test]
    fn adjoint_negates_vanderpol_jacobian() {
        let sys = DynamicalSystem::vanderpol(0.25);
        let jac = jacobian_point(&sys, &[-2.0, 0.0]).unwrap();
        let u = adjoint_update(&Matrix::identity(2), &jac);
        let expected = Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.75]]);
        for r in 0..2 {
            for c in 0..2 {
                assert!((u.get(r, c) - expected.get(r, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_facet_bound_cancels_exactly() {
        let sys = rotation();
        let state = unit_box_state();
        let jac = jacobian_point(&sys, &state.center).unwrap();
        let u = adjoint_update(&state.alpha, &jac);
        for facet in state.to_parametope().unwrap().facet_ids() {
            let bound = xi_facet_bound(&sys, &state, &u, facet, None).unwrap();
            assert!(
                bound.abs() <= 1e-9,
                "facet {facet:?} bound {bound} not cancelled"
            );
        }
        // Pointwise, the assembled bracket is the zero matrix bit for
        // bit, so sampled growth values vanish identically.
        let assembled = u.add(&state.alpha.matmul(sys.linear_matrix().unwrap()));
        assert_eq!(assembled, Matrix::zeros(2, 2));
        for x in [[0.3, -0.7], [1.0, 1.0], [-0.25, 0.9]] {
            let xi = assembled.matvec(&x);
            assert_eq!(xi, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn point_set_has_zero_rates() {
        let set = Parametope::symmetric_polytope(
            vec![-2.0, 0.0],
            Matrix::identity(2),
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let state = EmbeddingState::from_parametope(&set);
        let sys = DynamicalSystem::vanderpol(0.25);
        let jac = jacobian_point(&sys, &state.center).unwrap();
        let u = adjoint_update(&state.alpha, &jac);
        for facet in set.facet_ids() {
            let bound = xi_facet_bound(&sys, &state, &u, facet, None).unwrap();
            assert!(bound.abs() < 1e-12, "facet {facet:?} rate {bound}");
        }
    }

    #[test]
    fn linear_ellipsoid_rate_is_zero() {
        let sys = rotation();
        let set = Parametope::ellipsoid(vec![0.3, -0.4], Matrix::identity(2), 1.0).unwrap();
        let state = EmbeddingState::from_parametope(&set);
        let strategy = BoundStrategy::EllipsoidEig {
            jacobian: JacobianSpec::Plain,
            corner_cap: 64,
        };
        let c = ellipsoid_growth_rate(&sys, &state, &strategy).unwrap();
        assert_eq!(c, 0.0);
        let rhs = embedding_rhs(&sys, &state, &strategy, None).unwrap();
        assert_eq!(rhs.offset_dot, vec![0.0]);
    }

    #[test]
    fn synthetic_shift_gives_rate_two() {
        // With enclosure {Df(x̊) + I} and α = I, the symmetrized error
        // matrix is 2I, so the rate is exactly 2.
        let sys = rotation();
        let set = Parametope::ellipsoid(vec![0.0, 0.0], Matrix::identity(2), 1.0).unwrap();
        let state = EmbeddingState::from_parametope(&set);
        let jac0 = jacobian_point(&sys, &[0.0, 0.0]).unwrap();
        let shifted = jac0.add(&Matrix::identity(2));
        let delta = state
            .alpha
            .matmul(&shifted.sub(&jac0))
            .matmul(&state.alpha.invert().unwrap());
        let sym = delta.transpose().add(&delta);
        assert!((sym.max_eigenvalue_sym().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vanderpol_rhs_center_matches_field() {
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
        assert!(rhs.max_offset_rate().is_finite());
    }

    #[test]
    fn zero_field_trajectory_is_constant() {
        let sys = DynamicalSystem::linear(Matrix::zeros(2, 2));
        let state = unit_box_state();
        let traj = integrate(
            &sys,
            &state,
            &BoundStrategy::IntervalFacet,
            0.0,
            1.0,
            1,
            IntegrationMethod::Rk4,
        )
        .unwrap();
        assert_eq!(traj.states.len(), 2);
        assert_eq!(traj.states[0], traj.states[1]);
    }

    #[test]
    fn runaway_growth_aborts_with_step_index() {
        // A wide initial ball around the arm makes the growth bound
        // self-amplify until the state leaves the representable range;
        // the integrator must stop with a diagnostic instead of storing
        // garbage.
        let sys = DynamicalSystem::robot_arm();
        let set = Parametope::ellipsoid(
            vec![1.5, 0.75, 0.0, 0.0],
            Matrix::identity(4).scale(2.0),
            1.0,
        )
        .unwrap();
        let state = EmbeddingState::from_parametope(&set);
        let strategy = BoundStrategy::EllipsoidEig {
            jacobian: JacobianSpec::Plain,
            corner_cap: 64,
        };
        let err = integrate(
            &sys,
            &state,
            &strategy,
            0.0,
            10.0,
            1000,
            IntegrationMethod::Euler,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Aborted { .. }), "got {err:?}");
    }

    #[test]
    fn strategy_shape_mismatch_is_rejected() {
        let sys = rotation();
        let state = unit_box_state();
        let strategy = BoundStrategy::EllipsoidEig {
            jacobian: JacobianSpec::Plain,
            corner_cap: 16,
        };
        assert!(matches!(
            embedding_rhs(&sys, &state, &strategy, None),
            Err(Error::WrongSetKind { .. })
        ));
    }

    #[test]
    fn disturbed_linear_box_grows_linearly() {
        let w = IntervalVector::from_bounds(&[-0.1, -0.1], &[0.1, 0.1]);
        let sys = rotation().with_disturbance(Matrix::identity(2), w);
        let state = unit_box_state();
        let traj = integrate(
            &sys,
            &state,
            &BoundStrategy::IntervalFacet,
            0.0,
            1.0,
            100,
            IntegrationMethod::Rk4,
        )
        .unwrap();
        let last = traj.states.last().unwrap();
        // Every stacked offset grows at rate 0.1 under the unit-box
        // disturbance, so after t = 1 each bound is 1.1.
        for v in &last.offset {
            assert!((v - 1.1).abs() < 1e-9, "offset {v}");
        }
    }
}
