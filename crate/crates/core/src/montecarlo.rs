//! Monte-Carlo containment oracle. Samples initial states uniformly in
//! the initial set, integrates each with a reference RK4 at ten times
//! the embedding's temporal resolution (disturbances, when present, are
//! held piecewise constant per fine step at independently sampled
//! values), and checks membership in the stored set at every embedding
//! time. A sound embedding run reports zero violations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingTrajectory;
use crate::error::Result;
use crate::parametope::{random_unit_vector, Parametope, ParametopeKind};
use crate::systems::DynamicalSystem;

/// Reference steps per embedding step.
pub const REFINEMENT: usize = 10;

/// Default membership slack for floating-point checks.
pub const DEFAULT_SLACK: f64 = 1e-7;

/// One containment failure: sample, time, and the offending constraint.
#[derive(Clone, Debug)]
pub struct Violation {
    pub sample: usize,
    pub step: usize,
    pub time: f64,
    pub constraint: usize,
    pub excess: f64,
}

#[derive(Clone, Debug)]
pub struct ContainmentReport {
    pub samples: usize,
    pub checks: usize,
    pub violations: Vec<Violation>,
    /// Largest constraint excess seen over all checks; negative values
    /// mean every sample stayed inside with that much margin.
    pub max_slack: f64,
}

impl ContainmentReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Uniform sample inside a set: uniform in the transformed-frame box
/// (polytope) or ball (ellipsoid), mapped back through `α⁻¹`.
pub fn sample_in_parametope(
    set: &Parametope,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let inv = set.alpha().invert()?;
    let n = set.dim();
    let z: Vec<f64> = match set.kind() {
        ParametopeKind::SymmetricPolytope { lo, hi } => (0..n)
            .map(|k| {
                if hi[k] > lo[k] {
                    rng.random_range(lo[k]..hi[k])
                } else {
                    lo[k]
                }
            })
            .collect(),
        ParametopeKind::Ellipsoid { offset } => {
            let u = random_unit_vector(rng, n);
            let r = offset.sqrt() * rng.random_range(0.0..1.0f64).powf(1.0 / n as f64);
            u.into_iter().map(|v| r * v).collect()
        }
    };
    let d = inv.matvec(&z);
    Ok(set.center().iter().zip(d).map(|(c, d)| c + d).collect())
}

fn rk4_step(sys: &DynamicalSystem, x: &[f64], w: Option<&[f64]>, h: f64) -> Vec<f64> {
    let k1 = sys.drift(x, w);
    let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
    let k2 = sys.drift(&x2, w);
    let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
    let k3 = sys.drift(&x3, w);
    let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
    let k4 = sys.drift(&x4, w);
    x.iter()
        .enumerate()
        .map(|(i, a)| a + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Check every sampled trajectory against the stored tube.
///
/// Deterministic for a fixed seed; each sample draws from its own
/// derived stream so the check order cannot change the outcome.
pub fn verify_containment(
    sys: &DynamicalSystem,
    trajectory: &EmbeddingTrajectory,
    samples: usize,
    seed: u64,
    slack: f64,
) -> Result<ContainmentReport> {
    let sets = trajectory.parametopes()?;
    let initial = &sets[0];
    let steps = sets.len() - 1;
    let fine_h = trajectory.meta.dt / REFINEMENT as f64;

    let mut violations = Vec::new();
    let mut max_slack = f64::NEG_INFINITY;
    let mut checks = 0usize;

    for sample in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (sample as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let mut x = sample_in_parametope(initial, &mut rng)?;

        for (step, set) in sets.iter().enumerate() {
            let excess = set.violation(&x);
            checks += 1;
            max_slack = max_slack.max(excess);
            if excess > slack {
                violations.push(Violation {
                    sample,
                    step,
                    time: trajectory.times[step],
                    constraint: set.worst_constraint(&x),
                    excess,
                });
            }
            if step == steps {
                break;
            }
            for _ in 0..REFINEMENT {
                let w = sys.disturbance().map(|d| {
                    (0..d.bounds.len())
                        .map(|j| {
                            let iv = d.bounds.get(j);
                            if iv.sup() > iv.inf() {
                                rng.random_range(iv.inf()..iv.sup())
                            } else {
                                iv.inf()
                            }
                        })
                        .collect::<Vec<f64>>()
                });
                x = rk4_step(sys, &x, w.as_deref(), fine_h);
            }
        }
    }

    if samples == 0 {
        max_slack = 0.0;
    }
    Ok(ContainmentReport {
        samples,
        checks,
        violations,
        max_slack,
    })
}
