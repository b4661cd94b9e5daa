//! Parametric set representations: a center `x̊`, an invertible frame
//! matrix `α`, and offsets bounding a fixed nonlinearity of
//! `z = α (x - x̊)`. Two families are supported:
//!
//! * symmetric polytopes `{x : lo ≤ α (x - x̊) ≤ hi}` — an interval box
//!   in the transformed frame, and
//! * ellipsoids `{x : (x - x̊)ᵀ αᵀα (x - x̊) ≤ y}`.
//!
//! Facet enclosures map the transformed-frame boxes back through a
//! rigorously widened inverse of `α`, so every returned box is a
//! guaranteed superset of the corresponding facet.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalVector};
use crate::linalg::Matrix;

/// Identifies one constraint-equality facet of a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetId {
    /// Lower face of coordinate `k` in the transformed frame.
    Lower(usize),
    /// Upper face of coordinate `k` in the transformed frame.
    Upper(usize),
    /// The single boundary facet of an ellipsoid.
    Boundary,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParametopeKind {
    SymmetricPolytope { lo: Vec<f64>, hi: Vec<f64> },
    Ellipsoid { offset: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parametope {
    center: Vec<f64>,
    alpha: Matrix,
    kind: ParametopeKind,
}

impl Parametope {
    /// Symmetric polytope `{x : lo ≤ α (x - x̊) ≤ hi}`.
    pub fn symmetric_polytope(
        center: Vec<f64>,
        alpha: Matrix,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Parametope> {
        let n = center.len();
        if !alpha.is_square() || alpha.rows() != n {
            return Err(Error::Dimension {
                context: format!("alpha is {}x{}, center has length {n}", alpha.rows(), alpha.cols()),
            });
        }
        if lo.len() != n || hi.len() != n {
            return Err(Error::Dimension {
                context: format!("offsets have lengths {}/{}, expected {n}", lo.len(), hi.len()),
            });
        }
        // NaN offsets must be rejected too, hence the explicit checks.
        if let Some(k) = (0..n).find(|&k| lo[k] > hi[k] || lo[k].is_nan() || hi[k].is_nan()) {
            return Err(Error::InvalidSet(format!(
                "offset bounds inverted in coordinate {k}: {} > {}",
                lo[k], hi[k]
            )));
        }
        alpha.invert()?;
        Ok(Parametope {
            center,
            alpha,
            kind: ParametopeKind::SymmetricPolytope { lo, hi },
        })
    }

    /// Ellipsoid `{x : (x - x̊)ᵀ αᵀα (x - x̊) ≤ offset}`.
    pub fn ellipsoid(center: Vec<f64>, alpha: Matrix, offset: f64) -> Result<Parametope> {
        let n = center.len();
        if !alpha.is_square() || alpha.rows() != n {
            return Err(Error::Dimension {
                context: format!("alpha is {}x{}, center has length {n}", alpha.rows(), alpha.cols()),
            });
        }
        if offset < 0.0 || offset.is_nan() {
            return Err(Error::InvalidSet(format!(
                "ellipsoid offset must be nonnegative, got {offset}"
            )));
        }
        alpha.invert()?;
        Ok(Parametope {
            center,
            alpha,
            kind: ParametopeKind::Ellipsoid { offset },
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn alpha(&self) -> &Matrix {
        &self.alpha
    }

    pub fn kind(&self) -> &ParametopeKind {
        &self.kind
    }

    pub fn is_polytope(&self) -> bool {
        matches!(self.kind, ParametopeKind::SymmetricPolytope { .. })
    }

    /// Number of constraint rows: `2n` for a polytope, 1 for an ellipsoid.
    pub fn constraint_count(&self) -> usize {
        match self.kind {
            ParametopeKind::SymmetricPolytope { .. } => 2 * self.dim(),
            ParametopeKind::Ellipsoid { .. } => 1,
        }
    }

    /// Facets in stacked constraint order: lower faces, then upper.
    pub fn facet_ids(&self) -> Vec<FacetId> {
        match self.kind {
            ParametopeKind::SymmetricPolytope { .. } => (0..self.dim())
                .map(FacetId::Lower)
                .chain((0..self.dim()).map(FacetId::Upper))
                .collect(),
            ParametopeKind::Ellipsoid { .. } => vec![FacetId::Boundary],
        }
    }

    /// Exact membership test (no slack).
    pub fn contains(&self, x: &[f64]) -> bool {
        self.violation(x) <= 0.0
    }

    /// Largest constraint excess at `x`; nonpositive means `x` is inside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        let diff: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let z = self.alpha.matvec(&diff);
        match &self.kind {
            ParametopeKind::SymmetricPolytope { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&zk, (&l, &h))| (l - zk).max(zk - h))
                .fold(f64::NEG_INFINITY, f64::max),
            ParametopeKind::Ellipsoid { offset } => {
                let quad: f64 = z.iter().map(|v| v * v).sum();
                quad - offset
            }
        }
    }

    /// Constraint index (in stacked order) with the largest excess at `x`.
    pub fn worst_constraint(&self, x: &[f64]) -> usize {
        let diff: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let z = self.alpha.matvec(&diff);
        match &self.kind {
            ParametopeKind::SymmetricPolytope { lo, hi } => {
                let n = self.dim();
                let mut worst = 0;
                let mut value = f64::NEG_INFINITY;
                for k in 0..n {
                    if lo[k] - z[k] > value {
                        value = lo[k] - z[k];
                        worst = k;
                    }
                    if z[k] - hi[k] > value {
                        value = z[k] - hi[k];
                        worst = n + k;
                    }
                }
                worst
            }
            ParametopeKind::Ellipsoid { .. } => 0,
        }
    }

    /// The facet's region in the transformed frame: the offset box with
    /// the facet coordinate pinned to its face value, or the bounding
    /// box of the boundary sphere for an ellipsoid.
    pub fn facet_box_z(&self, facet: FacetId) -> Result<IntervalVector> {
        match (&self.kind, facet) {
            (ParametopeKind::SymmetricPolytope { lo, hi }, FacetId::Lower(k))
            | (ParametopeKind::SymmetricPolytope { lo, hi }, FacetId::Upper(k)) => {
                if k >= self.dim() {
                    return Err(Error::Dimension {
                        context: format!("facet coordinate {k} out of range"),
                    });
                }
                let mut z = IntervalVector::from_bounds(lo, hi);
                let pinned = match facet {
                    FacetId::Lower(_) => lo[k],
                    _ => hi[k],
                };
                z.set(k, Interval::point(pinned));
                Ok(z)
            }
            (ParametopeKind::Ellipsoid { offset }, FacetId::Boundary) => {
                let r = offset.sqrt();
                Ok(IntervalVector::new(vec![Interval::new(-r, r); self.dim()]))
            }
            (ParametopeKind::SymmetricPolytope { .. }, FacetId::Boundary) => {
                Err(Error::WrongSetKind {
                    expected: "ellipsoid",
                })
            }
            (ParametopeKind::Ellipsoid { .. }, _) => Err(Error::WrongSetKind {
                expected: "symmetric polytope",
            }),
        }
    }

    /// A box in state space guaranteed to contain the facet, computed as
    /// `x̊ + α⁻¹ · Z` through the widened inverse enclosure.
    pub fn facet_enclosure(&self, facet: FacetId) -> Result<IntervalVector> {
        let z = self.facet_box_z(facet)?;
        let inv = self.alpha.enclose_inverse()?;
        Ok(inv.matvec(&z).shift_by(&self.center))
    }

    /// Vertices of a symmetric polytope: the images of the `2ⁿ` corners
    /// of the offset box under `x̊ + α⁻¹ z`, in mask order (bit `j` set
    /// picks the upper bound of coordinate `j`).
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        let ParametopeKind::SymmetricPolytope { lo, hi } = &self.kind else {
            return Err(Error::WrongSetKind {
                expected: "symmetric polytope",
            });
        };
        let n = self.dim();
        let inv = self.alpha.invert()?;
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let z: Vec<f64> = (0..n)
                .map(|j| if mask & (1 << j) != 0 { hi[j] } else { lo[j] })
                .collect();
            let offset = inv.matvec(&z);
            out.push(
                self.center
                    .iter()
                    .zip(offset)
                    .map(|(c, d)| c + d)
                    .collect(),
            );
        }
        Ok(out)
    }

    /// Deterministic points on an ellipsoid's boundary, for plotting and
    /// sampling oracles. Fixed seed gives identical output.
    pub fn boundary_samples(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let ParametopeKind::Ellipsoid { offset } = self.kind else {
            return Err(Error::WrongSetKind {
                expected: "ellipsoid",
            });
        };
        let n = self.dim();
        let inv = self.alpha.invert()?;
        let radius = offset.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let u = random_unit_vector(&mut rng, n);
            let z: Vec<f64> = u.iter().map(|v| radius * v).collect();
            let d = inv.matvec(&z);
            out.push(self.center.iter().zip(d).map(|(c, d)| c + d).collect());
        }
        Ok(out)
    }
}

pub(crate) fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

// --- JSON wire format -------------------------------------------------
//
// {"kind": "symmetric_polytope" | "ellipsoid",
//  "center": [...], "alpha": [row-major...],
//  "offset": [lo..., hi...] | [y]}

#[derive(Serialize, Deserialize)]
struct ParametopeWire {
    kind: String,
    center: Vec<f64>,
    alpha: Vec<f64>,
    offset: Vec<f64>,
}

impl Serialize for Parametope {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, offset) = match &self.kind {
            ParametopeKind::SymmetricPolytope { lo, hi } => (
                "symmetric_polytope".to_string(),
                lo.iter().chain(hi).copied().collect(),
            ),
            ParametopeKind::Ellipsoid { offset } => ("ellipsoid".to_string(), vec![*offset]),
        };
        ParametopeWire {
            kind,
            center: self.center.clone(),
            alpha: self.alpha.as_row_major().to_vec(),
            offset,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Parametope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let wire = ParametopeWire::deserialize(deserializer)?;
        let n = wire.center.len();
        if n == 0 {
            return Err(DeError::custom("center: must be nonempty"));
        }
        if wire.alpha.len() != n * n {
            return Err(DeError::custom(format!(
                "alpha: expected {} row-major entries for dimension {n}, got {}",
                n * n,
                wire.alpha.len()
            )));
        }
        let alpha = Matrix::from_row_major(n, n, wire.alpha);
        let set = match wire.kind.as_str() {
            "symmetric_polytope" => {
                if wire.offset.len() != 2 * n {
                    return Err(DeError::custom(format!(
                        "offset: expected {} values (lo then hi), got {}",
                        2 * n,
                        wire.offset.len()
                    )));
                }
                let lo = wire.offset[..n].to_vec();
                let hi = wire.offset[n..].to_vec();
                Parametope::symmetric_polytope(wire.center, alpha, lo, hi)
            }
            "ellipsoid" => {
                if wire.offset.len() != 1 {
                    return Err(DeError::custom(format!(
                        "offset: expected a single value, got {}",
                        wire.offset.len()
                    )));
                }
                Parametope::ellipsoid(wire.center, alpha, wire.offset[0])
            }
            other => {
                return Err(DeError::custom(format!(
                    "kind: unknown value `{other}` (expected `symmetric_polytope` or `ellipsoid`)"
                )))
            }
        };
        set.map_err(|e| DeError::custom(format!("invalid parametope: {e}")))
    }
}
