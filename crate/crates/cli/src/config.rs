//! Experiment configuration: one JSON file fully reproduces a run.
//!
//! ```json
//! {
//!   "id": "vanderpol_polytope",
//!   "system": {"id": "vanderpol", "params": {"mu": 0.25}},
//!   "initial": {"kind": "symmetric_polytope", "center": [-2.0, 0.0],
//!               "alpha": [1, 0, 0, 1],
//!               "offset": [-0.125, -0.00125, 0.125, 0.00125]},
//!   "strategy": {"variant": "interval_facet"},
//!   "integrate": {"method": "rk4", "t0": 0.0, "tf": 6.9115, "steps": 500},
//!   "verify": {"samples": 1000, "seed": 2025},
//!   "output": {"dir": "out/vanderpol"}
//! }
//! ```

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use parareach::autodiff::JacobianSpec;
use parareach::embedding::{BoundStrategy, IntegrationMethod};
use parareach::interval::IntervalVector;
use parareach::linalg::Matrix;
use parareach::parametope::Parametope;
use parareach::systems::DynamicalSystem;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub id: Option<String>,
    pub system: SystemConfig,
    pub initial: Parametope,
    pub strategy: StrategyConfig,
    pub integrate: IntegrateConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub id: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub variant: String,
    #[serde(default)]
    pub jacobian_mode: Option<String>,
    #[serde(default)]
    pub corner_cap: Option<usize>,
    #[serde(default)]
    pub mixed_order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateConfig {
    pub method: String,
    pub t0: f64,
    pub tf: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    100
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: default_samples(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
}

/// A validated, ready-to-run experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub id: String,
    pub system: DynamicalSystem,
    pub initial: Parametope,
    pub strategy: BoundStrategy,
    pub method: IntegrationMethod,
    pub t0: f64,
    pub tf: f64,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub output_dir: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VanDerPolParams {
    mu: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearParams {
    a: Vec<Vec<f64>>,
    #[serde(default)]
    c: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    w: Option<BoxParams>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxParams {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn matrix_from_rows(rows: &[Vec<f64>], field: &str) -> Result<Matrix> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        bail!("{field}: must be a nonempty rectangular array of rows");
    }
    Ok(Matrix::from_rows(rows))
}

/// Parse a config file, reporting the offending field path on schema
/// errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow::anyhow!("config field `{}`: {}", e.path(), e.inner()))?;
    Ok(config)
}

impl ExperimentConfig {
    /// Semantic validation on top of the schema: dimensions agree, the
    /// strategy matches the set family, counts are sane.
    pub fn validate(&self) -> Result<Experiment> {
        let system = self.build_system()?;
        let n = self.initial.dim();
        if system_dim(&system) != n {
            bail!(
                "initial.center: dimension {n} does not match system `{}` (dimension {})",
                self.system.id,
                system_dim(&system)
            );
        }

        let strategy = self.build_strategy(n)?;
        match (&strategy, self.initial.is_polytope()) {
            (BoundStrategy::IntervalFacet, false) => {
                bail!("strategy.variant: `interval_facet` requires a symmetric_polytope initial set")
            }
            (BoundStrategy::EllipsoidEig { .. }, true) => {
                bail!("strategy.variant: `ellipsoid_eig` requires an ellipsoid initial set")
            }
            _ => {}
        }

        let method = match self.integrate.method.as_str() {
            "euler" => IntegrationMethod::Euler,
            "rk4" => IntegrationMethod::Rk4,
            other => bail!("integrate.method: unknown value `{other}` (expected `euler` or `rk4`)"),
        };
        if self.integrate.steps < 1 {
            bail!("integrate.steps: must be at least 1");
        }
        let span_ok = self.integrate.tf > self.integrate.t0;
        if !span_ok || self.integrate.tf.is_nan() || self.integrate.t0.is_nan() {
            bail!(
                "integrate.tf: must exceed integrate.t0 ({} vs {})",
                self.integrate.tf,
                self.integrate.t0
            );
        }

        let id = self
            .id
            .clone()
            .unwrap_or_else(|| format!("{}_{}", self.system.id, self.strategy.variant));
        let output_dir = self.output.dir.clone().unwrap_or_else(|| "out".to_string());

        Ok(Experiment {
            id,
            system,
            initial: self.initial.clone(),
            strategy,
            method,
            t0: self.integrate.t0,
            tf: self.integrate.tf,
            steps: self.integrate.steps,
            samples: self.verify.samples,
            seed: self.verify.seed,
            output_dir,
        })
    }

    fn build_system(&self) -> Result<DynamicalSystem> {
        match self.system.id.as_str() {
            "vanderpol" => {
                let p: VanDerPolParams = serde_json::from_value(self.system.params.clone())
                    .map_err(|e| anyhow::anyhow!("system.params: {e}"))?;
                if !p.mu.is_finite() {
                    bail!("system.params.mu: must be finite");
                }
                Ok(DynamicalSystem::vanderpol(p.mu))
            }
            "robot_arm" => {
                if !self.system.params.is_null()
                    && self.system.params != serde_json::json!({})
                {
                    bail!("system.params: robot_arm takes no parameters");
                }
                Ok(DynamicalSystem::robot_arm())
            }
            "linear" => {
                let p: LinearParams = serde_json::from_value(self.system.params.clone())
                    .map_err(|e| anyhow::anyhow!("system.params: {e}"))?;
                let a = matrix_from_rows(&p.a, "system.params.a")?;
                if !a.is_square() {
                    bail!("system.params.a: must be square");
                }
                let mut sys = DynamicalSystem::linear(a.clone());
                match (p.c, p.w) {
                    (Some(c), Some(w)) => {
                        let c = matrix_from_rows(&c, "system.params.c")?;
                        if w.lo.len() != w.hi.len() {
                            bail!("system.params.w: lo and hi lengths differ");
                        }
                        if c.rows() != a.rows() || c.cols() != w.lo.len() {
                            bail!(
                                "system.params.c: must be {}x{} to match the state and disturbance",
                                a.rows(),
                                w.lo.len()
                            );
                        }
                        if w.lo.iter().zip(&w.hi).any(|(l, h)| l > h) {
                            bail!("system.params.w: lo must not exceed hi");
                        }
                        sys = sys.with_disturbance(c, IntervalVector::from_bounds(&w.lo, &w.hi));
                    }
                    (None, None) => {}
                    _ => bail!("system.params: c and w must be given together"),
                }
                Ok(sys)
            }
            other => bail!(
                "system.id: unknown system `{other}` (expected `vanderpol`, `robot_arm`, or `linear`)"
            ),
        }
    }

    fn build_strategy(&self, dim: usize) -> Result<BoundStrategy> {
        match self.strategy.variant.as_str() {
            "interval_facet" => {
                if self.strategy.jacobian_mode.is_some()
                    || self.strategy.corner_cap.is_some()
                    || self.strategy.mixed_order.is_some()
                {
                    bail!("strategy: interval_facet takes no jacobian_mode/corner_cap/mixed_order");
                }
                Ok(BoundStrategy::IntervalFacet)
            }
            "ellipsoid_eig" => {
                let jacobian = match self.strategy.jacobian_mode.as_deref().unwrap_or("plain") {
                    "plain" => JacobianSpec::Plain,
                    "mixed" => {
                        let order = self
                            .strategy
                            .mixed_order
                            .clone()
                            .unwrap_or_else(|| (0..dim).collect());
                        let mut seen = vec![false; dim];
                        for &j in &order {
                            if j >= dim || seen[j] {
                                bail!("strategy.mixed_order: must be a permutation of 0..{dim}");
                            }
                            seen[j] = true;
                        }
                        if order.len() != dim {
                            bail!("strategy.mixed_order: must be a permutation of 0..{dim}");
                        }
                        JacobianSpec::Mixed { order }
                    }
                    other => bail!(
                        "strategy.jacobian_mode: unknown value `{other}` (expected `plain` or `mixed`)"
                    ),
                };
                let corner_cap = self.strategy.corner_cap.unwrap_or(64);
                if corner_cap < 1 {
                    bail!("strategy.corner_cap: must be at least 1");
                }
                Ok(BoundStrategy::EllipsoidEig {
                    jacobian,
                    corner_cap,
                })
            }
            other => bail!(
                "strategy.variant: unknown value `{other}` (expected `interval_facet` or `ellipsoid_eig`)"
            ),
        }
    }
}

fn system_dim(sys: &DynamicalSystem) -> usize {
    use parareach::autodiff::VectorField;
    sys.dim()
}
