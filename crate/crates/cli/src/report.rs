//! Run summaries printed to the terminal and written alongside the
//! exported artifacts.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySummary {
    pub samples: usize,
    pub checks: usize,
    pub violations: usize,
    pub max_slack: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub id: String,
    pub method: String,
    pub strategy: String,
    pub steps: usize,
    pub dt: f64,
    pub wall_seconds: f64,
    /// Largest offset rate seen at any accepted step.
    pub max_offset_rate: f64,
    pub final_offset: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerifySummary>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verification
            .as_ref()
            .map(|v| v.violations == 0)
            .unwrap_or(true)
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment:       {}", self.id)?;
        writeln!(
            f,
            "integration:      {} steps of {} (dt = {:.6e})",
            self.steps, self.method, self.dt
        )?;
        writeln!(f, "strategy:         {}", self.strategy)?;
        writeln!(f, "wall time:        {:.4} s", self.wall_seconds)?;
        writeln!(f, "max offset rate:  {:.6e}", self.max_offset_rate)?;
        let offsets: Vec<String> = self
            .final_offset
            .iter()
            .map(|v| format!("{v:.6e}"))
            .collect();
        writeln!(f, "final offset:     [{}]", offsets.join(", "))?;
        if let Some(v) = &self.verification {
            writeln!(
                f,
                "verification:     {} samples, {} checks, {} violations, max slack {:.3e}",
                v.samples, v.checks, v.violations, v.max_slack
            )?;
        }
        Ok(())
    }
}
