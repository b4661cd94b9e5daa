//! Experiment driver for the parareach library: load a config, run the
//! embedding, audit the result with the Monte-Carlo containment oracle,
//! and export trajectories and set boundaries.

pub mod config;
pub mod export;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};

use parareach::embedding::{integrate, EmbeddingState, EmbeddingTrajectory};
use parareach::montecarlo::{verify_containment, ContainmentReport, DEFAULT_SLACK};

use config::{load_config, Experiment};
use report::{RunReport, VerifySummary};

/// Default number of boundary sample points per exported frame.
pub const BOUNDARY_POINTS: usize = 64;

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "PARAREACH_OUT_DIR";

pub fn resolve_output_dir(exp: &Experiment, cli_override: Option<&str>) -> PathBuf {
    if let Some(dir) = cli_override {
        return PathBuf::from(dir);
    }
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(&exp.output_dir)
}

/// Integrate the embedding described by a validated experiment.
pub fn run_embedding(exp: &Experiment) -> Result<(EmbeddingTrajectory, RunReport)> {
    let initial = EmbeddingState::from_parametope(&exp.initial);
    let start = Instant::now();
    let traj = integrate(
        &exp.system,
        &initial,
        &exp.strategy,
        exp.t0,
        exp.tf,
        exp.steps,
        exp.method,
    )?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let max_offset_rate = traj
        .meta
        .diagnostics
        .iter()
        .map(|d| d.max_offset_rate)
        .fold(f64::NEG_INFINITY, f64::max);
    let report = RunReport {
        id: exp.id.clone(),
        method: traj.meta.method.name().to_string(),
        strategy: traj.meta.strategy.clone(),
        steps: exp.steps,
        dt: traj.meta.dt,
        wall_seconds,
        max_offset_rate,
        final_offset: traj.states.last().unwrap().offset.clone(),
        verification: None,
    };
    Ok((traj, report))
}

/// `run`: integrate, write `trajectory.csv` and `boundary.json` (plus
/// `report.json`), and return the report.
pub fn cmd_run(config_path: &Path, out_override: Option<&str>) -> Result<RunReport> {
    let exp = load_config(config_path)?.validate()?;
    let (traj, report) = run_embedding(&exp)?;
    let dir = resolve_output_dir(&exp, out_override);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    fs::write(dir.join("trajectory.csv"), export::trajectory_csv(&traj))?;
    let boundary = export::boundary_auto(&traj, BOUNDARY_POINTS, exp.seed)?;
    fs::write(
        dir.join("boundary.json"),
        serde_json::to_string_pretty(&boundary)?,
    )?;
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

/// `verify`: recompute the trajectory from the config and check sampled
/// true trajectories against it.
pub fn cmd_verify(
    config_path: &Path,
    samples: Option<usize>,
    seed: Option<u64>,
) -> Result<(RunReport, ContainmentReport)> {
    let exp = load_config(config_path)?.validate()?;
    let (traj, mut report) = run_embedding(&exp)?;
    let samples = samples.unwrap_or(exp.samples);
    let seed = seed.unwrap_or(exp.seed);
    let containment = verify_containment(&exp.system, &traj, samples, seed, DEFAULT_SLACK)?;
    report.verification = Some(VerifySummary {
        samples: containment.samples,
        checks: containment.checks,
        violations: containment.violations.len(),
        max_slack: containment.max_slack,
    });
    Ok((report, containment))
}

/// What `export` should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    Vertices,
    Boundary,
    Trajectory,
}

impl std::str::FromStr for ExportKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertices" => Ok(ExportKind::Vertices),
            "boundary" => Ok(ExportKind::Boundary),
            "trajectory" => Ok(ExportKind::Trajectory),
            other => anyhow::bail!(
                "unknown export kind `{other}` (expected vertices, boundary, or trajectory)"
            ),
        }
    }
}

/// `export`: recompute the trajectory and write the requested artifact.
/// Returns the written path.
pub fn cmd_export(
    config_path: &Path,
    what: ExportKind,
    out_override: Option<&str>,
) -> Result<PathBuf> {
    let exp = load_config(config_path)?.validate()?;
    let (traj, _) = run_embedding(&exp)?;
    let dir = resolve_output_dir(&exp, out_override);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = match what {
        ExportKind::Trajectory => {
            let path = dir.join("trajectory.csv");
            fs::write(&path, export::trajectory_csv(&traj))?;
            path
        }
        ExportKind::Vertices => {
            let frames = export::vertex_frames(&traj)?;
            let path = dir.join("vertices.json");
            fs::write(&path, serde_json::to_string_pretty(&frames)?)?;
            path
        }
        ExportKind::Boundary => {
            let frames = export::boundary_frames(&traj, BOUNDARY_POINTS, exp.seed)?;
            let path = dir.join("boundary.json");
            fs::write(&path, serde_json::to_string_pretty(&frames)?)?;
            path
        }
    };
    Ok(path)
}
