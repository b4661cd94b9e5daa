//! Trajectory and set-boundary exports.
//!
//! The CSV column schema is fixed: `t`, `x_1..x_n`, `alpha_11..alpha_nn`
//! (row-major), `y_1..y_K`, with a mandatory header row. Values are
//! printed with 17 significant digits so a re-read reproduces every
//! float bit-exactly.

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use parareach::embedding::EmbeddingTrajectory;

/// One time slice of exported set geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSet {
    pub frames: Vec<Frame>,
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render the trajectory as CSV with the fixed column schema.
pub fn trajectory_csv(traj: &EmbeddingTrajectory) -> String {
    let n = traj.states[0].dim();
    let k = traj.states[0].offset.len();
    let mut header = vec!["t".to_string()];
    for i in 1..=n {
        header.push(format!("x_{i}"));
    }
    for r in 1..=n {
        for c in 1..=n {
            header.push(format!("alpha_{r}{c}"));
        }
    }
    for i in 1..=k {
        header.push(format!("y_{i}"));
    }
    let mut out = header.join(",");
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt_value(*t)];
        row.extend(s.center.iter().map(|v| fmt_value(*v)));
        row.extend(s.alpha.as_row_major().iter().map(|v| fmt_value(*v)));
        row.extend(s.offset.iter().map(|v| fmt_value(*v)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parse a trajectory CSV back into raw numeric rows (used by the
/// round-trip checks; the header row is validated and skipped).
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let Some(header) = lines.next() else {
        bail!("empty trajectory CSV");
    };
    if !header.starts_with("t,") {
        bail!("trajectory CSV missing header row");
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(str::parse::<f64>).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => bail!("trajectory CSV row {}: {e}", i + 2),
        }
    }
    Ok(rows)
}

/// Polytope vertices per stored time.
pub fn vertex_frames(traj: &EmbeddingTrajectory) -> Result<FrameSet> {
    let mut frames = Vec::with_capacity(traj.states.len());
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let set = state.to_parametope()?;
        frames.push(Frame {
            t: *t,
            points: set.vertices()?,
        });
    }
    Ok(FrameSet { frames })
}

/// Deterministic ellipsoid boundary samples per stored time.
pub fn boundary_frames(traj: &EmbeddingTrajectory, count: usize, seed: u64) -> Result<FrameSet> {
    let mut frames = Vec::with_capacity(traj.states.len());
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let set = state.to_parametope()?;
        frames.push(Frame {
            t: *t,
            points: set.boundary_samples(count, seed)?,
        });
    }
    Ok(FrameSet { frames })
}

/// Kind-appropriate boundary geometry: vertices for polytopes, sampled
/// boundary points for ellipsoids.
pub fn boundary_auto(traj: &EmbeddingTrajectory, count: usize, seed: u64) -> Result<FrameSet> {
    let polytope = traj.states[0].to_parametope()?.is_polytope();
    if polytope {
        vertex_frames(traj)
    } else {
        boundary_frames(traj, count, seed)
    }
}
