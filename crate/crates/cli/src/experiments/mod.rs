//! The five experiments. Each writes its files through an [`OutputDir`] and
//! returns a JSON summary.

mod cardioid;
mod confinement;
mod montecarlo;
mod probe;
mod simulate;

use std::path::Path;

use dislab::{Domain, Trajectory};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{num, Manifest, OutputDir};
use crate::CliError;

use cardioid::run_cardioid;
pub use cardioid::CardioidSummary;
use confinement::run_confinement;
pub use confinement::{ConfinementSummary, MinimizerReport, ProbeConvergence};
use montecarlo::run_montecarlo;
pub use montecarlo::MonteCarloSummary;
use probe::run_greens_probe;
use simulate::run_simulate;
pub use simulate::SimulateSummary;

/// Result of a finished experiment.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub summary: Value,
    /// Text for standard output (the probe records).
    pub stdout: Option<String>,
    /// Set when some runs failed numerically and the outputs are partial.
    pub failure: Option<String>,
}

pub(crate) struct Report {
    pub summary: Value,
    pub stdout: Option<String>,
    pub failure: Option<String>,
}

impl Report {
    pub fn new<T: Serialize>(summary: &T) -> Result<Self, CliError> {
        Ok(Self {
            summary: serde_json::to_value(summary).map_err(|e| CliError::Io(e.to_string()))?,
            stdout: None,
            failure: None,
        })
    }
}

pub fn run(experiment: Experiment, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    cfg.validate(experiment)?;
    let domain = cfg.domain.build()?;
    let mut dir = OutputDir::create(out)?;
    let result = match experiment {
        Experiment::Simulate => run_simulate(cfg, &domain, &mut dir),
        Experiment::Montecarlo => run_montecarlo(cfg, &domain, &mut dir),
        Experiment::Cardioid => run_cardioid(cfg, &domain, &mut dir),
        Experiment::Confinement => run_confinement(cfg, &domain, &mut dir),
        Experiment::GreensProbe => run_greens_probe(cfg, &domain, &mut dir),
    };
    match result {
        Ok(report) => {
            dir.write_json("summary.json", &report.summary)?;
            let manifest = dir.finish(experiment.name(), report.failure.clone())?;
            Ok(Outcome { manifest, summary: report.summary, stdout: report.stdout, failure: report.failure })
        }
        Err(e) => {
            dir.finish(experiment.name(), Some(e.to_string()))?;
            Err(e)
        }
    }
}

/// Input errors from the core library that should surface as configuration errors.
pub(crate) fn invalid_input(e: dislab::Error) -> CliError {
    CliError::config(e.to_string())
}

pub(crate) fn check_domain(domain: &Domain, bounded: bool, what: &str) -> Result<(), CliError> {
    if bounded && !domain.is_bounded() {
        return Err(CliError::config(format!("{what} needs a bounded domain")));
    }
    Ok(())
}

/// `run_id, t, i, x, y, b` records of one trajectory.
pub(crate) fn trajectory_rows(run_id: usize, traj: &Trajectory) -> Vec<[String; 6]> {
    let mut rows = Vec::new();
    for ((t, s), labels) in traj.times.iter().zip(&traj.states).zip(&traj.labels) {
        for (k, label) in labels.iter().enumerate() {
            rows.push([run_id.to_string(), num(*t), label.to_string(), num(s.z[k].x), num(s.z[k].y), s.b[k].to_string()]);
        }
    }
    rows
}

pub(crate) const TRAJECTORY_HEADER: [&str; 6] = ["run_id", "t", "i", "x", "y", "b"];

/// Per-dislocation paths with their Burgers moduli.
pub(crate) fn paths(traj: &Trajectory) -> Vec<(Vec<dislab::Vec2>, i32)> {
    let Some(first) = traj.states.first() else { return Vec::new() };
    (0..first.len()).map(|label| (traj.path(label).into_iter().map(|(_, p)| p).collect(), first.b[label])).collect()
}
