use std::f64::consts::PI;

use dislab::dynamics::integrate;
use dislab::geometry::{sample_interior, SamplingRegion};
use dislab::{DislocationSystem, Domain, EventKind, Trajectory};
use rayon::prelude::*;
use serde::Serialize;

use super::simulate::{event_row, EVENT_HEADER};
use super::{check_domain, paths, trajectory_rows, Report, TRAJECTORY_HEADER};
use crate::output::{num, OutputDir};
use crate::{svg, CliError};

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSummary {
    pub runs: usize,
    pub completed: usize,
    pub failed: usize,
    pub acceptance_rate: f64,
    pub boundary_hits: usize,
    pub dipole_collisions: usize,
    pub no_event: usize,
    pub fraction_boundary: f64,
    pub fraction_dipole: f64,
    /// `2 pi delta^2`.
    pub leading_order_bound: f64,
    pub max_boundary_time: Option<f64>,
    pub mean_boundary_time: Option<f64>,
    /// Fraction of boundary hits at or below the leading-order bound.
    pub fraction_within_bound: Option<f64>,
    pub histogram_upper: f64,
}

enum RunResult {
    Done(Trajectory),
    Failed(String),
}

fn kind_name(t: &Trajectory) -> &'static str {
    match t.first_event().map(|e| &e.kind) {
        Some(EventKind::BoundaryHit { .. }) => "boundary-hit",
        Some(EventKind::DipoleCollision { .. }) => "dipole-collision",
        Some(EventKind::Annihilation { .. }) => "annihilation",
        None => "none",
    }
}

fn fraction(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

pub(crate) fn run_montecarlo(cfg: &crate::ExperimentConfig, domain: &Domain, out: &mut OutputDir) -> Result<Report, CliError> {
    check_domain(domain, true, "montecarlo")?;
    let m = cfg.montecarlo.clone().unwrap_or_default();
    let region = SamplingRegion::D { n: m.n, delta: m.delta, gamma: m.gamma };
    let samples = sample_interior(domain, region, m.runs, cfg.seed, None)?;
    let results: Vec<RunResult> = samples
        .configurations
        .par_iter()
        .map(|z| {
            let sys = DislocationSystem::new(z.clone(), m.burgers.clone());
            match integrate(domain, &sys, m.t_max, &cfg.integrator) {
                Ok(t) => RunResult::Done(t),
                Err(e) => RunResult::Failed(e.to_string()),
            }
        })
        .collect();

    let mut runs = Vec::new();
    let mut events = Vec::new();
    let mut boundary_times = Vec::new();
    let (mut dipoles, mut none, mut failed) = (0, 0, 0);
    for (id, (r, z)) in results.iter().zip(&samples.configurations).enumerate() {
        let mut row = vec![id.to_string()];
        for p in z {
            row.push(num(p.x));
            row.push(num(p.y));
        }
        match r {
            RunResult::Done(t) => {
                let time = t.first_event().map(|e| e.time);
                match t.first_event().map(|e| &e.kind) {
                    Some(EventKind::BoundaryHit { .. }) => boundary_times.push(time.expect("event")),
                    Some(_) => dipoles += 1,
                    None => none += 1,
                }
                row.extend(["ok".into(), kind_name(t).into(), time.map_or(String::new(), num), String::new()]);
                events.extend(t.events.iter().map(|e| event_row(id, e)));
            }
            RunResult::Failed(msg) => {
                failed += 1;
                row.extend(["failed".into(), String::new(), String::new(), msg.clone()]);
            }
        }
        runs.push(row);
    }
    let mut header: Vec<String> = vec!["run_id".into()];
    for k in 0..m.n {
        header.push(format!("x{k}"));
        header.push(format!("y{k}"));
    }
    header.extend(["status", "first_event", "time", "error"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_table("runs.csv", b',', &header, runs)?;
    out.write_table("events.csv", b',', &EVENT_HEADER, events)?;
    if m.trajectories {
        let rows = results.iter().enumerate().flat_map(|(id, r)| match r {
            RunResult::Done(t) => trajectory_rows(id, t),
            RunResult::Failed(_) => Vec::new(),
        });
        out.write_table("trajectories.csv", b',', &TRAJECTORY_HEADER, rows)?;
    }

    let bound = 2.0 * PI * m.delta * m.delta;
    let max_t = boundary_times.iter().copied().fold(None, |a: Option<f64>, t| Some(a.map_or(t, |a| a.max(t))));
    let upper = max_t.unwrap_or(bound).max(bound) * (1.0 + 1e-12);
    let mut counts = vec![0usize; m.bins];
    for t in &boundary_times {
        let k = ((t / upper) * m.bins as f64) as usize;
        counts[k.min(m.bins - 1)] += 1;
    }
    let w = upper / m.bins as f64;
    out.write_table(
        "histogram.csv",
        b',',
        &["bin_lo", "bin_hi", "count"],
        counts.iter().enumerate().map(|(k, c)| [num(k as f64 * w), num((k + 1) as f64 * w), c.to_string()]),
    )?;
    out.write("histogram.svg", svg::histogram(&counts, upper, Some(bound), "boundary hit times").as_bytes())?;
    let sup: Vec<(Vec<dislab::Vec2>, i32)> = results
        .iter()
        .filter_map(|r| match r {
            RunResult::Done(t) => Some(paths(t)),
            RunResult::Failed(_) => None,
        })
        .flatten()
        .map(|(p, b)| (svg::thin(&p, m.svg_points), b))
        .collect();
    out.write("superposition.svg", svg::trajectories(domain, &sup, &[], "superposed trajectories").as_bytes())?;

    let completed = m.runs - failed;
    let hits = boundary_times.len();
    let mut report = Report::new(&MonteCarloSummary {
        runs: m.runs,
        completed,
        failed,
        acceptance_rate: samples.acceptance_rate,
        boundary_hits: hits,
        dipole_collisions: dipoles,
        no_event: none,
        fraction_boundary: fraction(hits, completed),
        fraction_dipole: fraction(dipoles, completed),
        leading_order_bound: bound,
        max_boundary_time: max_t,
        mean_boundary_time: (hits > 0).then(|| boundary_times.iter().sum::<f64>() / hits as f64),
        fraction_within_bound: (hits > 0).then(|| fraction(boundary_times.iter().filter(|t| **t <= bound).count(), hits)),
        histogram_upper: upper,
    })?;
    if failed > 0 {
        report.failure = Some(format!("{failed} of {} runs failed numerically", m.runs));
    }
    Ok(report)
}
