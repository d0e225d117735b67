use std::f64::consts::PI;

use dislab::dynamics::{find_equilibrium, incidence_angle, integrate};
use dislab::{DislocationSystem, Domain, EventKind, Trajectory, Vec2};
use rayon::prelude::*;
use serde::Serialize;

use super::{check_domain, paths, trajectory_rows, Report, TRAJECTORY_HEADER};
use crate::config::point;
use crate::output::{num, OutputDir};
use crate::{svg, CliError, ExperimentConfig};

#[derive(Debug, Clone, Serialize)]
pub struct CardioidSummary {
    pub domain: String,
    pub equilibrium: Vec2,
    pub starts: usize,
    pub boundary_hits: usize,
    pub failed: usize,
    pub angle_threshold: f64,
    /// Fraction of all starts whose terminal angle is at most the threshold.
    pub fraction_within_threshold: f64,
    pub max_angle: Option<f64>,
    /// Runs with an angle above the threshold, or without a boundary hit.
    pub flagged: Vec<usize>,
}

struct Row {
    start: Vec2,
    traj: Option<Trajectory>,
    hit: Option<(f64, Vec2, f64, &'static str)>,
    error: Option<String>,
}

fn terminal_angle(domain: &Domain, traj: &Trajectory) -> Option<(f64, Vec2, f64, &'static str)> {
    let ev = traj.first_event()?;
    let EventKind::BoundaryHit { point, incidence_angle: at_crossing, .. } = &ev.kind else { return None };
    // The fitted path direction is preferred; too few near-boundary samples
    // fall back to the velocity at the crossing.
    match incidence_angle(domain, traj, ev) {
        Ok(a) => Some((ev.time, *point, a, "path-fit")),
        Err(_) => Some((ev.time, *point, *at_crossing, "velocity")),
    }
}

pub(crate) fn run_cardioid(cfg: &ExperimentConfig, domain: &Domain, out: &mut OutputDir) -> Result<Report, CliError> {
    check_domain(domain, true, "cardioid")?;
    let c = cfg.cardioid.clone().unwrap_or_default();
    let eq = find_equilibrium(domain, point(c.equilibrium_guess), c.equilibrium_tolerance)?;
    let rows: Vec<Row> = (0..c.starts)
        .into_par_iter()
        .map(|k| {
            let start = eq + Vec2::from_polar(c.radius, 2.0 * PI * k as f64 / c.starts as f64);
            match integrate(domain, &DislocationSystem::single(start, 1), c.t_max, &cfg.integrator) {
                Ok(t) => Row { start, hit: terminal_angle(domain, &t), traj: Some(t), error: None },
                Err(e) => Row { start, traj: None, hit: None, error: Some(e.to_string()) },
            }
        })
        .collect();

    let table = rows.iter().enumerate().map(|(k, r)| {
        let (time, p, angle, method) = match r.hit {
            Some((t, p, a, m)) => (num(t), [num(p.x), num(p.y)], num(a), m),
            None => (String::new(), [String::new(), String::new()], String::new(), ""),
        };
        let status = match (&r.error, &r.hit) {
            (Some(_), _) => "failed",
            (None, Some(_)) => "boundary-hit",
            (None, None) => "no-event",
        };
        [
            k.to_string(),
            num(r.start.x),
            num(r.start.y),
            status.into(),
            time,
            p[0].clone(),
            p[1].clone(),
            angle,
            method.into(),
            r.error.clone().unwrap_or_default(),
        ]
    });
    out.write_table(
        "angles.csv",
        b',',
        &["run_id", "x0", "y0", "status", "time", "hit_x", "hit_y", "angle_deg", "angle_method", "error"],
        table,
    )?;
    let traj_rows = rows
        .iter()
        .enumerate()
        .flat_map(|(k, r)| r.traj.as_ref().map(|t| trajectory_rows(k, t)).unwrap_or_default());
    out.write_table("trajectories.csv", b',', &TRAJECTORY_HEADER, traj_rows)?;
    let all: Vec<(Vec<Vec2>, i32)> = rows.iter().filter_map(|r| r.traj.as_ref()).flat_map(paths).collect();
    out.write("cardioid.svg", svg::trajectories(domain, &all, &[eq], "trajectories from the equilibrium").as_bytes())?;

    let angles: Vec<f64> = rows.iter().filter_map(|r| r.hit.map(|h| h.2)).collect();
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let flagged: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.hit.is_none_or(|h| h.2 > c.angle_threshold))
        .map(|(k, _)| k)
        .collect();
    let mut report = Report::new(&CardioidSummary {
        domain: domain.name(),
        equilibrium: eq,
        starts: c.starts,
        boundary_hits: angles.len(),
        failed,
        angle_threshold: c.angle_threshold,
        fraction_within_threshold: angles.iter().filter(|a| **a <= c.angle_threshold).count() as f64 / c.starts as f64,
        max_angle: angles.iter().copied().reduce(f64::max),
        flagged,
    })?;
    if failed > 0 {
        report.failure = Some(format!("{failed} of {} runs failed numerically", c.starts));
    }
    Ok(report)
}
