use dislab::dynamics::{integrate, predict_boundary_collision, predict_dipole_collision, BoundPrediction};
use dislab::{DislocationSystem, Domain, Event, EventKind};
use serde::Serialize;

use super::{invalid_input, paths, trajectory_rows, Report, TRAJECTORY_HEADER};
use crate::config::{point, ExperimentConfig};
use crate::output::{num, OutputDir};
use crate::{svg, CliError};

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub domain: String,
    pub t_final: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub events: Vec<Event>,
    pub first_event_time: Option<f64>,
    pub bounds: Vec<BoundPrediction>,
}

pub(crate) fn event_row(run_id: usize, e: &Event) -> [String; 9] {
    let (kind, i, j, p) = match &e.kind {
        EventKind::BoundaryHit { index, point, .. } => ("boundary-hit", index.to_string(), String::new(), Some(*point)),
        EventKind::DipoleCollision { i, j, location } => ("dipole-collision", i.to_string(), j.to_string(), Some(*location)),
        EventKind::Annihilation { i, j } => ("annihilation", i.to_string(), j.to_string(), None),
    };
    let angle = match &e.kind {
        EventKind::BoundaryHit { incidence_angle, .. } => num(*incidence_angle),
        _ => String::new(),
    };
    [
        run_id.to_string(),
        kind.into(),
        num(e.time),
        num(e.crossing_time),
        i,
        j,
        p.map_or(String::new(), |p| num(p.x)),
        p.map_or(String::new(), |p| num(p.y)),
        angle,
    ]
}

pub(crate) const EVENT_HEADER: [&str; 9] = ["run_id", "kind", "time", "crossing_time", "i", "j", "x", "y", "force_normal_angle"];

pub(crate) fn run_simulate(cfg: &ExperimentConfig, domain: &Domain, out: &mut OutputDir) -> Result<Report, CliError> {
    let s = cfg.simulate.as_ref().expect("validated");
    let sys = DislocationSystem::new(s.positions.iter().map(|p| point(*p)).collect(), s.burgers.clone());
    sys.validate(domain).map_err(invalid_input)?;
    let traj = integrate(domain, &sys, s.t_max, &cfg.integrator)?;
    out.write_table("trajectory.csv", b',', &TRAJECTORY_HEADER, trajectory_rows(0, &traj))?;
    out.write_table("events.csv", b',', &EVENT_HEADER, traj.events.iter().map(|e| event_row(0, e)))?;
    if s.svg {
        let doc = svg::trajectories(domain, &paths(&traj), &[], "trajectory");
        out.write("trajectory.svg", doc.as_bytes())?;
    }
    let mut bounds = Vec::new();
    if let Some([delta, gamma]) = s.boundary_bound {
        bounds.push(predict_boundary_collision(domain, &sys, delta, gamma, None, &cfg.integrator).map_err(|e| match e {
            dislab::Error::NotInRegime(_) => invalid_input(e),
            e => e.into(),
        })?);
    }
    if let Some([zeta, eta]) = s.dipole_bound {
        bounds.push(predict_dipole_collision(domain, &sys, zeta, eta, s.dipole_delta, &cfg.integrator).map_err(|e| match e {
            dislab::Error::NotInRegime(_) | dislab::Error::NonpositiveDenominator(_) | dislab::Error::InvalidArgument(_) => {
                invalid_input(e)
            }
            e => e.into(),
        })?);
    }
    Report::new(&SimulateSummary {
        domain: domain.name(),
        t_final: traj.times.last().copied().unwrap_or(0.0),
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
        first_event_time: traj.first_event().map(|e| e.time),
        events: traj.events,
        bounds,
    })
}
