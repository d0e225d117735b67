use dislab::confinement::{
    epsilon_convergence_study, minimize_f, minimize_f_eps, BoundaryDatum, Certificate, ConvergenceRow, DatumSpec,
    SearchOptions,
};
use dislab::{Domain, Vec2};
use serde::Serialize;

use super::{check_domain, invalid_input, Report};
use crate::config::point;
use crate::output::{num, OutputDir};
use crate::{svg, CliError, ExperimentConfig};

#[derive(Debug, Clone, Serialize)]
pub struct MinimizerReport {
    pub epsilon: Option<f64>,
    pub a: Vec2,
    pub value: f64,
    pub certificate: Certificate,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeConvergence {
    pub a: Vec2,
    pub f_limit: f64,
    pub differences: Vec<f64>,
    /// `|F_eps - F|` strictly decreases along the core radii, or is already below 1e-12.
    pub decreasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfinementSummary {
    pub domain: String,
    pub datum: DatumSpec,
    pub circulation: f64,
    pub minimizer: MinimizerReport,
    pub epsilons: Vec<f64>,
    pub convergence: Vec<ProbeConvergence>,
    pub per_epsilon: Vec<MinimizerReport>,
}

pub(crate) fn run_confinement(cfg: &ExperimentConfig, domain: &Domain, out: &mut OutputDir) -> Result<Report, CliError> {
    check_domain(domain, true, "confinement")?;
    let c = cfg.confinement.clone().unwrap_or_default();
    let datum = BoundaryDatum::new(domain, c.datum.clone()).map_err(|e| match e {
        dislab::Error::IncompatibleDatum { .. } | dislab::Error::InvalidArgument(_) => invalid_input(e),
        e => e.into(),
    })?;
    let probes: Vec<Vec2> = c.probes.iter().map(|p| point(*p)).collect();
    for p in &probes {
        let d = domain.signed_distance(*p);
        if let Some(e) = c.epsilons.first().filter(|e| d <= **e) {
            return Err(CliError::config(format!("confinement: probe ({}, {}) is within {e} of the boundary", p.x, p.y)));
        }
    }

    let m = minimize_f(domain, &datum, &c.search)?;
    out.write_table(
        "grid.csv",
        b',',
        &["x", "y", "f"],
        m.grid.iter().map(|(p, f)| [num(p.x), num(p.y), num(*f)]),
    )?;
    let rows: Vec<ConvergenceRow> = epsilon_convergence_study(domain, &datum, &probes, &c.epsilons)?;
    out.write_table(
        "convergence.csv",
        b',',
        &["x", "y", "epsilon", "f_eps", "f_limit", "difference", "error_estimate"],
        rows.iter().map(|r| {
            [num(r.a.x), num(r.a.y), num(r.epsilon), num(r.f_eps), num(r.f_limit), num(r.difference), num(r.error_estimate)]
        }),
    )?;
    let convergence: Vec<ProbeConvergence> = rows
        .chunks(c.epsilons.len().max(1))
        .filter(|ch| !ch.is_empty())
        .map(|ch| {
            let differences: Vec<f64> = ch.iter().map(|r| r.difference).collect();
            ProbeConvergence {
                a: ch[0].a,
                f_limit: ch[0].f_limit,
                decreasing: differences.windows(2).all(|w| w[1] < w[0] || w[1] <= 1e-12),
                differences,
            }
        })
        .collect();

    let mut per_epsilon = Vec::new();
    if c.per_epsilon_minimizers {
        for &eps in &c.epsilons {
            let opts = SearchOptions { grid: c.per_epsilon_grid, min_distance: c.search.min_distance.max(2.0 * eps), ..c.search };
            let r = minimize_f_eps(domain, &datum, eps, &opts)?;
            per_epsilon.push(MinimizerReport {
                epsilon: Some(eps),
                a: r.a,
                value: r.value,
                certificate: r.certificate,
                evaluations: r.evaluations,
            });
        }
        out.write_table(
            "minimizers.csv",
            b',',
            &["epsilon", "x", "y", "value", "interiority", "certified"],
            per_epsilon.iter().map(|r| {
                [
                    num(r.epsilon.expect("set")),
                    num(r.a.x),
                    num(r.a.y),
                    num(r.value),
                    num(r.certificate.interiority),
                    r.certificate.holds.to_string(),
                ]
            }),
        )?;
    }

    let bbox = domain.bbox().expect("bounded");
    let cell = (bbox.hi.x - bbox.lo.x).max(bbox.hi.y - bbox.lo.y) / c.search.grid as f64;
    out.write("heatmap.svg", svg::heatmap(domain, &m.grid, cell, Some(m.a), "F").as_bytes())?;

    Report::new(&ConfinementSummary {
        domain: domain.name(),
        circulation: datum.total_circulation(),
        datum: c.datum,
        minimizer: MinimizerReport {
            epsilon: None,
            a: m.a,
            value: m.value,
            certificate: m.certificate,
            evaluations: m.evaluations,
        },
        epsilons: c.epsilons,
        convergence,
        per_epsilon,
    })
}
