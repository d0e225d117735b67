use dislab::greens::{green, h_omega, k_omega};
use dislab::{Domain, KernelSource, Vec2};

use super::{invalid_input, Report};
use crate::output::{num, OutputDir};
use crate::{CliError, ExperimentConfig};

const HEADER: [&str; 14] =
    ["x1", "x2", "y1", "y2", "k", "dk_dx1", "dk_dx2", "h", "dh_dx1", "dh_dx2", "G", "dG_dx1", "dG_dx2", "source"];

fn source_name(s: KernelSource) -> &'static str {
    match s {
        KernelSource::AnalyticImage => "analytic-image",
        KernelSource::NumericSolve => "numeric-solve",
    }
}

fn input_error(e: dislab::Error) -> CliError {
    match e {
        dislab::Error::OutsideDomain(_) | dislab::Error::CoincidentPoints | dislab::Error::NoBoundary => {
            invalid_input(e)
        }
        e => e.into(),
    }
}

pub(crate) fn run_greens_probe(cfg: &ExperimentConfig, domain: &Domain, out: &mut OutputDir) -> Result<Report, CliError> {
    let p = cfg.probe.as_ref().expect("validated");
    if !p.delimiter.is_ascii() {
        return Err(CliError::config("probe: delimiter must be a single ASCII character"));
    }
    let mut rows = Vec::with_capacity(p.pairs.len());
    for q in &p.pairs {
        let (x, y) = (Vec2::new(q[0], q[1]), Vec2::new(q[2], q[3]));
        let k = k_omega(domain, x, y).map_err(input_error)?;
        let h = h_omega(domain, x).map_err(input_error)?;
        // G is singular on the diagonal.
        let g = if x == y { None } else { Some(green(domain, x, y).map_err(input_error)?) };
        let g_cols = match g {
            Some(g) => [num(g.value), num(g.gradient_x.x), num(g.gradient_x.y)],
            None => [String::new(), String::new(), String::new()],
        };
        rows.push(vec![
            num(x.x),
            num(x.y),
            num(y.x),
            num(y.y),
            num(k.value),
            num(k.gradient_x.x),
            num(k.gradient_x.y),
            num(h.value),
            num(h.gradient_x.x),
            num(h.gradient_x.y),
            g_cols[0].clone(),
            g_cols[1].clone(),
            g_cols[2].clone(),
            source_name(k.source).into(),
        ]);
    }
    let d = p.delimiter.to_string();
    let mut text = HEADER.join(&d);
    text.push('\n');
    for r in &rows {
        text.push_str(&r.join(&d));
        text.push('\n');
    }
    out.write_table("probe.csv", p.delimiter as u8, &HEADER, rows)?;
    let mut report = Report::new(&serde_json::json!({ "domain": domain.name(), "pairs": p.pairs.len() }))?;
    report.stdout = Some(text);
    Ok(report)
}
