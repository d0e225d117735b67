//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
//! Each criterion also has a wall-clock budget.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use dislab::confinement::{epsilon_convergence_study, gamma_limit_f, minimize_f, regularized_e_eps, SearchOptions};
use dislab::dynamics::{fit_boundary_coefficient, integrate, IntegrateOptions};
use dislab::energy::{finite_difference_gradient, peach_koehler};
use dislab::greens::{h_omega, k_numeric};
use dislab::{BoundaryDatum, Curve, DatumSpec, DislocationSystem, Domain, Vec2};
use dislab_cli::{run_config, Experiment, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn disk_point(rng: &mut ChaCha8Rng, max_r: f64) -> Vec2 {
    // Uniform in the disk of radius max_r.
    Vec2::from_polar(max_r * rng.random_range(0.0f64..1.0).sqrt(), rng.random_range(0.0..2.0 * PI))
}

fn kernel_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (x, y) = (disk_point(&mut rng, 0.95), disk_point(&mut rng, 0.95));
        let q = 1.0 - 2.0 * x.dot(y) + x.norm_sq() * y.norm_sq();
        let exact = q.ln() / (4.0 * PI);
        let k = k_numeric(&Domain::UnitDisk, x, y).map_err(|e| e.to_string())?;
        worst = worst.max((k.value - exact).abs());
    }
    ensure(worst <= 1e-6, format!("max |k_numeric - images| = {worst:.2e} over 200 pairs"))
}

/// Fourth-order five-point Laplacian.
fn laplacian(f: impl Fn(Vec2) -> f64, x: Vec2, h: f64) -> f64 {
    let mut acc = -60.0 * f(x);
    for e in [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)] {
        acc += 16.0 * (f(x + e * h) + f(x - e * h)) - (f(x + e * 2.0 * h) + f(x - e * 2.0 * h));
    }
    acc / (12.0 * h * h)
}

fn liouville() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for domain in [Domain::UnitDisk, Domain::HalfPlane] {
        for _ in 0..100 {
            let x = match domain {
                Domain::UnitDisk => disk_point(&mut rng, 0.95),
                _ => Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(0.05..3.0)),
            };
            let d = domain.boundary_distance(x).map_err(|e| e.to_string())?;
            let h = |p: Vec2| h_omega(&domain, p).map(|k| k.value).unwrap_or(f64::NAN);
            let rhs = 2.0 / PI * (-4.0 * PI * h(x)).exp();
            let res = (-laplacian(h, x, 1e-2 * d) - rhs).abs() / rhs;
            worst = worst.max(if res.is_nan() { f64::INFINITY } else { res });
        }
    }
    ensure(worst <= 1e-6, format!("max relative residual {worst:.2e} (disk and half-plane, 100 points each)"))
}

fn random_system(domain: &Domain, rng: &mut ChaCha8Rng, window: f64) -> DislocationSystem {
    let n = rng.random_range(1..=3);
    loop {
        let z: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.random_range(-window..window), rng.random_range(-window..window)))
            .map(|p| if matches!(domain, Domain::HalfPlane) { Vec2::new(p.x, p.y.abs()) } else { p })
            .collect();
        let interior = z.iter().all(|p| {
            domain.contains(*p) && (!domain.has_boundary() || domain.boundary_distance(*p).unwrap() > 0.05)
        });
        let separated = (0..n).all(|i| (i + 1..n).all(|j| (z[i] - z[j]).norm() > 0.05));
        if interior && separated {
            let b = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
            return DislocationSystem::new(z, b);
        }
    }
}

fn gradients() -> Check {
    let ellipse = Domain::parametric(Curve::Ellipse { a: 2.0, b: 1.0 }).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, domain, window) in
        [("disk", Domain::UnitDisk, 1.0), ("half-plane", Domain::HalfPlane, 2.0), ("plane", Domain::FullPlane, 2.0), ("ellipse", ellipse, 2.0)]
    {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let sys = random_system(&domain, &mut rng, window);
            let f = peach_koehler(&domain, &sys, None).map_err(|e| e.to_string())?.f;
            let fd = finite_difference_gradient(&domain, &sys, 1e-5).map_err(|e| e.to_string())?;
            let num: f64 = f.iter().zip(&fd).map(|(a, b)| (*a - *b).norm_sq()).sum::<f64>().sqrt();
            let den: f64 = f.iter().map(|a| a.norm_sq()).sum::<f64>().sqrt();
            worst = worst.max(num / den.max(1e-12));
        }
        ok &= worst <= 1e-6;
        parts.push(format!("{name} {worst:.1e}"));
    }
    ensure(ok, format!("max relative force error: {}", parts.join(", ")))
}

fn near_boundary_forces() -> Check {
    let mut half = 0.0f64;
    for d in [0.3, 0.1, 0.01] {
        let r = peach_koehler(&Domain::HalfPlane, &DislocationSystem::single(Vec2::new(0.2, d), 1), Some(0))
            .map_err(|e| e.to_string())?;
        half = half.max(r.residual.map_or(f64::INFINITY, |v| v.norm()));
    }
    let others = [Vec2::new(-0.3, 0.2), Vec2::new(0.1, -0.4)];
    let (mut residuals, mut leading) = (Vec::new(), Vec::new());
    for delta in [0.1, 0.05, 0.025, 0.0125] {
        let sys = DislocationSystem::new(vec![Vec2::new(1.0 - delta, 0.0), others[0], others[1]], vec![1, -1, 1]);
        let r = peach_koehler(&Domain::UnitDisk, &sys, Some(0)).map_err(|e| e.to_string())?;
        residuals.push(r.residual.map_or(f64::INFINITY, |v| v.norm()));
        leading.push(r.leading_term.map_or(f64::NAN, |v| v.norm()));
    }
    let (lo, hi) = residuals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    let doubling = leading.windows(2).all(|w| (w[1] / w[0] - 2.0).abs() < 1e-9);
    ensure(
        half <= 1e-8 && hi <= 2.0 * lo && doubling,
        format!("half-plane residual {half:.1e}; disk residual range [{lo:.3}, {hi:.3}], leading term doubles: {doubling}"),
    )
}

fn first_time(domain: &Domain, sys: &DislocationSystem) -> Result<f64, String> {
    let t = integrate(domain, sys, 100.0, &IntegrateOptions::default()).map_err(|e| e.to_string())?;
    t.first_event().map(|e| e.time).ok_or_else(|| "no event".to_string())
}

fn closed_forms() -> Check {
    let disk_exact = 2.0 * PI * (0.32 - 0.8f64.ln() - 0.5);
    let disk = first_time(&Domain::UnitDisk, &DislocationSystem::single(Vec2::new(0.8, 0.0), 1))?;
    let half = first_time(&Domain::HalfPlane, &DislocationSystem::single(Vec2::new(0.0, 0.5), 1))?;
    let dip = first_time(&Domain::FullPlane, &DislocationSystem::dipole(Vec2::new(0.05, 0.0), Vec2::new(-0.05, 0.0)))?;
    let (e1, e2, e3) = ((disk / disk_exact - 1.0).abs(), (half / (PI / 2.0) - 1.0).abs(), (dip / (PI * 0.01 / 2.0) - 1.0).abs());
    ensure(
        e1 <= 1e-4 && e2 <= 1e-5 && e3 <= 1e-5,
        format!("disk T={disk:.6} (rel {e1:.1e}), half-plane T={half:.6} (rel {e2:.1e}), dipole T={dip:.7} (rel {e3:.1e})"),
    )
}

fn run_experiment(experiment: Experiment, config: &str, out: &Path) -> Result<Value, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(config);
    let cfg = ExperimentConfig::load(&path).map_err(|e| e.to_string())?;
    let outcome = run_config(experiment, &cfg, out).map_err(|e| e.to_string())?;
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(outcome.summary),
    }
}

fn boundary_scaling(mc: &Result<Value, String>) -> Check {
    let samples: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&d| first_time(&Domain::UnitDisk, &DislocationSystem::single(Vec2::new(1.0 - d, 0.0), 1)).map(|t| (d, t)))
        .collect::<Result<_, _>>()?;
    let (_, ratios) = fit_boundary_coefficient(&samples).map_err(|e| e.to_string())?;
    let rel = (ratios[2] / (2.0 * PI) - 1.0).abs();
    let bound = mc.as_ref().map_err(Clone::clone)?["leading_order_bound"].as_f64().unwrap_or(f64::NAN);
    ensure(
        rel <= 0.05 && (bound - 0.2513).abs() < 5e-5,
        format!("T/delta^2 = {:.4} at delta=0.025 (2 pi within {:.2}%); ensemble bound 2 pi delta0^2 = {bound:.4}", ratios[2], 100.0 * rel),
    )
}

fn montecarlo(mc: &Result<Value, String>, out: &Path) -> Check {
    let s = mc.as_ref().map_err(Clone::clone)?;
    let (runs, hits, dips) = (s["runs"].as_u64(), s["boundary_hits"].as_u64(), s["dipole_collisions"].as_u64());
    let files = ["histogram.csv", "histogram.svg", "superposition.svg", "runs.csv"].iter().all(|f| out.join(f).exists());
    ensure(
        runs == Some(5000) && hits.zip(dips).map(|(a, b)| a + b) == Some(5000) && files,
        format!(
            "5000 runs, all ended in an event: boundary {} ({}), dipole {} ({}); plots written: {files}",
            hits.unwrap_or(0),
            s["fraction_boundary"],
            dips.unwrap_or(0),
            s["fraction_dipole"]
        ),
    )
}

fn cardioid(out: &Path) -> Check {
    let s = run_experiment(Experiment::Cardioid, "cardioid.toml", out)?;
    let frac = s["fraction_within_threshold"].as_f64().unwrap_or(0.0);
    ensure(
        s["starts"] == 80 && frac >= 0.95,
        format!("{:.1}% of 80 runs within 5 deg (max angle {:.2e} deg)", 100.0 * frac, s["max_angle"].as_f64().unwrap_or(f64::NAN)),
    )
}

fn uniform() -> Result<BoundaryDatum, String> {
    BoundaryDatum::new(&Domain::UnitDisk, DatumSpec::Uniform).map_err(|e| e.to_string())
}

fn confinement_anchor() -> Check {
    let d = uniform()?;
    let mut worst = 0.0f64;
    for eps in [0.1, 0.05, 0.025, 0.0125] {
        let r = regularized_e_eps(&Domain::UnitDisk, &d, Vec2::ZERO, eps).map_err(|e| e.to_string())?;
        worst = worst.max(r.f_eps.unwrap_or(f64::NAN).abs());
    }
    let f0 = gamma_limit_f(&Domain::UnitDisk, &d, Vec2::ZERO).map_err(|e| e.to_string())?.f_limit.unwrap_or(f64::NAN);
    let m = minimize_f(&Domain::UnitDisk, &d, &SearchOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        worst <= 1e-6 && f0.abs() <= 1e-6 && m.a.norm() <= 1e-3 && m.certificate.interiority >= 0.5,
        format!(
            "max |F_eps(0)| = {worst:.1e}, F(0) = {f0:.1e}, minimizer at distance {:.1e} from the center, interiority {:.3}",
            m.a.norm(),
            m.certificate.interiority
        ),
    )
}

fn confinement_convergence() -> Check {
    let d = uniform()?;
    let probes = [Vec2::new(0.2, 0.0), Vec2::new(0.4, 0.0), Vec2::new(0.6, 0.0)];
    let rows = epsilon_convergence_study(&Domain::UnitDisk, &d, &probes, &[0.1, 0.05, 0.025, 0.0125])
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for ch in rows.chunks(4) {
        ok &= ch.windows(2).all(|w| w[1].difference < w[0].difference);
        parts.push(format!("a={}: {:.1e} -> {:.1e}", ch[0].a.x, ch[0].difference, ch[3].difference));
    }
    ensure(ok, format!("|F_eps - F| decreasing ({})", parts.join("; ")))
}

fn blow_up() -> Check {
    let d = uniform()?;
    let f = |r: f64| {
        gamma_limit_f(&Domain::UnitDisk, &d, Vec2::new(r, 0.0)).map(|c| c.f_limit.unwrap_or(f64::NAN)).map_err(|e| e.to_string())
    };
    let sweep = [0.5, 0.8, 0.9, 0.95].iter().map(|r| f(*r)).collect::<Result<Vec<_>, _>>()?;
    let f0 = f(0.0)?;
    ensure(
        sweep.windows(2).all(|w| w[1] > w[0]) && sweep[3] >= f0 + 3.0,
        format!("F along r = 0.5, 0.8, 0.9, 0.95: {:.3?}; F(0) = {f0:.1e}", sweep),
    )
}

fn report(id: u32, name: &str, budget: Duration, check: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let (ok, detail) = match result {
        Ok(d) => (in_time, d),
        Err(d) => (false, d),
    };
    let time_note = if in_time { String::new() } else { format!(" [over budget {}s]", budget.as_secs()) };
    println!(
        "AC{id:<2} {} {name}: {detail} ({:.1}s){time_note}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let mc_out = tmp.path().join("montecarlo");
    let s = Duration::from_secs;
    let mut all = true;
    all &= report(1, "kernel oracle", s(30), kernel_oracle);
    all &= report(2, "Liouville residual", s(10), liouville);
    all &= report(3, "gradient suite", s(120), gradients);
    all &= report(4, "near-boundary force", s(60), near_boundary_forces);
    all &= report(5, "collision-time closed forms", s(30), closed_forms);
    // The ensemble summary feeds two criteria; its runtime is charged to the second.
    let mc_start = Instant::now();
    let mc = run_experiment(Experiment::Montecarlo, "montecarlo.toml", &mc_out);
    let mc_time = mc_start.elapsed();
    all &= report(6, "boundary-time scaling", s(60), || boundary_scaling(&mc));
    all &= report(7, "Monte Carlo ensemble", s(600).saturating_sub(mc_time), || {
        montecarlo(&mc, &mc_out).map(|d| format!("{d}; ensemble took {:.1}s", mc_time.as_secs_f64()))
    });
    all &= report(8, "cardioid incidence", s(120), || cardioid(&tmp.path().join("cardioid")));
    all &= report(9, "confinement anchor", s(120), confinement_anchor);
    all &= report(10, "core-radius convergence", s(300), confinement_convergence);
    all &= report(11, "boundary blow-up", s(120), blow_up);
    println!("acceptance: {}", if all { "all criteria pass" } else { "some criteria FAIL" });
    if !all {
        std::process::exit(1);
    }
}
