//! Energy of one dislocation confined by a prescribed tangential boundary strain.
//!
//! The admissible fields are `K_a + grad w` with `K_a` the unit vortex about
//! `a`. Everything except the Dirichlet energy of `w` reduces to boundary
//! integrals:
//!
//! ```text
//! F_eps(a) = J(a)/2 + B(a) + (1/2) int_{Omega_eps(a)} |grad w|^2
//! F(a)     = J(a)/2 + B(a) + (1/2) int_{Omega}        |grad v|^2
//! J(a) = oint log rho (x - a).nu / rho^2,   B(a) = oint (g - theta_a) K_a.nu
//! ```
//!
//! `w` and `v` share the Dirichlet data `g - theta_a`; `w` has a free
//! (Neumann) hole of radius `eps` and `v` has none.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{parameter_grid, Curve, Domain};
use crate::harmonic::{self, spectral, BoundaryData, DirichletProblem, PuncturedMixedProblem};
use crate::{Error, Result, Vec2};

/// Allowed deviation of the datum circulation from `2 pi`.
pub const CIRCULATION_TOLERANCE: f64 = 1e-8;
const MIN_BOUNDARY_SAMPLES: usize = 256;
const MAX_BOUNDARY_SAMPLES: usize = 1 << 17;
const SOLVE_TOLERANCE: f64 = 1e-11;

/// Boundary strain `f`, given per unit arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatumSpec {
    /// Constant `f = 2 pi / |boundary|`.
    Uniform,
    /// `f(t) = a_0 + sum_k (a_k cos kt + b_k sin kt)` in the curve parameter;
    /// `cos[0]` is `a_0` and `sin[0]` is ignored.
    Fourier { cos: Vec<f64>, sin: Vec<f64> },
    /// `g = theta_{a*}`, the tangential trace of the vortex centred at `center`.
    ShiftedVortex { center: Vec2 },
}

#[derive(Debug)]
struct Primitive {
    /// Mean of `f |p'|`.
    mean: f64,
    /// Coefficients of the periodic part of `g`, FFT order.
    periodic: Vec<Complex64>,
    offset: f64,
}

/// A compatible boundary datum on a bounded domain.
#[derive(Debug, Clone)]
pub struct BoundaryDatum {
    spec: DatumSpec,
    curve: Curve,
    primitive: Option<Arc<Primitive>>,
    total_circulation: f64,
}

impl BoundaryDatum {
    pub fn new(domain: &Domain, spec: DatumSpec) -> Result<Self> {
        let curve = domain.boundary_curve().filter(|_| domain.is_bounded()).ok_or(Error::UnboundedDomain)?;
        let (primitive, circulation) = match &spec {
            DatumSpec::ShiftedVortex { center } => {
                let inside = domain.contains(*center);
                (None, if inside { TAU } else { 0.0 })
            }
            DatumSpec::Uniform => {
                let length = boundary_length(&curve);
                let p = primitive_of(|t| TAU / length * curve.eval(t)[1].norm());
                let c = TAU * p.mean;
                (Some(Arc::new(p)), c)
            }
            DatumSpec::Fourier { cos, sin } => {
                if cos.is_empty() {
                    return Err(Error::InvalidArgument("Fourier datum needs at least a constant term".into()));
                }
                let f = |t: f64| {
                    let mut v = cos[0];
                    for k in 1..cos.len().max(sin.len()) {
                        let kt = k as f64 * t;
                        v += cos.get(k).copied().unwrap_or(0.0) * kt.cos() + sin.get(k).copied().unwrap_or(0.0) * kt.sin();
                    }
                    v
                };
                let p = primitive_of(|t| f(t) * curve.eval(t)[1].norm());
                let c = TAU * p.mean;
                (Some(Arc::new(p)), c)
            }
        };
        if (circulation - TAU).abs() > CIRCULATION_TOLERANCE {
            return Err(Error::IncompatibleDatum { circulation });
        }
        Ok(Self { spec, curve, primitive, total_circulation: circulation })
    }

    pub fn spec(&self) -> &DatumSpec {
        &self.spec
    }

    pub fn total_circulation(&self) -> f64 {
        self.total_circulation
    }

    /// Strain per unit arclength at parameter `t`.
    pub fn f(&self, t: f64) -> f64 {
        match &self.spec {
            DatumSpec::ShiftedVortex { center } => {
                let [p, dp, _] = self.curve.eval(t);
                SingularField::new(*center).eval(p).dot(dp) / dp.norm()
            }
            _ => {
                let p = self.primitive.as_ref().expect("primitive");
                let c = spectral::eval_series(&differentiate(&p.periodic), t).re;
                (p.mean + c) / self.curve.eval(t)[1].norm()
            }
        }
    }

    /// Primitive `g` with `g(0) = 0`, continued so that `g(t + 2 pi) = g(t) + 2 pi`.
    pub fn g(&self, t: f64) -> f64 {
        match &self.spec {
            DatumSpec::ShiftedVortex { center } => {
                let steps = (t.abs() / 0.01).ceil().max(1.0) as usize;
                let ts: Vec<f64> = (0..=steps).map(|i| t * i as f64 / steps as f64).collect();
                let ps: Vec<Vec2> = ts.iter().map(|s| self.curve.point(*s)).collect();
                let th = unwrapped_angle(*center, &ps);
                th[steps] - th[0]
            }
            _ => {
                let p = self.primitive.as_ref().expect("primitive");
                p.mean * t + spectral::eval_series(&p.periodic, t).re - p.offset
            }
        }
    }

    /// `g - theta_a` along the increasing parameters `t`; single valued up to
    /// an additive constant.
    pub fn relative_datum(&self, a: Vec2, t: &[f64], p: &[Vec2]) -> Vec<f64> {
        match &self.spec {
            DatumSpec::ShiftedVortex { center } => {
                let ga = unwrapped_angle(*center, p);
                let ta = unwrapped_angle(a, p);
                ga.iter().zip(&ta).map(|(g, th)| g - th).collect()
            }
            _ => {
                let th = unwrapped_angle(a, p);
                let pr = self.primitive.as_ref().expect("primitive");
                let periodic = periodic_values(&pr.periodic, t);
                t.iter().zip(periodic).zip(&th).map(|((t, q), th)| pr.mean * t + q - th).collect()
            }
        }
    }
}

/// Values of the series at many parameters; uses one FFT for uniform grids.
fn periodic_values(coeffs: &[Complex64], t: &[f64]) -> Vec<f64> {
    let n = t.len();
    let uniform = n >= 2
        && (t[0]).abs() < 1e-14
        && t.iter().enumerate().all(|(j, tj)| (tj - TAU * j as f64 / n as f64).abs() < 1e-12);
    if uniform && n >= coeffs.len() {
        // Zero-pad to the sample grid and synthesize.
        let m = coeffs.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..m.div_ceil(2) {
            buf[j] = coeffs[j];
            if j > 0 {
                buf[n - j] = coeffs[m - j];
            }
        }
        let mut planner = rustfft::FftPlanner::new();
        planner.plan_fft_inverse(n).process(&mut buf);
        return buf.iter().map(|c| c.re).collect();
    }
    t.iter().map(|t| spectral::eval_series(coeffs, *t).re).collect()
}

fn differentiate(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    c.iter()
        .enumerate()
        .map(|(j, cj)| cj * Complex64::new(0.0, spectral::wavenumber(j, n) as f64))
        .collect()
}

fn boundary_length(curve: &Curve) -> f64 {
    let n = 4096;
    parameter_grid(n).map(|t| curve.eval(t)[1].norm()).sum::<f64>() * TAU / n as f64
}

/// Spectral primitive of a smooth periodic density `q`.
fn primitive_of(q: impl Fn(f64) -> f64) -> Primitive {
    let mut n = 256;
    let coeffs = loop {
        let v: Vec<f64> = parameter_grid(n).map(&q).collect();
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if spectral::tail_estimate(&v) <= 1e-14 * scale || n >= 1 << 16 {
            break spectral::coefficients(&v);
        }
        n *= 2;
    };
    let mean = coeffs[0].re;
    let periodic: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let k = spectral::wavenumber(j, n);
            if k == 0 || (n % 2 == 0 && k == (n / 2) as i64) {
                Complex64::new(0.0, 0.0)
            } else {
                c / Complex64::new(0.0, k as f64)
            }
        })
        .collect();
    let offset = spectral::eval_series(&periodic, 0.0).re;
    Primitive { mean, periodic, offset }
}

/// Polar angle of `p - a`, unwrapped along the sequence.
fn unwrapped_angle(a: Vec2, p: &[Vec2]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len());
    let Some(first) = p.first() else { return out };
    let mut acc = (*first - a).angle();
    out.push(acc);
    for w in p.windows(2) {
        let (u, v) = (w[0] - a, w[1] - a);
        acc += u.cross(v).atan2(u.dot(v));
        out.push(acc);
    }
    out
}

/// `K_a(x) = theta_hat_a(x) / |x - a|`, the unit-circulation vortex about `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularField {
    pub center: Vec2,
}

impl SingularField {
    pub fn new(center: Vec2) -> Self {
        Self { center }
    }

    pub fn eval(&self, x: Vec2) -> Vec2 {
        let d = x - self.center;
        d.perp() / d.norm_sq()
    }

    /// Trapezoid-rule circulation around the circle of radius `r`.
    pub fn circulation(&self, r: f64, n: usize) -> f64 {
        parameter_grid(n)
            .map(|t| {
                let e = Vec2::from_polar(1.0, t);
                self.eval(self.center + e * r).dot(e.perp()) * r
            })
            .sum::<f64>()
            * TAU
            / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfinementResult {
    pub a: Vec2,
    pub epsilon: Option<f64>,
    pub e_eps: Option<f64>,
    pub f_eps: Option<f64>,
    pub f_limit: Option<f64>,
    pub error_estimate: f64,
}

struct RelativeData {
    datum: BoundaryDatum,
    a: Vec2,
}

impl BoundaryData for RelativeData {
    fn sample(&self, t: &[f64], p: &[Vec2]) -> Vec<f64> {
        self.datum.relative_datum(self.a, t, p)
    }
}

struct BoundaryTerms {
    /// `J/2 + B`.
    value: f64,
    /// `(1/2) int |grad v|^2`, available on the disk only.
    disk_energy: Option<f64>,
    error: f64,
}

fn boundary_terms(curve: &Curve, datum: &BoundaryDatum, a: Vec2, disk: bool) -> BoundaryTerms {
    let mut n = MIN_BOUNDARY_SAMPLES;
    let mut prev: Option<(f64, f64)> = None;
    loop {
        let t: Vec<f64> = parameter_grid(n).collect();
        let frames: Vec<[Vec2; 3]> = t.iter().map(|t| curve.eval(*t)).collect();
        let p: Vec<Vec2> = frames.iter().map(|f| f[0]).collect();
        let u = datum.relative_datum(a, &t, &p);
        let h = TAU / n as f64;
        let (mut j, mut b) = (0.0, 0.0);
        for (f, u) in frames.iter().zip(&u) {
            let d = f[0] - a;
            let r2 = d.norm_sq();
            // nu |p'| = (p'_y, -p'_x) on a counterclockwise curve.
            let nu_ds = Vec2::new(f[1].y, -f[1].x);
            j += 0.5 * r2.ln() * d.dot(nu_ds) / r2;
            b -= u * d.dot(f[1]) / r2;
        }
        let value = h * (0.5 * j + b);
        let energy = disk.then(|| {
            let c = spectral::coefficients(&u);
            let m = c.len();
            (1..m)
                .filter(|k| !(m.is_multiple_of(2) && *k == m / 2))
                .map(|k| spectral::wavenumber(k, m).unsigned_abs() as f64 * c[k].norm_sqr())
                .sum::<f64>()
                * PI
        });
        let e = energy.unwrap_or(0.0);
        if let Some((pv, pe)) = prev {
            let err = (value - pv).abs() + (e - pe).abs();
            if err <= 1e-12 * (1.0 + value.abs() + e) || n >= MAX_BOUNDARY_SAMPLES {
                return BoundaryTerms { value, disk_energy: energy, error: err };
            }
        }
        prev = Some((value, e));
        n *= 2;
    }
}

fn interior(domain: &Domain, a: Vec2) -> Result<f64> {
    if !domain.is_bounded() {
        return Err(Error::UnboundedDomain);
    }
    if !domain.contains(a) {
        return Err(Error::OutsideDomain(a));
    }
    domain.boundary_distance(a)
}

fn check_datum(domain: &Domain, datum: &BoundaryDatum) -> Result<Curve> {
    if (datum.total_circulation - TAU).abs() > CIRCULATION_TOLERANCE {
        return Err(Error::IncompatibleDatum { circulation: datum.total_circulation });
    }
    let curve = domain.boundary_curve().ok_or(Error::UnboundedDomain)?;
    if curve != datum.curve {
        return Err(Error::InvalidArgument("datum was built for a different domain".into()));
    }
    Ok(curve)
}

/// The limit functional `F(a)`; `+inf` on the boundary.
pub fn gamma_limit_f(domain: &Domain, datum: &BoundaryDatum, a: Vec2) -> Result<ConfinementResult> {
    let curve = check_datum(domain, datum)?;
    let on_boundary = domain.is_bounded() && domain.signed_distance(a).abs() <= 1e-14;
    if on_boundary {
        return Ok(ConfinementResult {
            a,
            epsilon: None,
            e_eps: None,
            f_eps: None,
            f_limit: Some(f64::INFINITY),
            error_estimate: 0.0,
        });
    }
    interior(domain, a)?;
    let disk = matches!(domain, Domain::UnitDisk);
    let terms = boundary_terms(&curve, datum, a, disk);
    let (energy, solve_err) = match terms.disk_energy {
        Some(e) => (e, 0.0),
        None => {
            let problem = DirichletProblem::new(domain.clone(), RelativeData { datum: datum.clone(), a })
                .with_tolerance(SOLVE_TOLERANCE);
            let v = harmonic::solve_dirichlet(&problem)?;
            let e = 0.5 * v.dirichlet_energy();
            (e, 1e-8 * (1.0 + e.abs()))
        }
    };
    Ok(ConfinementResult {
        a,
        epsilon: None,
        e_eps: None,
        f_eps: None,
        f_limit: Some(terms.value + energy),
        error_estimate: terms.error + solve_err,
    })
}

/// `E_eps(a)` and `F_eps(a) = E_eps(a) - pi |log eps|`.
pub fn regularized_e_eps(domain: &Domain, datum: &BoundaryDatum, a: Vec2, epsilon: f64) -> Result<ConfinementResult> {
    let curve = check_datum(domain, datum)?;
    let d1 = interior(domain, a)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("core radius {epsilon}")));
    }
    if epsilon >= d1 {
        return Err(Error::CoreTouchesBoundary { epsilon, distance: d1 });
    }
    let terms = boundary_terms(&curve, datum, a, false);
    let mut problem = PuncturedMixedProblem::new(domain.clone(), a, epsilon, RelativeData { datum: datum.clone(), a });
    problem.requested_tolerance = SOLVE_TOLERANCE;
    let w = harmonic::solve_punctured_mixed(&problem)?;
    let e_eps = terms.value - PI * epsilon.ln() + 0.5 * w.dirichlet_energy();
    Ok(ConfinementResult {
        a,
        epsilon: Some(epsilon),
        e_eps: Some(e_eps),
        f_eps: Some(e_eps - PI * epsilon.ln().abs()),
        f_limit: None,
        error_estimate: terms.error + w.error_estimate(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    /// Lattice points per axis over the bounding box.
    pub grid: usize,
    /// Lattice points closer than this to the boundary are skipped.
    pub min_distance: f64,
    /// Width of the boundary band used by the interiority certificate.
    pub margin: f64,
    /// Final coordinate-descent step.
    pub tolerance: f64,
    /// Objective evaluations allowed for the descent.
    pub budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid: 64, min_distance: 0.025, margin: 0.1, tolerance: 1e-6, budget: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub margin: f64,
    /// Distance from the minimizer to the boundary.
    pub interiority: f64,
    /// Smallest lattice value within `margin` of the boundary, if any lattice point lies there.
    pub band_min: Option<f64>,
    /// `band_min` exceeds the minimum found.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimizer {
    pub a: Vec2,
    pub value: f64,
    pub certificate: Certificate,
    pub evaluations: usize,
    /// Lattice points and their values, in row-major order.
    pub grid: Vec<(Vec2, f64)>,
}

/// Lattice scan of `objective` followed by coordinate descent from the best point.
pub fn minimize_objective<F>(domain: &Domain, opts: &SearchOptions, objective: F) -> Result<Minimizer>
where
    F: Fn(Vec2) -> Result<f64> + Sync,
{
    let bbox = domain.bbox().ok_or(Error::UnboundedDomain)?;
    if opts.grid == 0 {
        return Err(Error::InvalidArgument("search grid must be non-empty".into()));
    }
    let (w, h) = (bbox.hi.x - bbox.lo.x, bbox.hi.y - bbox.lo.y);
    let n = opts.grid;
    let points: Vec<Vec2> = (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            Vec2::new(bbox.lo.x + (i as f64 + 0.5) * w / n as f64, bbox.lo.y + (j as f64 + 0.5) * h / n as f64)
        })
        .filter(|p| domain.contains(*p) && domain.boundary_distance(*p).is_ok_and(|d| d > opts.min_distance))
        .collect();
    if points.is_empty() {
        return Err(Error::InvalidArgument("no lattice point is admissible".into()));
    }
    let values: Vec<f64> = points.par_iter().map(|p| objective(*p)).collect::<Result<_>>()?;
    let grid: Vec<(Vec2, f64)> = points.into_iter().zip(values).collect();
    let best = grid.iter().min_by(|a, b| a.1.total_cmp(&b.1)).copied().expect("non-empty grid");

    let admissible = |p: Vec2| domain.contains(p) && domain.boundary_distance(p).is_ok_and(|d| d > opts.min_distance);
    let (mut a, mut value) = best;
    let mut step = w.max(h) / n as f64;
    let mut evaluations = 0;
    while step >= opts.tolerance {
        let mut improved = false;
        for dir in [Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0)] {
            let cand = a + dir * step;
            if !admissible(cand) {
                continue;
            }
            if evaluations >= opts.budget {
                return Err(Error::SearchBudgetExceeded(opts.budget));
            }
            evaluations += 1;
            let v = objective(cand)?;
            if v < value {
                a = cand;
                value = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let band_min = grid
        .iter()
        .filter(|(p, _)| domain.boundary_distance(*p).is_ok_and(|d| d < opts.margin))
        .map(|(_, v)| *v)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let certificate = Certificate {
        margin: opts.margin,
        interiority: domain.boundary_distance(a)?,
        band_min,
        holds: band_min.is_none_or(|b| b > value),
    };
    Ok(Minimizer { a, value, certificate, evaluations: evaluations + grid.len(), grid })
}

/// Minimizer of the limit functional.
pub fn minimize_f(domain: &Domain, datum: &BoundaryDatum, opts: &SearchOptions) -> Result<Minimizer> {
    check_datum(domain, datum)?;
    minimize_objective(domain, opts, |a| {
        Ok(gamma_limit_f(domain, datum, a)?.f_limit.expect("limit value"))
    })
}

/// Minimizer of `F_eps` for a fixed core radius.
pub fn minimize_f_eps(domain: &Domain, datum: &BoundaryDatum, epsilon: f64, opts: &SearchOptions) -> Result<Minimizer> {
    check_datum(domain, datum)?;
    let opts = SearchOptions { min_distance: opts.min_distance.max(2.0 * epsilon), ..*opts };
    minimize_objective(domain, &opts, |a| {
        Ok(regularized_e_eps(domain, datum, a, epsilon)?.f_eps.expect("regularized value"))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub a: Vec2,
    pub epsilon: f64,
    pub f_eps: f64,
    pub f_limit: f64,
    pub difference: f64,
    pub error_estimate: f64,
}

/// `|F_eps(a) - F(a)|` for every probe and core radius, in input order.
pub fn epsilon_convergence_study(
    domain: &Domain,
    datum: &BoundaryDatum,
    probes: &[Vec2],
    epsilons: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    check_datum(domain, datum)?;
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("epsilon sequence must be strictly decreasing".into()));
    }
    for a in probes {
        let d = interior(domain, *a)?;
        if let Some(e) = epsilons.first().filter(|e| **e >= d) {
            return Err(Error::CoreTouchesBoundary { epsilon: *e, distance: d });
        }
    }
    let limits: Vec<ConfinementResult> =
        probes.par_iter().map(|a| gamma_limit_f(domain, datum, *a)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..probes.len()).flat_map(|i| epsilons.iter().map(move |e| (i, *e))).collect();
    jobs.par_iter()
        .map(|&(i, eps)| {
            let r = regularized_e_eps(domain, datum, probes[i], eps)?;
            let f_eps = r.f_eps.expect("regularized value");
            let f_limit = limits[i].f_limit.expect("limit value");
            Ok(ConvergenceRow {
                a: probes[i],
                epsilon: eps,
                f_eps,
                f_limit,
                difference: (f_eps - f_limit).abs(),
                error_estimate: r.error_estimate + limits[i].error_estimate,
            })
        })
        .collect()
}
