//! Gradient flow `dz_i/dt = f_i(z)` with boundary-hit and dipole-collision
//! events, and the collision-time bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::{self, DislocationSystem};
use crate::geometry::{self, Domain, RegimeParams};
use crate::greens;
use crate::{Error, Result, Vec2};

/// Hit threshold used when the scale it is relative to is infinite.
const ABSOLUTE_HIT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionPolicy {
    #[default]
    Stop,
    /// Remove a colliding dipole and keep integrating.
    Annihilate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Width of the bracket in which an event time is certified.
    pub event_time_tolerance: f64,
    /// Boundary-hit distance; `None` means `1e-4 * rho_bar`.
    pub boundary_hit: Option<f64>,
    /// Pair-collision distance; `None` means `1e-4 * diam`.
    pub pair_hit: Option<f64>,
    /// Add the closed-form remaining time after a threshold crossing.
    pub extrapolate: bool,
    /// Steps are capped at this fraction of the local collision time scale.
    pub step_fraction: f64,
    pub on_collision: CollisionPolicy,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            min_step: 1e-18,
            max_step: f64::INFINITY,
            max_steps: 200_000,
            event_time_tolerance: 1e-8,
            boundary_hit: None,
            pair_hit: None,
            extrapolate: true,
            step_fraction: 0.25,
            on_collision: CollisionPolicy::Stop,
        }
    }
}

impl IntegrateOptions {
    pub fn boundary_threshold(&self, domain: &Domain) -> f64 {
        self.boundary_hit.unwrap_or_else(|| {
            let r = domain.rho_bar();
            if r.is_finite() {
                1e-4 * r
            } else {
                ABSOLUTE_HIT
            }
        })
    }

    pub fn pair_threshold(&self, domain: &Domain) -> f64 {
        self.pair_hit.unwrap_or_else(|| {
            let d = domain.diameter();
            if d.is_finite() {
                1e-4 * d
            } else {
                ABSOLUTE_HIT
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind {
    /// `incidence_angle` is the angle in degrees between the velocity and the outward
    /// normal at the threshold crossing.
    BoundaryHit { index: usize, point: Vec2, normal: Vec2, incidence_angle: f64 },
    DipoleCollision { i: usize, j: usize, location: Vec2 },
    Annihilation { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    /// Threshold crossing time plus the extrapolated remainder.
    pub time: f64,
    pub crossing_time: f64,
    pub remainder: f64,
}

/// Recorded states. Indices in `labels` and in events refer to the initial system.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DislocationSystem>,
    pub labels: Vec<Vec<usize>>,
    /// Velocities (= forces) at each recorded state.
    pub velocities: Vec<Vec<Vec2>>,
    pub events: Vec<Event>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    /// Appends a state; a state at the same time replaces the previous one.
    fn record(&mut self, t: f64, z: &[Vec2], b: &[i32], labels: &[usize], v: &[Vec2]) {
        if self.times.last().is_some_and(|last| *last >= t) {
            self.times.pop();
            self.states.pop();
            self.labels.pop();
            self.velocities.pop();
        }
        self.times.push(t);
        self.states.push(DislocationSystem::new(z.to_vec(), b.to_vec()));
        self.labels.push(labels.to_vec());
        self.velocities.push(v.to_vec());
    }

    pub fn first_event(&self) -> Option<&Event> {
        self.events.first()
    }

    /// Positions of dislocation `label` over time.
    pub fn path(&self, label: usize) -> Vec<(f64, Vec2)> {
        self.states
            .iter()
            .zip(&self.labels)
            .zip(&self.times)
            .filter_map(|((s, l), t)| l.iter().position(|x| *x == label).map(|k| (*t, s.z[k])))
            .collect()
    }
}

fn forces(domain: &Domain, z: &[Vec2], b: &[i32]) -> Result<Vec<Vec2>> {
    let sys = DislocationSystem::new(z.to_vec(), b.to_vec());
    Ok(energy::peach_koehler(domain, &sys, None)?.f)
}

// Dormand-Prince 5(4).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct StepResult {
    z: Vec<Vec2>,
    k_end: Vec<Vec2>,
    error: f64,
}

enum StepFailure {
    /// A stage left the domain or merged two dislocations.
    Invalid,
    Hard(Error),
}

fn dp_step(domain: &Domain, z: &[Vec2], b: &[i32], k1: &[Vec2], h: f64, opts: &IntegrateOptions) -> std::result::Result<StepResult, StepFailure> {
    let n = z.len();
    let mut k: Vec<Vec<Vec2>> = Vec::with_capacity(7);
    k.push(k1.to_vec());
    let mut y = vec![Vec2::ZERO; n];
    for s in 1..7 {
        for i in 0..n {
            let mut acc = z[i];
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    acc += kj[i] * (h * A[s][j]);
                }
            }
            y[i] = acc;
        }
        match forces(domain, &y, b) {
            Ok(f) => k.push(f),
            Err(Error::OutsideDomain(_)) | Err(Error::CoincidentDislocations(..)) => {
                return Err(StepFailure::Invalid)
            }
            Err(e) => return Err(StepFailure::Hard(e)),
        }
    }
    // Stage 7 is evaluated at the 5th-order solution.
    let mut err = 0.0f64;
    for i in 0..n {
        let mut e = Vec2::ZERO;
        for (j, kj) in k.iter().enumerate() {
            e += kj[i] * (h * E[j]);
        }
        let scale = opts.atol + opts.rtol * z[i].max_abs().max(y[i].max_abs());
        err = err.max(e.max_abs() / scale);
    }
    Ok(StepResult { z: y, k_end: k.pop().expect("seven stages"), error: err })
}

/// Collision time scale of the current configuration.
fn time_scale(domain: &Domain, z: &[Vec2]) -> Result<f64> {
    let mut s = f64::INFINITY;
    if domain.has_boundary() {
        for p in z {
            let d = domain.boundary_distance(*p)?;
            s = s.min(2.0 * PI * d * d);
        }
    }
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            let r = (z[i] - z[j]).norm();
            s = s.min(0.5 * PI * r * r);
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy)]
enum Crossing {
    Boundary(usize),
    Pair(usize, usize),
}

/// Smallest event function value and which event it belongs to; invalid
/// states count as already crossed.
fn event_value(domain: &Domain, z: &[Vec2], b: &[i32], eb: f64, ep: f64) -> (f64, Option<Crossing>) {
    let mut best = (f64::INFINITY, None);
    if domain.has_boundary() {
        for (i, p) in z.iter().enumerate() {
            let g = domain.signed_distance(*p) - eb;
            if !(g >= best.0) {
                best = (g, Some(Crossing::Boundary(i)));
            }
        }
    }
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            if b[i] * b[j] < 0 {
                let g = (z[i] - z[j]).norm() - ep;
                if g < best.0 {
                    best = (g, Some(Crossing::Pair(i, j)));
                }
            }
        }
    }
    best
}

fn angle_deg(v: Vec2, nu: Vec2) -> f64 {
    let c = (v.dot(nu) / v.norm()).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

/// Integrate the gradient flow from `initial` up to `t_max` or a terminal event.
pub fn integrate(domain: &Domain, initial: &DislocationSystem, t_max: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    initial.validate(domain).map_err(|e| Error::InvalidInitial(e.to_string()))?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidInitial(format!("t_max = {t_max}")));
    }
    let eb = opts.boundary_threshold(domain);
    let ep = opts.pair_threshold(domain);
    let mut z = initial.z.clone();
    let mut b = initial.b.clone();
    let mut labels: Vec<usize> = (0..z.len()).collect();
    let mut traj = Trajectory::default();
    let mut t = 0.0;
    let mut k1 = forces(domain, &z, &b)?;
    traj.record(t, &z, &b, &labels, &k1);

    let mut h = (opts.step_fraction * time_scale(domain, &z)?).min(t_max).min(opts.max_step) * 0.1;
    let mut prev_err: f64 = 1e-4;
    loop {
        // An event may already be due at the current state.
        if let (g, Some(c)) = event_value(domain, &z, &b, eb, ep) {
            if g <= 0.0 {
                let stop = handle_event(domain, c, t, &mut z, &mut b, &mut labels, &k1, &mut traj, opts)?;
                if stop {
                    break;
                }
                t = traj.events.last().map_or(t, |e| e.time);
                k1 = forces(domain, &z, &b)?;
                traj.record(t, &z, &b, &labels, &k1);
                continue;
            }
        }
        if t >= t_max {
            break;
        }
        if traj.accepted_steps + traj.rejected_steps >= opts.max_steps {
            return Err(Error::StiffnessBudgetExceeded { t, min_step: h });
        }
        let cap = opts.step_fraction * time_scale(domain, &z)?;
        h = h.min(cap).min(opts.max_step).min(t_max - t);
        if h < opts.min_step {
            return Err(Error::StiffnessBudgetExceeded { t, min_step: opts.min_step });
        }
        let step = match dp_step(domain, &z, &b, &k1, h, opts) {
            Ok(s) => s,
            Err(StepFailure::Invalid) => {
                traj.rejected_steps += 1;
                h *= 0.25;
                continue;
            }
            Err(StepFailure::Hard(e)) => return Err(e),
        };
        if !(step.error <= 1.0) {
            traj.rejected_steps += 1;
            let factor = if step.error.is_finite() { (0.9 * step.error.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= factor;
            continue;
        }
        // Accepted: look for a threshold crossing inside the step.
        let (g_new, crossing) = event_value(domain, &step.z, &b, eb, ep);
        if g_new <= 0.0 {
            let (theta, zs, ks) = locate(domain, &z, &b, &k1, h, eb, ep, opts)?;
            let te = t + theta * h;
            traj.accepted_steps += 1;
            t = te;
            z = zs;
            k1 = ks;
            traj.record(t, &z, &b, &labels, &k1);
            let c = match event_value(domain, &z, &b, eb, ep) {
                (_, Some(c)) => c,
                _ => crossing.expect("crossing reported"),
            };
            let stop = handle_event(domain, c, t, &mut z, &mut b, &mut labels, &k1, &mut traj, opts)?;
            if stop {
                break;
            }
            t = traj.events.last().map_or(t, |e| e.time);
            k1 = forces(domain, &z, &b)?;
            traj.record(t, &z, &b, &labels, &k1);
            continue;
        }
        traj.accepted_steps += 1;
        t += h;
        z = step.z;
        k1 = step.k_end;
        traj.record(t, &z, &b, &labels, &k1);
        // PI step-size control.
        let err = step.error.max(1e-10);
        let factor = (0.9 * err.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0);
        prev_err = err;
        h *= factor;
    }
    Ok(traj)
}

/// Bisect the step fraction at which the smallest event function reaches
/// zero; returns the last fraction before the crossing and its state.
#[allow(clippy::too_many_arguments)]
fn locate(
    domain: &Domain,
    z: &[Vec2],
    b: &[i32],
    k1: &[Vec2],
    h: f64,
    eb: f64,
    ep: f64,
    opts: &IntegrateOptions,
) -> Result<(f64, Vec<Vec2>, Vec<Vec2>)> {
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut lo_state = (z.to_vec(), k1.to_vec());
    while (hi - lo) * h > opts.event_time_tolerance && hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        match dp_step(domain, z, b, k1, mid * h, opts) {
            Ok(s) if event_value(domain, &s.z, b, eb, ep).0 > 0.0 => {
                lo = mid;
                lo_state = (s.z, s.k_end);
            }
            Ok(_) | Err(StepFailure::Invalid) => hi = mid,
            Err(StepFailure::Hard(e)) => return Err(e),
        }
    }
    Ok((lo, lo_state.0, lo_state.1))
}

/// Records the event for crossing `c` at time `t`; returns whether integration stops.
#[allow(clippy::too_many_arguments)]
fn handle_event(
    domain: &Domain,
    c: Crossing,
    t: f64,
    z: &mut Vec<Vec2>,
    b: &mut Vec<i32>,
    labels: &mut Vec<usize>,
    v: &[Vec2],
    traj: &mut Trajectory,
    opts: &IntegrateOptions,
) -> Result<bool> {
    match c {
        Crossing::Boundary(i) => {
            let cp = domain.closest_boundary_point(z[i])?;
            let d = cp.distance;
            let remainder = if opts.extrapolate { 2.0 * PI * d * d } else { 0.0 };
            traj.events.push(Event {
                kind: EventKind::BoundaryHit {
                    index: labels[i],
                    point: cp.point.s,
                    normal: cp.point.nu,
                    incidence_angle: angle_deg(v[i], cp.point.nu),
                },
                time: t + remainder,
                crossing_time: t,
                remainder,
            });
            Ok(true)
        }
        Crossing::Pair(i, j) => {
            let s = (z[i] - z[j]).norm();
            let remainder = if opts.extrapolate { 0.5 * PI * s * s } else { 0.0 };
            let time = t + remainder;
            traj.events.push(Event {
                kind: EventKind::DipoleCollision { i: labels[i], j: labels[j], location: (z[i] + z[j]) * 0.5 },
                time,
                crossing_time: t,
                remainder,
            });
            if opts.on_collision == CollisionPolicy::Stop {
                return Ok(true);
            }
            traj.events.push(Event {
                kind: EventKind::Annihilation { i: labels[i], j: labels[j] },
                time,
                crossing_time: t,
                remainder,
            });
            for k in [j, i] {
                z.remove(k);
                b.remove(k);
                labels.remove(k);
            }
            Ok(z.is_empty())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `T <= 2 pi delta^2 + O(delta^3)` for a dislocation starting near the boundary.
    BoundaryCollision,
    /// The dipole bound in terms of `zeta`, `eta` and `delta`.
    DipoleCollision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPrediction {
    pub kind: BoundKind,
    pub params: RegimeParams,
    pub predicted_upper: f64,
    /// Time of the relevant first event, `inf` if it did not occur.
    pub measured: f64,
    pub satisfied_leading_order: bool,
    /// Cubic correction coefficient used for the leading-order check.
    pub c_fit: Option<f64>,
    pub first_event: Option<Event>,
}

/// Integration horizon for bound checks.
fn horizon(bound: f64) -> f64 {
    20.0 * bound + 1.0
}

/// Collision time of the first dislocation with the boundary, compared with `2 pi delta0^2`.
pub fn predict_boundary_collision(
    domain: &Domain,
    initial: &DislocationSystem,
    delta0: f64,
    gamma0: f64,
    c_fit: Option<f64>,
    opts: &IntegrateOptions,
) -> Result<BoundPrediction> {
    let m = geometry::in_region_d(domain, &initial.z, delta0, gamma0)?;
    if !m.inside {
        return Err(Error::NotInRegime(format!("initial state not in D(delta={delta0}, gamma={gamma0})")));
    }
    let predicted_upper = 2.0 * PI * delta0 * delta0;
    let traj = integrate(domain, initial, horizon(predicted_upper), opts)?;
    let first = traj.first_event().cloned();
    let measured = match &first {
        Some(Event { kind: EventKind::BoundaryHit { index: 0, .. }, time, .. }) => *time,
        _ => f64::INFINITY,
    };
    let slack = c_fit.unwrap_or(0.0).max(0.0) * delta0.powi(3);
    Ok(BoundPrediction {
        kind: BoundKind::BoundaryCollision,
        params: RegimeParams { sigma: f64::NAN, delta: delta0, gamma: gamma0, zeta: f64::NAN, eta: f64::NAN },
        predicted_upper,
        measured,
        satisfied_leading_order: measured <= predicted_upper + slack,
        c_fit,
        first_event: first,
    })
}

/// Least-squares `C` in `T(delta) = 2 pi delta^2 + C delta^3`, and the ratios `T / delta^2`.
pub fn fit_boundary_coefficient(samples: &[(f64, f64)]) -> Result<(f64, Vec<f64>)> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(d, t) in samples {
        num += (t - 2.0 * PI * d * d) * d.powi(3);
        den += d.powi(6);
    }
    let ratios = samples.iter().map(|(d, t)| t / (d * d)).collect();
    Ok((num / den, ratios))
}

/// Upper bound on the dipole collision time: `pi zeta^2 / (2 (1 - (zeta^2 + 2(n-2) zeta delta) / eta^2))`.
pub fn dipole_bound(n: usize, zeta: f64, eta: f64, delta: f64) -> Result<f64> {
    let extra = if n > 2 { 2.0 * (n - 2) as f64 * zeta * delta } else { 0.0 };
    let denom = if eta.is_infinite() { 1.0 } else { 1.0 - (zeta * zeta + extra) / (eta * eta) };
    if !(denom > 0.0) {
        return Err(Error::NonpositiveDenominator(denom));
    }
    Ok(PI * zeta * zeta / (2.0 * denom))
}

/// Collision time of the first two dislocations, compared with [`dipole_bound`].
/// `delta0` enters only for three or more dislocations.
pub fn predict_dipole_collision(
    domain: &Domain,
    initial: &DislocationSystem,
    zeta0: f64,
    eta0: f64,
    delta0: Option<f64>,
    opts: &IntegrateOptions,
) -> Result<BoundPrediction> {
    let n = initial.len();
    if n < 2 {
        return Err(Error::EmptyConfiguration { needed: 2, got: n });
    }
    let delta = match (n, delta0) {
        (2, d) => d.unwrap_or(0.0),
        (_, Some(d)) => d,
        (_, None) => return Err(Error::InvalidArgument("delta0 is required for three or more dislocations".into())),
    };
    let predicted_upper = dipole_bound(n, zeta0, eta0, delta)?;
    let m = geometry::in_region_c(domain, &initial.z, zeta0, eta0)?;
    if !m.inside {
        return Err(Error::NotInRegime(format!("initial state not in C(zeta={zeta0}, eta={eta0})")));
    }
    let traj = integrate(domain, initial, horizon(predicted_upper), opts)?;
    let first = traj.first_event().cloned();
    let measured = match &first {
        Some(Event { kind: EventKind::DipoleCollision { i: 0, j: 1, .. }, time, .. }) => *time,
        _ => f64::INFINITY,
    };
    Ok(BoundPrediction {
        kind: BoundKind::DipoleCollision,
        params: RegimeParams { sigma: f64::NAN, delta, gamma: f64::NAN, zeta: zeta0, eta: eta0 },
        predicted_upper,
        measured,
        satisfied_leading_order: measured <= predicted_upper,
        c_fit: None,
        first_event: first,
    })
}

/// Samples used for the terminal line fit.
const INCIDENCE_SAMPLES: usize = 12;

/// Angle in degrees between the fitted terminal direction of motion and the
/// outward normal at the hit point (0 = perpendicular incidence).
pub fn incidence_angle(domain: &Domain, traj: &Trajectory, event: &Event) -> Result<f64> {
    let EventKind::BoundaryHit { index, normal, .. } = &event.kind else {
        return Err(Error::InvalidArgument("incidence angle needs a boundary hit".into()));
    };
    let zone = 0.25 * domain.rho_bar();
    let pts: Vec<Vec2> = traj
        .path(*index)
        .into_iter()
        .filter(|(t, p)| *t <= event.time && domain.boundary_distance(*p).is_ok_and(|d| d < zone))
        .map(|(_, p)| p)
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientSamples { needed: 5, got: pts.len() });
    }
    let tail = &pts[pts.len().saturating_sub(INCIDENCE_SAMPLES)..];
    let m = tail.iter().fold(Vec2::ZERO, |a, p| a + *p) / tail.len() as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in tail {
        let d = *p - m;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // Principal axis of the scatter matrix.
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut dir = Vec2::from_polar(1.0, theta);
    if dir.dot(tail[tail.len() - 1] - tail[0]) < 0.0 {
        dir = -dir;
    }
    Ok(angle_deg(dir, *normal))
}

/// Critical point of the Robin function `h` (a rest point of a single
/// dislocation), by Newton's method on `grad h` from `start`.
pub fn find_equilibrium(domain: &Domain, start: Vec2, tol: f64) -> Result<Vec2> {
    let grad = |x: Vec2| -> Result<Vec2> { Ok(greens::h_omega(domain, x)?.gradient_x) };
    let mut x = start;
    if !domain.contains(x) {
        return Err(Error::EquilibriumNotFound(format!("start {x:?} outside the domain")));
    }
    for _ in 0..60 {
        let g = grad(x)?;
        if g.norm() <= tol {
            return Ok(x);
        }
        let e = 1e-6 * domain.boundary_distance(x)?.min(1.0);
        let gx = (grad(x + Vec2::new(e, 0.0))? - grad(x - Vec2::new(e, 0.0))?) / (2.0 * e);
        let gy = (grad(x + Vec2::new(0.0, e))? - grad(x - Vec2::new(0.0, e))?) / (2.0 * e);
        let det = gx.x * gy.y - gy.x * gx.y;
        if !(det.abs() > 0.0) {
            return Err(Error::EquilibriumNotFound("singular Hessian".into()));
        }
        let mut step = Vec2::new(gy.y * g.x - gy.x * g.y, -gx.y * g.x + gx.x * g.y) / det;
        // Damped update that stays inside the domain.
        let mut moved = false;
        for _ in 0..40 {
            let cand = x - step;
            if domain.contains(cand) && grad(cand)?.norm() < g.norm() {
                x = cand;
                moved = true;
                break;
            }
            step = step * 0.5;
        }
        if !moved {
            return Err(Error::EquilibriumNotFound(format!("stalled at {x:?}, |grad h| = {:.3e}", g.norm())));
        }
    }
    Err(Error::EquilibriumNotFound(format!("no convergence from {start:?}")))
}
