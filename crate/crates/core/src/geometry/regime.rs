//! The distance function `d_n` and the regime sets `D_{n,delta,gamma}` and
//! `C_{n,zeta,eta}` in which the collision results hold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Domain;
use crate::{Error, Result, Vec2};

/// Cap on rejection-sampling proposals.
pub const MAX_SAMPLING_ATTEMPTS: u64 = 10_000_000;
const MIN_ACCEPTANCE_RATE: f64 = 1e-6;

/// Parameters of the regime sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub sigma: f64,
    pub delta: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub eta: f64,
}

impl RegimeParams {
    /// Constraints on `(sigma, delta, gamma)` for the boundary regime.
    pub fn d_violations(&self, domain: &Domain) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            out.push(format!("sigma = {} not in (0, 1)", self.sigma));
        }
        out.extend(delta_gamma_violations(domain, self.delta, self.gamma));
        if !(self.delta < self.sigma * domain.rho_bar()) {
            out.push(format!(
                "delta = {} not below sigma * rho_bar = {}",
                self.delta,
                self.sigma * domain.rho_bar()
            ));
        }
        out
    }

    /// Constraints on `(zeta, eta)` for the dipole regime.
    pub fn c_violations(&self, domain: &Domain) -> Vec<String> {
        zeta_eta_violations(domain, self.zeta, self.eta)
    }
}

/// A membership answer plus any violated parameter constraints; membership is
/// computed regardless.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub inside: bool,
    pub violations: Vec<String>,
}

/// Axis-aligned box used as a proposal window for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl BBox {
    pub fn new(lo: Vec2, hi: Vec2) -> Self {
        Self { lo, hi }
    }

    pub fn area(&self) -> f64 {
        (self.hi.x - self.lo.x) * (self.hi.y - self.lo.y)
    }
}

/// `d_n`: the boundary distance for one point; otherwise the smaller of the
/// minimal boundary distance and the minimal pairwise distance.
pub fn d_n(domain: &Domain, z: &[Vec2]) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptyConfiguration { needed: 1, got: 0 });
    }
    let mut d = f64::INFINITY;
    for &p in z {
        d = d.min(boundary_distance(domain, p)?);
    }
    Ok(d.min(min_pair_distance(z)))
}

fn boundary_distance(domain: &Domain, p: Vec2) -> Result<f64> {
    if domain.has_boundary() {
        domain.boundary_distance(p)
    } else if p.is_finite() {
        Ok(f64::INFINITY)
    } else {
        Err(Error::OutsideDomain(p))
    }
}

fn min_pair_distance(z: &[Vec2]) -> f64 {
    let mut d = f64::INFINITY;
    for (i, a) in z.iter().enumerate() {
        for b in &z[i + 1..] {
            d = d.min((*a - *b).norm());
        }
    }
    d
}

/// `value > bound`, where an infinite value (distance to an empty set) clears
/// an infinite bound.
fn exceeds(value: f64, bound: f64) -> bool {
    value > bound || (value.is_infinite() && bound.is_infinite())
}

fn delta_gamma_violations(domain: &Domain, delta: f64, gamma: f64) -> Vec<String> {
    let mut out = Vec::new();
    if !(delta > 0.0 && delta < gamma) {
        out.push(format!("need 0 < delta < gamma, got delta = {delta}, gamma = {gamma}"));
    }
    let lower = (2.0 * delta).max(domain.rho_bar());
    if !(gamma > lower) {
        out.push(format!("gamma = {gamma} not above max(2 delta, rho_bar) = {lower}"));
    }
    if domain.is_bounded() {
        if !(gamma < 0.5 * domain.diameter()) {
            out.push(format!(
                "gamma = {gamma} not below diam/2 = {}",
                0.5 * domain.diameter()
            ));
        }
    } else {
        log::warn!("unbounded domain: diameter constraint on gamma skipped");
    }
    out
}

fn zeta_eta_violations(domain: &Domain, zeta: f64, eta: f64) -> Vec<String> {
    let mut out = Vec::new();
    if !(zeta > 0.0 && zeta < eta) {
        out.push(format!("need 0 < zeta < eta, got zeta = {zeta}, eta = {eta}"));
    }
    if domain.is_bounded() && !(eta < 0.5 * domain.diameter()) {
        out.push(format!("eta = {eta} not below diam/2 = {}", 0.5 * domain.diameter()));
    }
    out
}

/// Membership in `D_{n,delta,gamma}`: `d_1(z_1) < delta` and `d_{n-1}(z') > gamma`.
pub fn in_region_d(domain: &Domain, z: &[Vec2], delta: f64, gamma: f64) -> Result<Membership> {
    let violations = delta_gamma_violations(domain, delta, gamma);
    Ok(Membership {
        inside: d_member(domain, z, delta, gamma)?,
        violations,
    })
}

fn d_member(domain: &Domain, z: &[Vec2], delta: f64, gamma: f64) -> Result<bool> {
    let (first, rest) = z
        .split_first()
        .ok_or(Error::EmptyConfiguration { needed: 1, got: 0 })?;
    let near = d_n(domain, std::slice::from_ref(first))? < delta;
    let far = rest.is_empty() || exceeds(d_n(domain, rest)?, gamma);
    Ok(near && far)
}

/// Membership in `C_{n,zeta,eta}`: `|z_1 - z_2| < zeta`, `d_{n-2}(z'') > eta`
/// and `dist({z_1, z_2}, {z_3..z_n} + boundary) > eta`.
pub fn in_region_c(domain: &Domain, z: &[Vec2], zeta: f64, eta: f64) -> Result<Membership> {
    let violations = zeta_eta_violations(domain, zeta, eta);
    Ok(Membership {
        inside: c_member(domain, z, zeta, eta)?,
        violations,
    })
}

fn c_member(domain: &Domain, z: &[Vec2], zeta: f64, eta: f64) -> Result<bool> {
    if z.len() < 2 {
        return Err(Error::EmptyConfiguration { needed: 2, got: z.len() });
    }
    let (pair, rest) = z.split_at(2);
    let close = (pair[0] - pair[1]).norm() < zeta;
    let rest_ok = rest.is_empty() || exceeds(d_n(domain, rest)?, eta);
    let mut sep = f64::INFINITY;
    for &p in pair {
        sep = sep.min(boundary_distance(domain, p)?);
        for &q in rest {
            sep = sep.min((p - q).norm());
        }
    }
    Ok(close && rest_ok && exceeds(sep, eta))
}

/// Which regime set to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "kebab-case")]
pub enum SamplingRegion {
    D { n: usize, delta: f64, gamma: f64 },
    C { n: usize, zeta: f64, eta: f64 },
}

impl SamplingRegion {
    fn n(&self) -> usize {
        match *self {
            SamplingRegion::D { n, .. } | SamplingRegion::C { n, .. } => n,
        }
    }

    fn contains(&self, domain: &Domain, z: &[Vec2]) -> Result<bool> {
        match *self {
            SamplingRegion::D { delta, gamma, .. } => d_member(domain, z, delta, gamma),
            SamplingRegion::C { zeta, eta, .. } => c_member(domain, z, zeta, eta),
        }
    }
}

/// Accepted configurations with the empirical acceptance rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub configurations: Vec<Vec<Vec2>>,
    pub attempts: u64,
    pub acceptance_rate: f64,
}

/// Rejection sampling of `count` configurations, uniform over the region
/// restricted to `window` (defaults to the domain's bounding box).
pub fn sample_interior(
    domain: &Domain,
    region: SamplingRegion,
    count: usize,
    seed: u64,
    window: Option<BBox>,
) -> Result<SampleSet> {
    let n = region.n();
    let min_n = if matches!(region, SamplingRegion::C { .. }) { 2 } else { 1 };
    if n < min_n {
        return Err(Error::EmptyConfiguration { needed: min_n, got: n });
    }
    let window = window.or_else(|| domain.bbox()).ok_or(Error::UnboundedRegion)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut configurations = Vec::with_capacity(count);
    let mut attempts = 0u64;
    let mut z = vec![Vec2::ZERO; n];
    while configurations.len() < count {
        if attempts >= MAX_SAMPLING_ATTEMPTS {
            return Err(Error::RegionEmptyOrThin {
                rate: configurations.len() as f64 / attempts as f64,
                attempts,
            });
        }
        attempts += 1;
        for p in z.iter_mut() {
            *p = Vec2::new(
                rng.random_range(window.lo.x..window.hi.x),
                rng.random_range(window.lo.y..window.hi.y),
            );
        }
        if z.iter().all(|p| !domain.has_boundary() || domain.contains(*p))
            && region.contains(domain, &z)?
        {
            configurations.push(z.clone());
        }
    }
    let acceptance_rate = if attempts == 0 {
        1.0
    } else {
        count as f64 / attempts as f64
    };
    if count > 0 && acceptance_rate < MIN_ACCEPTANCE_RATE {
        return Err(Error::RegionEmptyOrThin {
            rate: acceptance_rate,
            attempts,
        });
    }
    Ok(SampleSet {
        configurations,
        attempts,
        acceptance_rate,
    })
}
