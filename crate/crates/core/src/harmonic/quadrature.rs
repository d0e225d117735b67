//! Adaptive area quadrature of `(1/2) |F|^2` over star-shaped regions.

use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use crate::geometry::{Curve, Domain};
use crate::{Error, Result, Vec2};

// 8-point Gauss-Legendre on [-1, 1].
const GL_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Region `{center + r u(phi) : inner < r < R(phi)}`.
#[derive(Debug, Clone)]
pub enum QuadratureRegion {
    Annulus { center: Vec2, inner: f64, outer: f64 },
    /// The part of a bounded domain, star-shaped about `center`, outside `B_inner(center)`.
    StarShaped { domain: Domain, center: Vec2, inner: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Patch {
    phi: (f64, f64),
    s: (f64, f64),
    coarse: f64,
    children: [f64; 4],
}

impl Patch {
    fn fine(&self) -> f64 {
        self.children.iter().sum()
    }

    fn error(&self) -> f64 {
        (self.coarse - self.fine()).abs()
    }

    fn split(&self) -> [((f64, f64), (f64, f64)); 4] {
        let pm = 0.5 * (self.phi.0 + self.phi.1);
        let sm = 0.5 * (self.s.0 + self.s.1);
        [
            ((self.phi.0, pm), (self.s.0, sm)),
            ((pm, self.phi.1), (self.s.0, sm)),
            ((self.phi.0, pm), (sm, self.s.1)),
            ((pm, self.phi.1), (sm, self.s.1)),
        ]
    }
}

struct Ranked(f64, usize);

impl PartialEq for Ranked {
    fn eq(&self, o: &Self) -> bool {
        self.0 == o.0
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Ranked {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Distance from `center` to the boundary of `domain` along `u`.
fn ray_exit(domain: &Domain, center: Vec2, u: Vec2) -> Result<f64> {
    match domain {
        Domain::UnitDisk => {
            let b = center.dot(u);
            Ok(-b + (b * b + 1.0 - center.norm_sq()).sqrt())
        }
        Domain::Parametric(p) => Ok(ray_exit_curve(&p.curve, center, u)),
        _ => Err(Error::UnboundedDomain),
    }
}

fn ray_exit_curve(curve: &Curve, center: Vec2, u: Vec2) -> f64 {
    const SAMPLES: usize = 1024;
    let f = |t: f64| (curve.point(t) - center).cross(u);
    let mut best = f64::INFINITY;
    let mut t0 = 0.0;
    let mut f0 = f(0.0);
    for j in 1..=SAMPLES {
        let t1 = TAU * j as f64 / SAMPLES as f64;
        let f1 = f(t1);
        if f0 == 0.0 || f0.signum() != f1.signum() {
            let (mut a, mut b, mut fa) = (t0, t1, f0);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fa == 0.0 || fa.signum() != fm.signum() {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            let r = (curve.point(0.5 * (a + b)) - center).dot(u);
            if r > 0.0 {
                best = best.min(r);
            }
        }
        t0 = t1;
        f0 = f1;
    }
    best
}

/// `integral (1/2)|field|^2 dA` over `region`, refined until the estimated
/// error is below `tol` or `budget` integrand evaluations are spent.
pub fn energy_quadrature<F>(field: F, region: &QuadratureRegion, tol: f64, budget: usize) -> Result<QuadratureResult>
where
    F: Fn(Vec2) -> Vec2,
{
    let (center, inner) = match region {
        QuadratureRegion::Annulus { center, inner, .. } | QuadratureRegion::StarShaped { center, inner, .. } => {
            (*center, *inner)
        }
    };
    let outer = |phi: f64| -> Result<f64> {
        match region {
            QuadratureRegion::Annulus { outer, .. } => Ok(*outer),
            QuadratureRegion::StarShaped { domain, center, .. } => {
                ray_exit(domain, *center, Vec2::from_polar(1.0, phi))
            }
        }
    };
    let evaluations = std::cell::Cell::new(0usize);
    let rule = |phi: (f64, f64), s: (f64, f64)| -> Result<f64> {
        let (pc, ph) = (0.5 * (phi.0 + phi.1), 0.5 * (phi.1 - phi.0));
        let (sc, sh) = (0.5 * (s.0 + s.1), 0.5 * (s.1 - s.0));
        let mut acc = 0.0;
        for (xi, wi) in GL_X.iter().zip(GL_W) {
            let p = pc + ph * xi;
            let big_r = outer(p)?;
            if !(big_r > inner) {
                return Err(Error::InvalidArgument(format!(
                    "inner radius {inner} reaches the outer boundary"
                )));
            }
            let u = Vec2::from_polar(1.0, p);
            for (xj, wj) in GL_X.iter().zip(GL_W) {
                let sv = sc + sh * xj;
                let r = inner + sv * (big_r - inner);
                let fv = field(center + u * r);
                acc += wi * wj * 0.5 * fv.norm_sq() * r * (big_r - inner);
            }
        }
        evaluations.set(evaluations.get() + 64);
        Ok(acc * ph * sh)
    };

    let mut cells: Vec<Patch> = Vec::new();
    let mut heap = BinaryHeap::new();
    let make = |phi, s| -> Result<Patch> {
        let mut cell = Patch { phi, s, coarse: rule(phi, s)?, children: [0.0; 4] };
        for (k, (cp, cs)) in cell.split().into_iter().enumerate() {
            cell.children[k] = rule(cp, cs)?;
        }
        Ok(cell)
    };
    const INITIAL_PHI: usize = 16;
    for i in 0..INITIAL_PHI {
        let phi = (TAU * i as f64 / INITIAL_PHI as f64, TAU * (i + 1) as f64 / INITIAL_PHI as f64);
        for s in [(0.0, 0.5), (0.5, 1.0)] {
            let cell = make(phi, s)?;
            heap.push(Ranked(cell.error(), cells.len()));
            cells.push(cell);
        }
    }
    let mut total_err: f64 = cells.iter().map(Patch::error).sum();
    while total_err > tol {
        if evaluations.get() >= budget {
            return Err(Error::QuadratureStalled { budget, error: total_err });
        }
        let Ranked(err, idx) = heap.pop().expect("nonempty cell heap");
        total_err -= err;
        let parts = cells[idx].split();
        cells[idx].children = [0.0; 4];
        cells[idx].coarse = 0.0;
        for (cp, cs) in parts {
            let cell = make(cp, cs)?;
            total_err += cell.error();
            heap.push(Ranked(cell.error(), cells.len()));
            cells.push(cell);
        }
        // Guard against drift of the running sum.
        if heap.len() % 256 == 0 {
            total_err = heap.iter().map(|r| r.0).sum();
        }
    }
    let value = heap.iter().map(|r| cells[r.1].fine()).sum();
    Ok(QuadratureResult { value, error_estimate: total_err.max(0.0), evaluations: evaluations.get() })
}
