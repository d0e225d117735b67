//! Planar domains and the distance quantities built on them.

mod curve;
mod regime;

use std::f64::consts::TAU;
use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::harmonic::NystromDirichlet;
use crate::{Error, Result, Vec2};

pub use curve::{parameter_grid, Curve, FourierSeries, SMOOTHED_CARDIOID_K};
pub use regime::{
    d_n, in_region_c, in_region_d, sample_interior, BBox, Membership, RegimeParams, SampleSet,
    SamplingRegion, MAX_SAMPLING_ATTEMPTS,
};

/// Coarse parameter samples used to seed closest-point refinement.
pub const CLOSEST_POINT_SAMPLES: usize = 4096;
/// Boundary nodes used by the numeric Green's-function kernels.
pub const DEFAULT_KERNEL_NODES: usize = 512;
/// Parameter half-width excluded around a cusp when estimating `rho_bar`.
const CUSP_EXCLUSION: f64 = 0.3;

/// A point on the boundary with its outward normal and unit tangent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub s: Vec2,
    pub nu: Vec2,
    pub tau: Vec2,
    pub param: Option<f64>,
}

/// Result of projecting an interior point onto the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint {
    pub point: BoundaryPoint,
    pub distance: f64,
    /// Signed curvature of the boundary at the projection (positive if convex).
    pub curvature: f64,
    /// Set when other boundary points are equally close (only possible for
    /// `distance >= rho_bar`).
    pub ambiguous: bool,
}

/// A planar region.
#[derive(Clone)]
pub enum Domain {
    UnitDisk,
    /// `{x : x.y > 0}`.
    HalfPlane,
    FullPlane,
    Parametric(Arc<ParametricDomain>),
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::UnitDisk => write!(f, "UnitDisk"),
            Domain::HalfPlane => write!(f, "HalfPlane"),
            Domain::FullPlane => write!(f, "FullPlane"),
            Domain::Parametric(p) => write!(f, "Parametric({})", p.curve.name()),
        }
    }
}

impl Domain {
    pub fn parametric(curve: Curve) -> Result<Self> {
        Self::parametric_with_nodes(curve, DEFAULT_KERNEL_NODES)
    }

    /// Parametric domain whose numeric kernels use `kernel_nodes` boundary nodes.
    pub fn parametric_with_nodes(curve: Curve, kernel_nodes: usize) -> Result<Self> {
        Ok(Domain::Parametric(Arc::new(ParametricDomain::new(
            curve,
            kernel_nodes,
        )?)))
    }

    /// `"unit-disk"`, `"half-plane"`, `"plane"`, or any [`Curve::from_name`] name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim() {
            "unit-disk" | "disk" => Ok(Domain::UnitDisk),
            "half-plane" => Ok(Domain::HalfPlane),
            "plane" | "full-plane" => Ok(Domain::FullPlane),
            other => Curve::from_name(other)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown domain {other:?}")))
                .and_then(Domain::parametric),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Domain::UnitDisk => "unit-disk".into(),
            Domain::HalfPlane => "half-plane".into(),
            Domain::FullPlane => "plane".into(),
            Domain::Parametric(p) => p.curve.name(),
        }
    }

    /// Uniform interior/exterior disk radius.
    pub fn rho_bar(&self) -> f64 {
        match self {
            Domain::UnitDisk => 1.0,
            Domain::HalfPlane | Domain::FullPlane => f64::INFINITY,
            Domain::Parametric(p) => p.rho_bar,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::UnitDisk => 2.0,
            Domain::HalfPlane | Domain::FullPlane => f64::INFINITY,
            Domain::Parametric(p) => p.diameter,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Domain::UnitDisk | Domain::Parametric(_))
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self, Domain::FullPlane)
    }

    /// The boundary as a parametric curve, for bounded domains.
    pub fn boundary_curve(&self) -> Option<Curve> {
        match self {
            Domain::UnitDisk => Some(Curve::circle()),
            Domain::Parametric(p) => Some(p.curve.clone()),
            _ => None,
        }
    }

    /// Axis-aligned bounding box of a bounded domain.
    pub fn bbox(&self) -> Option<BBox> {
        match self {
            Domain::UnitDisk => Some(BBox::new(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0))),
            Domain::Parametric(p) => Some(p.bbox),
            _ => None,
        }
    }

    /// Positive inside, negative outside, `+inf` everywhere for the plane.
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        match self {
            Domain::UnitDisk => 1.0 - x.norm(),
            Domain::HalfPlane => x.y,
            Domain::FullPlane => f64::INFINITY,
            Domain::Parametric(p) => {
                let cp = p.project(x);
                let sign = (cp.point.s - x).dot(cp.point.nu);
                if sign >= 0.0 {
                    cp.distance
                } else {
                    -cp.distance
                }
            }
        }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        x.is_finite() && self.signed_distance(x) > 0.0
    }

    /// `dist(x, boundary)` for interior points.
    pub fn boundary_distance(&self, x: Vec2) -> Result<f64> {
        let d = self.signed_distance(x);
        if d > 0.0 && x.is_finite() {
            Ok(d)
        } else {
            Err(Error::OutsideDomain(x))
        }
    }

    /// Closest boundary point to an interior point.
    pub fn closest_boundary_point(&self, x: Vec2) -> Result<ClosestPoint> {
        let cp = match self {
            Domain::FullPlane => return Err(Error::NoBoundary),
            Domain::UnitDisk => {
                let r = x.norm();
                let dir = if r > 0.0 { x / r } else { Vec2::new(1.0, 0.0) };
                ClosestPoint {
                    point: BoundaryPoint {
                        s: dir,
                        nu: dir,
                        tau: dir.perp(),
                        param: Some(dir.angle().rem_euclid(TAU)),
                    },
                    distance: 1.0 - r,
                    curvature: 1.0,
                    ambiguous: r == 0.0,
                }
            }
            Domain::HalfPlane => ClosestPoint {
                point: BoundaryPoint {
                    s: Vec2::new(x.x, 0.0),
                    nu: Vec2::new(0.0, -1.0),
                    tau: Vec2::new(1.0, 0.0),
                    param: None,
                },
                distance: x.y,
                curvature: 0.0,
                ambiguous: false,
            },
            Domain::Parametric(p) => {
                let cp = p.project(x);
                if (cp.point.s - x).dot(cp.point.nu) < 0.0 {
                    return Err(Error::OutsideDomain(x));
                }
                cp
            }
        };
        if !(cp.distance > 0.0) || !x.is_finite() {
            return Err(Error::OutsideDomain(x));
        }
        Ok(cp)
    }

    /// The Nyström solver shared by the numeric kernels of a parametric domain.
    pub(crate) fn kernel_solver(&self) -> Result<Arc<NystromDirichlet>> {
        match self {
            Domain::Parametric(p) => p.kernel_solver(),
            Domain::UnitDisk => {
                static DISK: OnceLock<std::result::Result<Arc<NystromDirichlet>, String>> =
                    OnceLock::new();
                DISK.get_or_init(|| {
                    NystromDirichlet::new(&Curve::circle(), DEFAULT_KERNEL_NODES)
                        .map(Arc::new)
                        .map_err(|e| e.to_string())
                })
                .clone()
                .map_err(Error::SolverDiverged)
            }
            _ => Err(Error::UnboundedDomain),
        }
    }

    /// Nyström solver with `n` nodes, factored once per domain and size.
    pub(crate) fn solver_with_nodes(&self, n: usize) -> Result<Arc<NystromDirichlet>> {
        static DISK: OnceLock<Mutex<HashMap<usize, Arc<NystromDirichlet>>>> = OnceLock::new();
        let base = self.kernel_solver()?;
        if n == base.n() {
            return Ok(base);
        }
        let cache = match self {
            Domain::Parametric(p) => &p.refined,
            _ => DISK.get_or_init(Default::default),
        };
        if let Some(s) = cache.lock().expect("solver cache poisoned").get(&n) {
            return Ok(s.clone());
        }
        let solver = Arc::new(NystromDirichlet::new(base.curve(), n)?);
        cache.lock().expect("solver cache poisoned").insert(n, solver.clone());
        Ok(solver)
    }
}

/// A bounded domain enclosed by a smooth (or flagged-cusp) parametric curve.
pub struct ParametricDomain {
    pub curve: Curve,
    pub rho_bar: f64,
    pub diameter: f64,
    pub bbox: BBox,
    pub kernel_nodes: usize,
    samples: Vec<Vec2>,
    kernel: OnceLock<std::result::Result<Arc<NystromDirichlet>, String>>,
    refined: Mutex<HashMap<usize, Arc<NystromDirichlet>>>,
}

impl ParametricDomain {
    pub fn new(curve: Curve, kernel_nodes: usize) -> Result<Self> {
        curve.validate().map_err(Error::InvalidCurve)?;
        if kernel_nodes < 16 {
            return Err(Error::InvalidArgument(format!(
                "kernel_nodes must be at least 16, got {kernel_nodes}"
            )));
        }
        let samples: Vec<Vec2> = parameter_grid(CLOSEST_POINT_SAMPLES)
            .map(|t| curve.point(t))
            .collect();

        let area = 0.5
            * samples
                .iter()
                .zip(samples.iter().cycle().skip(1))
                .map(|(a, b)| a.cross(*b))
                .sum::<f64>();
        if !(area > 0.0) {
            return Err(Error::InvalidCurve(format!(
                "curve must be traversed counterclockwise (signed area {area})"
            )));
        }
        check_simple(&curve)?;

        let cusp = curve.cusp();
        let min_radius = parameter_grid(CLOSEST_POINT_SAMPLES)
            .filter(|t| cusp.is_none_or(|c| angular_gap(*t, c) > CUSP_EXCLUSION))
            .map(|t| 1.0 / curve.curvature(t).abs())
            .fold(f64::INFINITY, f64::min);
        if let Some(c) = cusp {
            log::warn!(
                "curve {} has a cusp at t = {c:.4}; rho_bar estimated away from it",
                curve.name()
            );
        }

        let coarse: Vec<Vec2> = samples.iter().step_by(4).copied().collect();
        let mut diameter: f64 = 0.0;
        for (i, a) in coarse.iter().enumerate() {
            for b in &coarse[i + 1..] {
                diameter = diameter.max((*a - *b).norm());
            }
        }
        let (mut lo, mut hi) = (samples[0], samples[0]);
        for p in &samples {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }

        Ok(Self {
            curve,
            rho_bar: 0.5 * min_radius,
            diameter,
            bbox: BBox::new(lo, hi),
            kernel_nodes,
            samples,
            kernel: OnceLock::new(),
            refined: Mutex::new(HashMap::new()),
        })
    }

    fn kernel_solver(&self) -> Result<Arc<NystromDirichlet>> {
        self.kernel
            .get_or_init(|| {
                NystromDirichlet::new(&self.curve, self.kernel_nodes)
                    .map(Arc::new)
                    .map_err(|e| e.to_string())
            })
            .clone()
            .map_err(Error::SolverDiverged)
    }

    /// Global closest point, with no interior check.
    pub(crate) fn project(&self, x: Vec2) -> ClosestPoint {
        let n = self.samples.len();
        let dist2: Vec<f64> = self.samples.iter().map(|p| (*p - x).norm_sq()).collect();
        let best = (0..n)
            .min_by(|&i, &j| dist2[i].total_cmp(&dist2[j]))
            .unwrap_or(0);
        let (t_best, d_best) = self.refine(x, best);

        let mut ambiguous = false;
        if d_best >= self.rho_bar {
            // Other local minima of the sampled distance that refine to the
            // same value signal a non-unique projection.
            for i in 0..n {
                if i == best {
                    continue;
                }
                let prev = dist2[(i + n - 1) % n];
                let next = dist2[(i + 1) % n];
                if dist2[i] <= prev && dist2[i] <= next {
                    let (t, d) = self.refine(x, i);
                    if angular_gap(t, t_best) > 1e-6 && (d - d_best).abs() <= 1e-9 * (1.0 + d_best)
                    {
                        ambiguous = true;
                        break;
                    }
                }
            }
        }

        let (tau, nu) = self.curve.frame(t_best);
        ClosestPoint {
            point: BoundaryPoint {
                s: self.curve.point(t_best),
                nu,
                tau,
                param: Some(t_best),
            },
            distance: d_best,
            curvature: self.curve.curvature(t_best),
            ambiguous,
        }
    }

    /// Safeguarded Newton refinement of `|x - p(t)|^2` from sample `i`.
    fn refine(&self, x: Vec2, i: usize) -> (f64, f64) {
        let n = self.samples.len() as f64;
        let h = TAU / n;
        let mut lo = (i as f64 - 1.0) * h;
        let mut hi = (i as f64 + 1.0) * h;
        let mut t = i as f64 * h;
        let grad = |t: f64| {
            let [p, d1, d2] = self.curve.eval(t);
            let r = x - p;
            (-r.dot(d1), d1.norm_sq() - r.dot(d2))
        };
        // The bracket is only valid if the derivative changes sign across it.
        let (glo, _) = grad(lo);
        let (ghi, _) = grad(hi);
        let bracketed = glo <= 0.0 && ghi >= 0.0;
        for _ in 0..100 {
            let (g, gg) = grad(t);
            let scale = 1.0 + self.curve.eval(t)[1].norm_sq();
            if g.abs() < 1e-13 * scale {
                break;
            }
            if bracketed {
                if g < 0.0 {
                    lo = t;
                } else {
                    hi = t;
                }
            }
            let mut next = if gg > 0.0 { t - g / gg } else { f64::NAN };
            if bracketed && !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            } else if !bracketed && !next.is_finite() {
                next = t - g.signum() * 0.5 * h;
            }
            if (next - t).abs() < 1e-16 * (1.0 + t.abs()) {
                t = next;
                break;
            }
            t = next;
        }
        let t = t.rem_euclid(TAU);
        (t, (x - self.curve.point(t)).norm())
    }
}

fn angular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn check_simple(curve: &Curve) -> Result<()> {
    const M: usize = 512;
    let pts: Vec<Vec2> = parameter_grid(M).map(|t| curve.point(t)).collect();
    let seg = |i: usize| (pts[i], pts[(i + 1) % M]);
    for i in 0..M {
        let (a, b) = seg(i);
        for j in i + 2..M {
            if i == 0 && j == M - 1 {
                continue;
            }
            let (c, d) = seg(j);
            let o1 = (b - a).cross(c - a);
            let o2 = (b - a).cross(d - a);
            let o3 = (d - c).cross(a - c);
            let o4 = (d - c).cross(b - c);
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "boundary self-intersects near t = {:.4}",
                    TAU * i as f64 / M as f64
                )));
            }
        }
    }
    Ok(())
}
