//! The regular part `k` of the Green's function with natural boundary
//! conditions, the Robin function `h(x) = k(x, x)` and `G = -(1/2pi) log|x-y| + k`.
//!
//! Disk, half-plane and plane use image formulas; parametric domains solve
//! one Dirichlet problem per source point.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::Domain;
use crate::harmonic::{spectral, LayerDensities, NystromDirichlet};
use crate::{Error, Result, Vec2};

const INV_2PI: f64 = 0.5 / PI;
const INV_4PI: f64 = 0.25 / PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelSource {
    AnalyticImage,
    NumericSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEvaluation {
    pub value: f64,
    pub gradient_x: Vec2,
    pub source: KernelSource,
    pub error_estimate: f64,
}

impl KernelEvaluation {
    fn analytic(value: f64, gradient_x: Vec2) -> Self {
        Self { value, gradient_x, source: KernelSource::AnalyticImage, error_estimate: 0.0 }
    }
}

fn require_inside(domain: &Domain, x: Vec2) -> Result<()> {
    if domain.contains(x) {
        Ok(())
    } else {
        Err(Error::OutsideDomain(x))
    }
}

fn disk_k(x: Vec2, y: Vec2) -> (f64, Vec2) {
    let q = 1.0 - 2.0 * x.dot(y) + x.norm_sq() * y.norm_sq();
    (INV_4PI * q.ln(), (x * (2.0 * y.norm_sq()) - y * 2.0) * (INV_4PI / q))
}

fn half_plane_k(x: Vec2, y: Vec2) -> (f64, Vec2) {
    let r = x - Vec2::new(y.x, -y.y);
    (INV_2PI * r.norm_sq().ln() * 0.5, r * (INV_2PI / r.norm_sq()))
}

/// `k(x, y)` and its gradient in `x`.
pub fn k_omega(domain: &Domain, x: Vec2, y: Vec2) -> Result<KernelEvaluation> {
    require_inside(domain, x)?;
    require_inside(domain, y)?;
    match domain {
        Domain::UnitDisk => {
            let (v, g) = disk_k(x, y);
            Ok(KernelEvaluation::analytic(v, g))
        }
        Domain::HalfPlane => {
            let (v, g) = half_plane_k(x, y);
            Ok(KernelEvaluation::analytic(v, g))
        }
        Domain::FullPlane => Ok(KernelEvaluation::analytic(0.0, Vec2::ZERO)),
        Domain::Parametric(_) => k_numeric(domain, x, y),
    }
}

/// `h(x) = k(x, x)` and its gradient.
pub fn h_omega(domain: &Domain, x: Vec2) -> Result<KernelEvaluation> {
    require_inside(domain, x)?;
    match domain {
        Domain::UnitDisk => {
            let q = 1.0 - x.norm_sq();
            Ok(KernelEvaluation::analytic(INV_2PI * q.ln(), x * (-2.0 * INV_2PI / q)))
        }
        Domain::HalfPlane => Ok(KernelEvaluation::analytic(
            INV_2PI * (2.0 * x.y).ln(),
            Vec2::new(0.0, INV_2PI / x.y),
        )),
        Domain::FullPlane => Ok(KernelEvaluation::analytic(0.0, Vec2::ZERO)),
        Domain::Parametric(_) => h_numeric(domain, x),
    }
}

/// `G(x, y)` and its gradient in `x`.
pub fn green(domain: &Domain, x: Vec2, y: Vec2) -> Result<KernelEvaluation> {
    let r = x - y;
    if r.norm_sq() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let k = k_omega(domain, x, y)?;
    Ok(KernelEvaluation {
        value: k.value - INV_2PI * r.norm().ln(),
        gradient_x: k.gradient_x - r * (INV_2PI / r.norm_sq()),
        ..k
    })
}

/// `k(x, y)` through a boundary-integral solve, for any bounded domain.
pub fn k_numeric(domain: &Domain, x: Vec2, y: Vec2) -> Result<KernelEvaluation> {
    require_inside(domain, x)?;
    let src = NumericSource::new(domain, y, false)?;
    Ok(src.k_at(x))
}

/// `h(x)` through a boundary-integral solve, for any bounded domain.
pub fn h_numeric(domain: &Domain, x: Vec2) -> Result<KernelEvaluation> {
    Ok(NumericSource::new(domain, x, true)?.h())
}

/// Image of a source near the boundary: its inverse in the osculating circle
/// at the closest boundary point (a mirror image where the boundary is flat).
/// On that circle `|s - y| = m |s - y*|`, so the remaining boundary data are
/// small and smooth even for sources very close to the boundary.
#[derive(Debug, Clone, Copy)]
struct Image {
    point: Vec2,
    /// `d point_a / d y_b`.
    jacobian: [[f64; 2]; 2],
    /// `(1/2pi) log m` and its gradient in `y`.
    offset: f64,
    offset_grad: Vec2,
}

type Mat2 = [[f64; 2]; 2];

fn outer(a: Vec2, b: Vec2) -> Mat2 {
    [[a.x * b.x, a.x * b.y], [a.y * b.x, a.y * b.y]]
}

fn mat_add(a: Mat2, b: Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

fn mat_mul(a: Mat2, b: Mat2) -> Mat2 {
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn mat_scale(a: Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// `M^T v`.
fn transpose_apply(m: Mat2, v: Vec2) -> Vec2 {
    Vec2::new(m[0][0] * v.x + m[1][0] * v.y, m[0][1] * v.x + m[1][1] * v.y)
}

/// Below this curvature the mirror image is used.
const FLAT_CURVATURE: f64 = 1e-3;

/// Arclength derivative of the boundary curvature at parameter `t`.
fn curvature_slope(domain: &Domain, t: f64) -> f64 {
    match domain {
        Domain::Parametric(p) => {
            let h = 1e-4;
            let dk = (-p.curve.curvature(t + 2.0 * h) + 8.0 * p.curve.curvature(t + h)
                - 8.0 * p.curve.curvature(t - h)
                + p.curve.curvature(t - 2.0 * h))
                / (12.0 * h);
            dk / p.curve.eval(t)[1].norm()
        }
        _ => 0.0,
    }
}

impl Image {
    fn of(domain: &Domain, y: Vec2) -> Result<Option<Self>> {
        let cp = domain.closest_boundary_point(y)?;
        let d = cp.distance;
        let kappa = cp.curvature;
        if cp.ambiguous || d >= domain.rho_bar() || kappa.abs() * d >= 0.5 {
            return Ok(None);
        }
        let (s, nu, tau) = (cp.point.s, cp.point.nu, cp.point.tau);
        // Gradient of the arclength coordinate of the projection.
        let g = tau * (1.0 / (1.0 - kappa * d));
        if kappa.abs() < FLAT_CURVATURE {
            let jacobian = mat_add(mat_scale(outer(tau, tau), 2.0 / (1.0 - kappa * d)), mat_scale(IDENTITY, -1.0));
            return Ok(Some(Self { point: s * 2.0 - y, jacobian, offset: 0.0, offset_grad: Vec2::ZERO }));
        }
        let slope = cp.point.param.map_or(0.0, |t| curvature_slope(domain, t));
        let radius = 1.0 / kappa.abs();
        let center = s - nu / kappa;
        // d center = (kappa'/kappa^2) nu d sigma, d radius = -sign(kappa) kappa'/kappa^2 d sigma.
        let dc = mat_scale(outer(nu, g), slope / (kappa * kappa));
        let dr = g * (-kappa.signum() * slope / (kappa * kappa));
        let e = y - center;
        let q = e.norm_sq();
        let point = center + e * (radius * radius / q);
        let de = mat_add(IDENTITY, mat_scale(dc, -1.0));
        let inversion = mat_add(IDENTITY, mat_scale(outer(e, e), -2.0 / q));
        let jacobian = mat_add(
            mat_add(dc, mat_scale(outer(e, dr), 2.0 * radius / q)),
            mat_scale(mat_mul(inversion, de), radius * radius / q),
        );
        let offset = INV_2PI * (0.5 * q.ln() - radius.ln());
        let offset_grad = (transpose_apply(de, e) * (1.0 / q) - dr * (1.0 / radius)) * INV_2PI;
        Ok(Some(Self { point, jacobian, offset, offset_grad }))
    }
}

/// The harmonic function `x -> k(x, y)` for one source `y` in a bounded
/// domain: `k(., y) = (1/2pi) log|. - y*| + c(y) + u_y` with `y*` the image
/// of the source (when the projection is unique) and `u_y` a double layer.
/// Optionally carries the derivatives of `u_y` with respect to `y`, which
/// give the exact derivative of the discrete Robin function.
pub struct NumericSource {
    y: Vec2,
    image: Option<Image>,
    layer: LayerDensities,
    error_estimate: f64,
}

impl NumericSource {
    pub fn new(domain: &Domain, y: Vec2, with_derivatives: bool) -> Result<Self> {
        require_inside(domain, y)?;
        let solver: Arc<NystromDirichlet> = domain.kernel_solver()?;
        let image = Image::of(domain, y)?;
        let g = solver.grid();
        let n = g.len();
        let mut data = vec![0.0; n];
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            let r = g.p[i] - y;
            let mut v = 0.5 * r.norm_sq().ln();
            let mut dv = r * (-1.0 / r.norm_sq());
            if let Some(im) = &image {
                let r2 = g.p[i] - im.point;
                v -= 0.5 * r2.norm_sq().ln();
                dv += transpose_apply(im.jacobian, r2 * (1.0 / r2.norm_sq()));
            }
            data[i] = INV_2PI * v;
            d1[i] = INV_2PI * dv.x;
            d2[i] = INV_2PI * dv.y;
            if let Some(im) = &image {
                data[i] -= im.offset;
                d1[i] -= im.offset_grad.x;
                d2[i] -= im.offset_grad.y;
            }
        }
        let mut densities = vec![solver.density(&data)?];
        if with_derivatives {
            densities.push(solver.density(&d1)?);
            densities.push(solver.density(&d2)?);
        }
        let scale = data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let error_estimate = spectral::tail_estimate(&densities[0]) + 1e-14 * scale;
        Ok(Self { y, image, layer: LayerDensities::new(solver, densities), error_estimate })
    }

    pub fn source(&self) -> Vec2 {
        self.y
    }

    /// `k(x, y)` and its gradient in `x`.
    pub fn k_at(&self, x: Vec2) -> KernelEvaluation {
        let mut out = [(0.0, Vec2::ZERO)];
        self.layer.eval(x, &mut out);
        let (mut value, mut grad) = out[0];
        if let Some(im) = &self.image {
            let r = x - im.point;
            value += INV_2PI * r.norm().ln() + im.offset;
            grad += r * (INV_2PI / r.norm_sq());
        }
        KernelEvaluation {
            value,
            gradient_x: grad,
            source: KernelSource::NumericSolve,
            error_estimate: self.error_estimate,
        }
    }

    /// `h(y)` and its gradient. Without derivative densities the gradient
    /// uses the symmetry identity `grad h = 2 grad_x k(x, y)|_{x=y}`.
    pub fn h(&self) -> KernelEvaluation {
        let y = self.y;
        let derivs = self.layer.count() == 3;
        let mut out = [(0.0, Vec2::ZERO); 3];
        let out = &mut out[..self.layer.count()];
        self.layer.eval(y, out);
        let (mut value, g0) = out[0];
        let mut grad = if derivs { g0 + Vec2::new(out[1].0, out[2].0) } else { g0 * 2.0 };
        if let Some(im) = &self.image {
            let r = y - im.point;
            value += INV_2PI * r.norm().ln() + im.offset;
            let dr = transpose_apply(mat_add(IDENTITY, mat_scale(im.jacobian, -1.0)), r);
            grad += dr * (INV_2PI / r.norm_sq()) + im.offset_grad;
        }
        KernelEvaluation {
            value,
            gradient_x: grad,
            source: KernelSource::NumericSolve,
            error_estimate: self.error_estimate,
        }
    }
}
