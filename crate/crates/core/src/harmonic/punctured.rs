//! Harmonic functions on `Omega minus a closed disk`, with Dirichlet data on the
//! outer boundary and a homogeneous Neumann condition on the hole.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::nystrom::{conjugate_of_layer, kernel, LayerDensities, NystromDirichlet};
use super::{spectral, BoundaryData};
use crate::{Error, Result, Vec2};

const MAX_MODES: usize = 64;
const MAX_ANNULUS_SAMPLES: usize = 1 << 16;

#[inline]
fn c(v: Vec2) -> Complex64 {
    Complex64::new(v.x, v.y)
}

#[inline]
fn v(z: Complex64) -> Vec2 {
    Vec2::new(z.re, z.im)
}

/// Gradient of `Re G` given `G'`.
#[inline]
fn grad_of_real_part(dg: Complex64) -> Vec2 {
    Vec2::new(dg.re, -dg.im)
}

/// Unit-disk solution: a disk automorphism `T(z) = (z - c)/(1 - conj(c) z)`
/// carries the hole onto `|zeta| < rho0`, where the problem separates in
/// Fourier modes. Both boundary conditions and the Dirichlet energy are
/// conformally invariant.
#[derive(Debug, Clone)]
pub struct AnnulusSolution {
    shift: Complex64,
    rho0: f64,
    /// Fourier coefficients of the transplanted outer data, in FFT order.
    coeffs: Vec<Complex64>,
    pub error_estimate: f64,
}

impl AnnulusSolution {
    /// `radius = 0` gives the plain Dirichlet problem with the map centered at `center`.
    pub fn new(center: Vec2, radius: f64, data: &dyn BoundaryData, tol: f64) -> Result<Self> {
        let alpha = center.norm();
        let q = 1.0 + alpha * alpha - radius * radius;
        let disc = q * q - 4.0 * alpha * alpha;
        if !(alpha + radius < 1.0) || disc < 0.0 {
            return Err(Error::CoreTouchesBoundary {
                epsilon: radius,
                distance: 1.0 - alpha,
            });
        }
        // Smaller root of alpha p^2 - q p + alpha = 0, written stably.
        let p = 2.0 * alpha / (q + disc.sqrt());
        let dir = if alpha > 0.0 { center / alpha } else { Vec2::new(1.0, 0.0) };
        let shift = c(dir * p);
        let rim = c(center + dir * radius);
        let rho0 = if radius > 0.0 {
            ((rim - shift) / (Complex64::new(1.0, 0.0) - shift.conj() * rim)).norm()
        } else {
            0.0
        };

        let mut m = 256;
        loop {
            let (t, pts) = Self::outer_nodes(shift, m);
            let values = data.sample(&t, &pts);
            let tail = spectral::tail_estimate(&values);
            let scale = values.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            if tail <= tol * scale || m >= MAX_ANNULUS_SAMPLES {
                if tail > tol * scale {
                    log::warn!("annulus data unresolved at {m} samples (tail {tail:.2e})");
                }
                return Ok(Self {
                    shift,
                    rho0,
                    coeffs: spectral::coefficients(&values),
                    error_estimate: tail,
                });
            }
            m *= 2;
        }
    }

    /// Parameters (unwrapped, increasing) and points of `T^{-1}(e^{i psi_j})`.
    fn outer_nodes(shift: Complex64, m: usize) -> (Vec<f64>, Vec<Vec2>) {
        let mut t = Vec::with_capacity(m);
        let mut pts = Vec::with_capacity(m);
        let mut prev: Option<f64> = None;
        for j in 0..m {
            let psi = TAU * j as f64 / m as f64;
            let zeta = Complex64::from_polar(1.0, psi);
            let z = (zeta + shift) / (Complex64::new(1.0, 0.0) + shift.conj() * zeta);
            let mut ang = z.arg();
            if let Some(p) = prev {
                ang += TAU * ((p - ang) / TAU).round();
            } else {
                ang = ang.rem_euclid(TAU);
            }
            prev = Some(ang);
            t.push(ang);
            pts.push(v(z));
        }
        (t, pts)
    }

    pub fn inner_radius_image(&self) -> f64 {
        self.rho0
    }

    fn modes(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn value_and_gradient(&self, z: Vec2) -> (f64, Vec2) {
        let one = Complex64::new(1.0, 0.0);
        let zc = c(z);
        let den = one - self.shift.conj() * zc;
        let zeta = (zc - self.shift) / den;
        let dzeta = (one - self.shift.norm_sqr()) / (den * den);
        let inv = one / zeta;
        let mut phi = Complex64::new(0.0, 0.0);
        let mut dphi = Complex64::new(0.0, 0.0);
        let mut zk = one; // zeta^k
        let mut ik = one; // zeta^-k
        let mut r2k = 1.0;
        let r02 = self.rho0 * self.rho0;
        for k in 1..self.modes() {
            zk *= zeta;
            ik *= inv;
            r2k *= r02;
            let ck = self.coeffs[k];
            let norm = 1.0 / (1.0 + r2k);
            let kf = k as f64;
            phi += (ck * zk + ck.conj() * r2k * ik) * norm;
            dphi += (ck * zk * inv * kf - ck.conj() * r2k * ik * inv * kf) * norm;
        }
        let value = self.coeffs[0].re + 2.0 * phi.re;
        (value, grad_of_real_part(dphi * dzeta * 2.0))
    }

    /// `integral |grad w|^2` over the punctured disk.
    pub fn dirichlet_energy(&self) -> f64 {
        let n = self.coeffs.len();
        let r02 = self.rho0 * self.rho0;
        let mut sum = 0.0;
        for k in 1..n / 2 {
            let r2k = r02.powi(k as i32);
            let factor = (1.0 - r2k) / (1.0 + r2k);
            sum += 2.0 * k as f64 * self.coeffs[k].norm_sqr() * factor;
        }
        TAU * sum
    }
}

/// General bounded domain: double layer on the outer boundary plus decaying
/// multipoles about the hole center, with the Neumann condition imposed
/// mode by mode on the hole.
pub struct CollocationSolution {
    layer: LayerDensities,
    center: Vec2,
    radius: f64,
    /// `A_k = c_k + i s_k`, term `Re[A_k (radius/(z - center))^k]`.
    multipoles: Vec<Complex64>,
    data: Vec<f64>,
    pub error_estimate: f64,
}

impl CollocationSolution {
    pub fn new(
        solver: Arc<NystromDirichlet>,
        center: Vec2,
        radius: f64,
        distance: f64,
        data: &dyn BoundaryData,
    ) -> Result<Self> {
        let g = solver.grid();
        let n = g.len();
        let ratio = radius / distance;
        let modes = if ratio <= 0.0 {
            1
        } else {
            ((1e-15f64).ln() / ratio.ln()).ceil().clamp(4.0, MAX_MODES as f64) as usize
        };
        let q = (4 * modes).max(32);

        // Multipoles sampled on the outer nodes.
        let mut b = DMatrix::zeros(n, 2 * modes);
        for i in 0..n {
            let w = Complex64::new(radius, 0.0) / c(g.p[i] - center);
            let mut wk = Complex64::new(1.0, 0.0);
            for k in 0..modes {
                wk *= w;
                b[(i, 2 * k)] = wk.re;
                b[(i, 2 * k + 1)] = -wk.im;
            }
        }
        // Scaled Fourier projections of the radial derivative of the layer on the hole.
        let mut cmat = DMatrix::zeros(2 * modes, n);
        for qi in 0..q {
            let phi = TAU * qi as f64 / q as f64;
            let dir = Vec2::from_polar(1.0, phi);
            let x = center + dir * radius;
            for j in 0..n {
                let (_, kg) = kernel(x, g.p[j], g.nu[j]);
                let dr = kg.dot(dir) * g.w[j] * 2.0 / q as f64;
                for k in 1..=modes {
                    let (s, co) = (k as f64 * phi).sin_cos();
                    let scale = radius / k as f64;
                    cmat[(2 * (k - 1), j)] += dr * co * scale;
                    cmat[(2 * (k - 1) + 1, j)] += dr * s * scale;
                }
            }
        }

        let f = data.sample(&g.t, &g.p);
        let ainv_b = solver.density_matrix(&b)?;
        let ainv_f = DVector::from_column_slice(&solver.density(&f)?);
        let schur = DMatrix::identity(2 * modes, 2 * modes) + &cmat * &ainv_b;
        let rhs = &cmat * &ainv_f;
        let coef = schur
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolverDiverged("singular multipole system".into()))?;
        let mu = ainv_f - &ainv_b * &coef;

        let multipoles: Vec<Complex64> = (0..modes)
            .map(|k| Complex64::new(coef[2 * k], coef[2 * k + 1]))
            .collect();
        let mu = mu.as_slice().to_vec();
        let amp = multipoles.iter().fold(0.0f64, |m, a| m.max(a.norm()));
        let error_estimate = spectral::tail_estimate(&mu) + amp * ratio.powi(modes as i32);
        if (distance - radius) < 4.0 * g.w.iter().cloned().fold(0.0, f64::max) {
            log::warn!(
                "hole within {:.3e} of the boundary: collocation accuracy degraded",
                distance - radius
            );
        }
        Ok(Self {
            layer: LayerDensities::new(solver, vec![mu]),
            center,
            radius,
            multipoles,
            data: f,
            error_estimate,
        })
    }

    fn multipole(&self, z: Vec2) -> (f64, Vec2) {
        let d = c(z - self.center);
        let w = Complex64::new(self.radius, 0.0) / d;
        let mut wk = Complex64::new(1.0, 0.0);
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        for (k, a) in self.multipoles.iter().enumerate() {
            wk *= w;
            let kf = (k + 1) as f64;
            g += a * wk;
            dg -= a * wk * kf / d;
        }
        (g.re, grad_of_real_part(dg))
    }

    pub fn value_and_gradient(&self, z: Vec2) -> (f64, Vec2) {
        let mut out = [(0.0, Vec2::ZERO)];
        self.layer.eval(z, &mut out);
        let (pv, pg) = self.multipole(z);
        (out[0].0 + pv, out[0].1 + pg)
    }

    /// `integral |grad w|^2 = boundary integral of w dw/dnu` (the hole is Neumann).
    pub fn dirichlet_energy(&self) -> f64 {
        let g = self.layer.solver().grid();
        let n = g.len();
        let conj = conjugate_of_layer(g, self.layer.coarse(0));
        let dconj = spectral::derivative(&conj);
        let mut sum = 0.0;
        for i in 0..n {
            let (_, pg) = self.multipole(g.p[i]);
            sum += self.data[i] * (dconj[i] + pg.dot(g.nu[i]) * g.speed[i]);
        }
        sum * TAU / n as f64
    }
}

