//! Double-layer Nyström discretization of the interior Dirichlet problem.
//!
//! A harmonic function is represented as
//! `u(x) = (1/2pi) * integral mu(y) nu(y).(x - y) / |x - y|^2 ds(y)`;
//! the boundary condition becomes the second-kind equation
//! `-mu/2 + K mu = f`, discretized with the trapezoidal rule on a uniform
//! parameter grid. Evaluation close to the boundary switches to a finer grid
//! onto which the density is trigonometrically interpolated.

use std::f64::consts::{FRAC_1_PI, TAU};
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::spectral;
use crate::geometry::{parameter_grid, Curve};
use crate::{Error, Result, Vec2};

const INV_2PI: f64 = 0.5 * FRAC_1_PI;
/// Order of the boundary Taylor expansion used extremely close to the boundary.
const TAYLOR_ORDER: usize = 6;
/// Refinement levels `1, 2, 4, ..., 64`.
pub(crate) const LEVELS: usize = 7;

/// Geometry sampled on a uniform parameter grid.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    pub t: Vec<f64>,
    pub p: Vec<Vec2>,
    pub dp: Vec<Vec2>,
    pub nu: Vec<Vec2>,
    pub speed: Vec<f64>,
    /// Trapezoidal arclength weights `speed * 2pi / n`.
    pub w: Vec<f64>,
    pub curvature: Vec<f64>,
}

impl BoundaryGrid {
    pub fn new(curve: &Curve, n: usize) -> Self {
        let mut g = BoundaryGrid {
            t: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            dp: Vec::with_capacity(n),
            nu: Vec::with_capacity(n),
            speed: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
            curvature: Vec::with_capacity(n),
        };
        for t in parameter_grid(n) {
            let [p, d1, _] = curve.eval(t);
            let speed = d1.norm();
            let (_, nu) = curve.frame(t);
            g.t.push(t);
            g.p.push(p);
            g.dp.push(d1);
            g.nu.push(nu);
            g.speed.push(speed);
            g.w.push(speed * TAU / n as f64);
            g.curvature.push(if speed > 0.0 { curve.curvature(t) } else { 0.0 });
        }
        g
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Index of the nearest node and its distance.
    pub fn nearest(&self, z: Vec2) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, p) in self.p.iter().enumerate() {
            let d = (z - *p).norm_sq();
            if d < best.1 {
                best = (j, d);
            }
        }
        (best.0, best.1.sqrt())
    }
}

/// Factorized Nyström system for one curve and resolution.
pub struct NystromDirichlet {
    curve: Curve,
    grid: BoundaryGrid,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    levels: [OnceLock<BoundaryGrid>; LEVELS],
}

impl std::fmt::Debug for NystromDirichlet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NystromDirichlet")
            .field("curve", &self.curve.name())
            .field("n", &self.grid.len())
            .finish()
    }
}

impl NystromDirichlet {
    pub fn new(curve: &Curve, n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "Nyström resolution must be even and at least 8, got {n}"
            )));
        }
        let grid = BoundaryGrid::new(curve, n);
        let a = system_matrix(&grid);
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::SolverDiverged("singular Nyström matrix".into()));
        }
        let levels = std::array::from_fn(|_| OnceLock::new());
        let solver = Self {
            curve: curve.clone(),
            grid,
            lu,
            levels,
        };
        // Sanity check on conditioning: constant data must give u = const.
        let ones = vec![1.0; n];
        let mu = solver.density(&ones)?;
        if mu.iter().any(|m| (m + 1.0).abs() > 1e-8) {
            return Err(Error::SolverDiverged(
                "Nyström system fails the constant-density identity".into(),
            ));
        }
        Ok(solver)
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn grid(&self) -> &BoundaryGrid {
        &self.grid
    }

    pub(crate) fn level_grid(&self, level: usize) -> &BoundaryGrid {
        if level == 0 {
            return &self.grid;
        }
        self.levels[level].get_or_init(|| BoundaryGrid::new(&self.curve, self.n() << level))
    }

    /// Density for boundary values sampled at the grid nodes.
    pub fn density(&self, data: &[f64]) -> Result<Vec<f64>> {
        if data.len() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "expected {} boundary samples, got {}",
                self.n(),
                data.len()
            )));
        }
        let rhs = DVector::from_column_slice(data);
        let mu = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::SolverDiverged("LU solve failed".into()))?;
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::SolverDiverged("non-finite density".into()));
        }
        Ok(mu.as_slice().to_vec())
    }

    /// Densities for several right-hand sides at once (columns of `rhs`).
    pub(crate) fn density_matrix(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.lu
            .solve(rhs)
            .ok_or_else(|| Error::SolverDiverged("LU solve failed".into()))
    }

    /// Solve with data sampled at the nodes.
    pub fn solve(self: &Arc<Self>, data: &[f64]) -> Result<HarmonicFunction> {
        let mu = self.density(data)?;
        let error_estimate = spectral::tail_estimate(&mu) + 1e-15 * max_abs(data) * self.n() as f64;
        Ok(HarmonicFunction {
            layer: LayerDensities::new(self.clone(), vec![mu]),
            data: data.to_vec(),
            error_estimate,
        })
    }

    /// Solve with data given as a function of `(t, p(t))`.
    pub fn solve_with<F: Fn(f64, Vec2) -> f64>(self: &Arc<Self>, f: F) -> Result<HarmonicFunction> {
        let data: Vec<f64> = self
            .grid
            .t
            .iter()
            .zip(&self.grid.p)
            .map(|(t, p)| f(*t, *p))
            .collect();
        self.solve(&data)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn system_matrix(g: &BoundaryGrid) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -0.5 - g.curvature[i] * g.w[i] * 0.5 * INV_2PI
        } else {
            let r = g.p[i] - g.p[j];
            INV_2PI * g.nu[j].dot(r) / r.norm_sq() * g.w[j]
        }
    })
}

/// Double-layer kernel weight `(1/2pi) nu.(z-y)/|z-y|^2` and its z-gradient.
#[inline]
pub(crate) fn kernel(z: Vec2, y: Vec2, nu: Vec2) -> (f64, Vec2) {
    let r = z - y;
    let r2 = r.norm_sq();
    let nr = nu.dot(r);
    let value = INV_2PI * nr / r2;
    let grad = (nu - r * (2.0 * nr / r2)) * (INV_2PI / r2);
    (value, grad)
}

/// One or more densities on the same Nyström grid, with lazily upsampled
/// copies for near-boundary evaluation.
pub(crate) struct LayerDensities {
    solver: Arc<NystromDirichlet>,
    coarse: Vec<Vec<f64>>,
    fine: [OnceLock<Vec<Vec<f64>>>; LEVELS],
    /// Per density, Fourier coefficients of `d^k F / dz^k` along the
    /// boundary, `F` the analytic function whose real part is the layer.
    taylor: OnceLock<Vec<Vec<Vec<Complex64>>>>,
}

impl LayerDensities {
    pub(crate) fn new(solver: Arc<NystromDirichlet>, coarse: Vec<Vec<f64>>) -> Self {
        Self {
            solver,
            coarse,
            fine: std::array::from_fn(|_| OnceLock::new()),
            taylor: OnceLock::new(),
        }
    }

    pub(crate) fn solver(&self) -> &Arc<NystromDirichlet> {
        &self.solver
    }

    pub(crate) fn count(&self) -> usize {
        self.coarse.len()
    }

    pub(crate) fn coarse(&self, k: usize) -> &[f64] {
        &self.coarse[k]
    }

    /// Refinement level adequate for evaluation at `z`, or `None` when `z`
    /// is too close even for the finest grid.
    fn level_for(&self, z: Vec2) -> Option<usize> {
        let g = self.solver.grid();
        let (j, d) = g.nearest(z);
        let d = d.min((z - g.p[j]).dot(g.nu[j]).abs());
        let ratio = 5.0 * g.w[j] / d.max(1e-300);
        if ratio <= 1.0 {
            Some(0)
        } else {
            let level = ratio.log2().ceil() as usize;
            (level < LEVELS).then_some(level)
        }
    }

    fn taylor_series(&self) -> &[Vec<Vec<Complex64>>] {
        self.taylor.get_or_init(|| {
            let g = self.solver.grid();
            let dz: Vec<Complex64> = g.dp.iter().map(|d| Complex64::new(d.x, d.y)).collect();
            self.coarse
                .iter()
                .map(|mu| {
                    let u = boundary_limit(g, mu);
                    let v = conjugate_of_layer(g, mu);
                    let mut h: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| Complex64::new(*a, *b)).collect();
                    let mut out = vec![spectral::complex_coefficients(&h)];
                    for _ in 0..TAYLOR_ORDER {
                        h = spectral::complex_derivative(&h)
                            .into_iter()
                            .zip(&dz)
                            .map(|(a, b)| a / b)
                            .collect();
                        out.push(spectral::complex_coefficients(&h));
                    }
                    out
                })
                .collect()
        })
    }

    /// Taylor expansion about the boundary point closest to `z`.
    fn eval_taylor(&self, z: Vec2, out: &mut [(f64, Vec2)]) {
        let fine = self.solver.level_grid(LEVELS - 1);
        let (j, _) = fine.nearest(z);
        let curve = self.solver.curve();
        let mut t = fine.t[j];
        for _ in 0..8 {
            let [p, d1, d2] = curve.eval(t);
            let r = p - z;
            let step = r.dot(d1) / (d1.norm_sq() + r.dot(d2));
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let s = curve.point(t);
        let delta = Complex64::new(z.x - s.x, z.y - s.y);
        for (o, series) in out.iter_mut().zip(self.taylor_series()) {
            let mut f = Complex64::new(0.0, 0.0);
            let mut df = Complex64::new(0.0, 0.0);
            let mut pow = Complex64::new(1.0, 0.0);
            let mut fact = 1.0;
            for (k, c) in series.iter().enumerate() {
                let hk = spectral::eval_series(c, t);
                if k > 0 {
                    df += hk * pow / fact;
                    pow *= delta;
                    fact *= k as f64;
                }
                f += hk * pow / fact;
            }
            *o = (f.re, Vec2::new(df.re, -df.im));
        }
    }

    fn densities_at(&self, level: usize) -> &[Vec<f64>] {
        if level == 0 {
            return &self.coarse;
        }
        self.fine[level].get_or_init(|| {
            self.coarse
                .iter()
                .map(|mu| spectral::upsample(mu, 1 << level))
                .collect()
        })
    }

    /// Values and gradients of every layer potential at `z`.
    pub(crate) fn eval(&self, z: Vec2, out: &mut [(f64, Vec2)]) {
        let Some(level) = self.level_for(z) else {
            return self.eval_taylor(z, out);
        };
        let g = self.solver.level_grid(level);
        let mus = self.densities_at(level);
        if level == 0 {
            out.iter_mut().for_each(|o| *o = (0.0, Vec2::ZERO));
            for j in 0..g.len() {
                let (kv, kg) = kernel(z, g.p[j], g.nu[j]);
                let w = g.w[j];
                for (o, mu) in out.iter_mut().zip(mus) {
                    let m = mu[j] * w;
                    o.0 += kv * m;
                    o.1 += kg * m;
                }
            }
            return;
        }
        // Close to the boundary: compensated Cauchy quadrature, exact for
        // constants. The layer is -Re F with F the Cauchy integral of mu.
        let zc = Complex64::new(z.x, z.y);
        let h = TAU / g.len() as f64;
        let q: Vec<(Complex64, Complex64)> = (0..g.len())
            .map(|j| {
                let r = Complex64::new(g.p[j].x, g.p[j].y) - zc;
                let qj = Complex64::new(g.dp[j].x, g.dp[j].y) * h / r;
                (qj, qj / r)
            })
            .collect();
        let denom: Complex64 = q.iter().map(|x| x.0).sum();
        for (o, mu) in out.iter_mut().zip(mus) {
            let num: Complex64 = q.iter().zip(mu).map(|(x, m)| x.0 * m).sum();
            let f = num / denom;
            let dnum: Complex64 = q.iter().zip(mu).map(|(x, m)| x.1 * (m - f)).sum();
            let df = dnum / denom;
            *o = (-f.re, Vec2::new(-df.re, df.im));
        }
    }
}

/// Harmonic function in a bounded simply connected domain, represented by a
/// double-layer density.
pub struct HarmonicFunction {
    layer: LayerDensities,
    data: Vec<f64>,
    /// A-posteriori estimate from the spectral tail of the density.
    pub error_estimate: f64,
}

impl HarmonicFunction {
    pub fn solver(&self) -> &Arc<NystromDirichlet> {
        self.layer.solver()
    }

    pub fn density(&self) -> &[f64] {
        self.layer.coarse(0)
    }

    /// Boundary values at the nodes.
    pub fn boundary_values(&self) -> &[f64] {
        &self.data
    }

    pub fn value_and_gradient(&self, z: Vec2) -> (f64, Vec2) {
        let mut out = [(0.0, Vec2::ZERO)];
        self.layer.eval(z, &mut out);
        out[0]
    }

    pub fn value(&self, z: Vec2) -> f64 {
        self.value_and_gradient(z).0
    }

    pub fn gradient(&self, z: Vec2) -> Vec2 {
        self.value_and_gradient(z).1
    }

    /// Harmonic conjugate on the boundary nodes (up to an additive constant).
    pub fn boundary_conjugate(&self) -> Vec<f64> {
        conjugate_of_layer(self.solver().grid(), self.density())
    }

    /// `integral over the domain of |grad u|^2`, via `u dv` on the boundary.
    pub fn dirichlet_energy(&self) -> f64 {
        let v = self.boundary_conjugate();
        let dv = spectral::derivative(&v);
        let n = dv.len() as f64;
        self.data.iter().zip(&dv).map(|(u, d)| u * d).sum::<f64>() * TAU / n
    }
}

/// Interior boundary values of the double layer, `-mu/2 + K mu`.
fn boundary_limit(g: &BoundaryGrid, mu: &[f64]) -> Vec<f64> {
    let n = g.len();
    (0..n)
        .map(|i| {
            let mut acc = -0.5 * mu[i] - g.curvature[i] * g.w[i] * 0.5 * INV_2PI * mu[i];
            for j in 0..n {
                if j != i {
                    let r = g.p[i] - g.p[j];
                    acc += INV_2PI * g.nu[j].dot(r) / r.norm_sq() * g.w[j] * mu[j];
                }
            }
            acc
        })
        .collect()
}

/// Boundary values of the conjugate of the double layer with density `mu`,
/// i.e. `Im F` for the Cauchy integral `F` whose real part is the layer.
pub(crate) fn conjugate_of_layer(g: &BoundaryGrid, mu: &[f64]) -> Vec<f64> {
    let n = g.len();
    let dmu = spectral::derivative(mu);
    let inv_n = 1.0 / n as f64;
    (0..n)
        .map(|i| {
            let zi = g.p[i];
            let mut acc = dmu[i];
            for j in 0..n {
                if j == i {
                    continue;
                }
                // Re[(mu_j - mu_i) z'_j / (z_j - z_i)].
                let dz = g.p[j] - zi;
                let num = g.dp[j];
                let re = (num.x * dz.x + num.y * dz.y) / dz.norm_sq();
                acc += (mu[j] - mu[i]) * re;
            }
            acc * inv_n
        })
        .collect()
}
