//! Laplace solvers: Dirichlet problems on bounded smooth domains and the
//! mixed problem on a domain with a small disk removed.

mod nystrom;
mod punctured;
mod quadrature;
pub mod spectral;

use std::sync::Arc;

pub use nystrom::{BoundaryGrid, HarmonicFunction, NystromDirichlet};
pub(crate) use nystrom::LayerDensities;
pub use punctured::{AnnulusSolution, CollocationSolution};
pub use quadrature::{energy_quadrature, QuadratureRegion, QuadratureResult};

use crate::geometry::Domain;
use crate::{Error, Result, Vec2};

const MAX_DIRICHLET_NODES: usize = 2048;

/// Boundary values sampled along the boundary. `t` is increasing and may run
/// past `2 pi`, so multivalued data can be unwrapped along the sequence.
pub trait BoundaryData: Send + Sync {
    fn sample(&self, t: &[f64], p: &[Vec2]) -> Vec<f64>;
}

impl<F> BoundaryData for F
where
    F: Fn(f64, Vec2) -> f64 + Send + Sync,
{
    fn sample(&self, t: &[f64], p: &[Vec2]) -> Vec<f64> {
        t.iter().zip(p).map(|(t, p)| self(*t, *p)).collect()
    }
}

/// Tolerance used when a problem does not set one.
pub fn default_tolerance(domain: &Domain) -> f64 {
    match domain {
        Domain::Parametric(_) => 1e-6,
        _ => 1e-8,
    }
}

#[derive(Clone)]
pub struct DirichletProblem {
    pub domain: Domain,
    pub boundary_data: Arc<dyn BoundaryData>,
    pub requested_tolerance: f64,
}

impl DirichletProblem {
    pub fn new(domain: Domain, data: impl BoundaryData + 'static) -> Self {
        let requested_tolerance = default_tolerance(&domain);
        Self { domain, boundary_data: Arc::new(data), requested_tolerance }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.requested_tolerance = tol;
        self
    }
}

fn max_jump(v: &[f64]) -> f64 {
    let n = v.len();
    (0..n).map(|i| (v[(i + 1) % n] - v[i]).abs()).fold(0.0, f64::max)
}

pub fn solve_dirichlet(problem: &DirichletProblem) -> Result<HarmonicFunction> {
    let domain = &problem.domain;
    if !domain.is_bounded() {
        return Err(Error::UnboundedDomain);
    }
    let base = domain.kernel_solver()?;
    let tol = problem.requested_tolerance;
    let mut n = base.n();
    let mut prev_jump = f64::INFINITY;
    let data = loop {
        let solver = domain.solver_with_nodes(n)?;
        let grid = solver.grid();
        let data = problem.boundary_data.sample(&grid.t, &grid.p);
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite boundary data".into()));
        }
        let scale = data.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let tail = spectral::tail_estimate(&data);
        let jump = max_jump(&data);
        if tail <= tol * scale {
            break data;
        }
        if n >= MAX_DIRICHLET_NODES {
            if jump > 0.75 * prev_jump {
                return Err(Error::InvalidArgument(format!(
                    "boundary data appears discontinuous (adjacent jump {jump:.3e} does not shrink with refinement)"
                )));
            }
            log::warn!("boundary data unresolved at {n} nodes (tail {tail:.2e})");
            break data;
        }
        prev_jump = jump;
        n *= 2;
    };
    domain.solver_with_nodes(n)?.solve(&data)
}

#[derive(Clone)]
pub struct PuncturedMixedProblem {
    pub domain: Domain,
    pub core_center: Vec2,
    pub core_radius: f64,
    pub outer_dirichlet_data: Arc<dyn BoundaryData>,
    pub requested_tolerance: f64,
}

impl PuncturedMixedProblem {
    pub fn new(domain: Domain, core_center: Vec2, core_radius: f64, data: impl BoundaryData + 'static) -> Self {
        let requested_tolerance = default_tolerance(&domain);
        Self {
            domain,
            core_center,
            core_radius,
            outer_dirichlet_data: Arc::new(data),
            requested_tolerance,
        }
    }
}

/// Harmonic `w` on `Omega minus B_eps(a)` with zero normal derivative on the hole.
#[allow(clippy::large_enum_variant)]
pub enum PuncturedHarmonic {
    Annulus(AnnulusSolution),
    Collocation(CollocationSolution),
}

impl PuncturedHarmonic {
    pub fn value_and_gradient(&self, z: Vec2) -> (f64, Vec2) {
        match self {
            Self::Annulus(s) => s.value_and_gradient(z),
            Self::Collocation(s) => s.value_and_gradient(z),
        }
    }

    pub fn value(&self, z: Vec2) -> f64 {
        self.value_and_gradient(z).0
    }

    pub fn gradient(&self, z: Vec2) -> Vec2 {
        self.value_and_gradient(z).1
    }

    /// `integral over the punctured domain of |grad w|^2`.
    pub fn dirichlet_energy(&self) -> f64 {
        match self {
            Self::Annulus(s) => s.dirichlet_energy(),
            Self::Collocation(s) => s.dirichlet_energy(),
        }
    }

    pub fn error_estimate(&self) -> f64 {
        match self {
            Self::Annulus(s) => s.error_estimate,
            Self::Collocation(s) => s.error_estimate,
        }
    }
}

pub fn solve_punctured_mixed(problem: &PuncturedMixedProblem) -> Result<PuncturedHarmonic> {
    let a = problem.core_center;
    let eps = problem.core_radius;
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("core radius {eps}")));
    }
    if !problem.domain.is_bounded() {
        return Err(Error::UnboundedDomain);
    }
    if !problem.domain.contains(a) {
        return Err(Error::OutsideDomain(a));
    }
    let d1 = problem.domain.boundary_distance(a)?;
    if eps >= d1 {
        return Err(Error::CoreTouchesBoundary { epsilon: eps, distance: d1 });
    }
    let data = problem.outer_dirichlet_data.as_ref();
    match &problem.domain {
        Domain::UnitDisk => Ok(PuncturedHarmonic::Annulus(AnnulusSolution::new(
            a,
            eps,
            data,
            problem.requested_tolerance,
        )?)),
        Domain::Parametric(_) => {
            let solver = problem.domain.kernel_solver()?;
            Ok(PuncturedHarmonic::Collocation(CollocationSolution::new(solver, a, eps, d1, data)?))
        }
        _ => Err(Error::UnboundedDomain),
    }
}
