//! Renormalized energy of a dislocation system and Peach-Koehler forces.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::Domain;
use crate::greens::{self, NumericSource};
use crate::{Error, Result, Vec2};

const INV_2PI: f64 = 0.5 / PI;

/// Positions and Burgers moduli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DislocationSystem {
    pub z: Vec<Vec2>,
    pub b: Vec<i32>,
}

impl DislocationSystem {
    pub fn new(z: Vec<Vec2>, b: Vec<i32>) -> Self {
        Self { z, b }
    }

    pub fn single(z: Vec2, b: i32) -> Self {
        Self { z: vec![z], b: vec![b] }
    }

    /// `+1` at `z1`, `-1` at `z2`.
    pub fn dipole(z1: Vec2, z2: Vec2) -> Self {
        Self { z: vec![z1, z2], b: vec![1, -1] }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Checks the system invariants against `domain`.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        if self.z.is_empty() {
            return Err(Error::EmptyConfiguration { needed: 1, got: 0 });
        }
        if self.z.len() != self.b.len() {
            return Err(Error::InvalidArgument(format!(
                "{} positions but {} Burgers moduli",
                self.z.len(),
                self.b.len()
            )));
        }
        if let Some(b) = self.b.iter().find(|b| **b == 0) {
            return Err(Error::InvalidArgument(format!("Burgers modulus {b}")));
        }
        for z in &self.z {
            if !domain.contains(*z) {
                return Err(Error::OutsideDomain(*z));
            }
        }
        for i in 0..self.z.len() {
            for j in i + 1..self.z.len() {
                if self.z[i] == self.z[j] {
                    return Err(Error::CoincidentDislocations(i, j));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceReport {
    pub f: Vec<Vec2>,
    /// `nu(s) / (4 pi d_1)` for the dislocation singled out by the caller.
    pub leading_term: Option<Vec2>,
    /// `f_i - leading_term`.
    pub residual: Option<Vec2>,
    /// Zero for image-formula domains.
    pub error_estimate: f64,
}

/// Kernel data needed by the energy and forces.
struct Terms {
    /// `k(z_i, z_j)` and its gradient in the first slot, row `i`.
    k: Vec<Vec<(f64, Vec2)>>,
    h: Vec<(f64, Vec2)>,
    error: f64,
}

fn terms(domain: &Domain, sys: &DislocationSystem, need_k: bool) -> Result<Terms> {
    let n = sys.len();
    let mut k = vec![vec![(0.0, Vec2::ZERO); n]; n];
    let mut h = vec![(0.0, Vec2::ZERO); n];
    let mut error = 0.0f64;
    match domain {
        Domain::Parametric(_) => {
            // One solve per source gives a whole column of k and h at the source.
            for j in 0..n {
                let src = NumericSource::new(domain, sys.z[j], true)?;
                let hj = src.h();
                h[j] = (hj.value, hj.gradient_x);
                error = error.max(hj.error_estimate);
                if need_k {
                    for i in 0..n {
                        if i != j {
                            let e = src.k_at(sys.z[i]);
                            k[i][j] = (e.value, e.gradient_x);
                        }
                    }
                }
            }
        }
        _ => {
            for i in 0..n {
                let e = greens::h_omega(domain, sys.z[i])?;
                h[i] = (e.value, e.gradient_x);
                if need_k {
                    for j in 0..n {
                        if i != j {
                            let e = greens::k_omega(domain, sys.z[i], sys.z[j])?;
                            k[i][j] = (e.value, e.gradient_x);
                        }
                    }
                }
            }
        }
    }
    Ok(Terms { k, h, error })
}

/// `E = sum_{i<j} b_i b_j (k(z_i, z_j) - (1/2pi) log|z_i - z_j|) + (1/2) sum_i b_i^2 h(z_i)`.
pub fn renormalized_energy(domain: &Domain, sys: &DislocationSystem) -> Result<f64> {
    sys.validate(domain)?;
    let t = terms(domain, sys, sys.len() > 1)?;
    Ok(energy_from(sys, &t))
}

fn energy_from(sys: &DislocationSystem, t: &Terms) -> f64 {
    let n = sys.len();
    let mut e = 0.0;
    for i in 0..n {
        let bi = sys.b[i] as f64;
        e += 0.5 * bi * bi * t.h[i].0;
        for j in i + 1..n {
            let bb = bi * sys.b[j] as f64;
            let kij = 0.5 * (t.k[i][j].0 + t.k[j][i].0);
            e += bb * (kij - INV_2PI * (sys.z[i] - sys.z[j]).norm().ln());
        }
    }
    e
}

fn forces_from(sys: &DislocationSystem, t: &Terms) -> Vec<Vec2> {
    let n = sys.len();
    (0..n)
        .map(|i| {
            let bi = sys.b[i] as f64;
            let mut f = t.h[i].1 * (-0.5 * bi * bi);
            for j in 0..n {
                if j != i {
                    let r = sys.z[i] - sys.z[j];
                    let bb = bi * sys.b[j] as f64;
                    f -= (t.k[i][j].1 - r * (INV_2PI / r.norm_sq())) * bb;
                }
            }
            f
        })
        .collect()
}

/// Peach-Koehler forces `f_i = -grad_{z_i} E`. With `near_boundary = Some(i)`
/// the report also splits `f_i` into the boundary term `nu/(4 pi d_1)` and a residual.
pub fn peach_koehler(domain: &Domain, sys: &DislocationSystem, near_boundary: Option<usize>) -> Result<ForceReport> {
    sys.validate(domain)?;
    let t = terms(domain, sys, sys.len() > 1)?;
    let f = forces_from(sys, &t);
    let (leading_term, residual) = match near_boundary {
        Some(i) if i >= sys.len() => {
            return Err(Error::InvalidArgument(format!("no dislocation with index {i}")));
        }
        Some(i) => {
            let cp = domain.closest_boundary_point(sys.z[i])?;
            let lead = cp.point.nu / (4.0 * PI * cp.distance);
            (Some(lead), Some(f[i] - lead))
        }
        None => (None, None),
    };
    Ok(ForceReport { f, leading_term, residual, error_estimate: t.error })
}

/// Energy and forces together, sharing the kernel solves.
pub fn energy_and_forces(domain: &Domain, sys: &DislocationSystem) -> Result<(f64, Vec<Vec2>)> {
    sys.validate(domain)?;
    let t = terms(domain, sys, sys.len() > 1)?;
    Ok((energy_from(sys, &t), forces_from(sys, &t)))
}

/// Central differences of `-E` in every coordinate.
pub fn finite_difference_gradient(domain: &Domain, sys: &DislocationSystem, step: f64) -> Result<Vec<Vec2>> {
    sys.validate(domain)?;
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step {step}")));
    }
    let eval = |i: usize, dir: Vec2| -> Result<f64> {
        let mut moved = sys.clone();
        moved.z[i] += dir;
        match moved.validate(domain) {
            Ok(()) => {}
            Err(Error::OutsideDomain(_)) | Err(Error::CoincidentDislocations(..)) => {
                return Err(Error::StepTooLarge(step));
            }
            Err(e) => return Err(e),
        }
        renormalized_energy(domain, &moved)
    };
    (0..sys.len())
        .map(|i| {
            let ex = Vec2::new(step, 0.0);
            let ey = Vec2::new(0.0, step);
            let gx = (eval(i, ex)? - eval(i, -ex)?) / (2.0 * step);
            let gy = (eval(i, ey)? - eval(i, -ey)?) / (2.0 * step);
            Ok(Vec2::new(-gx, -gy))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_disk_energy_and_force() {
        let sys = DislocationSystem::single(Vec2::new(0.6, 0.0), 1);
        let e = renormalized_energy(&Domain::UnitDisk, &sys).unwrap();
        assert_abs_diff_eq!(e, 0.64f64.ln() / (4.0 * PI), epsilon = 1e-15);
        let f = peach_koehler(&Domain::UnitDisk, &sys, None).unwrap();
        assert_abs_diff_eq!(f.f[0].x, 0.6 / (2.0 * PI * 0.64), epsilon = 1e-15);
        assert_eq!(f.error_estimate, 0.0);
        let centered = DislocationSystem::single(Vec2::ZERO, 1);
        assert_eq!(renormalized_energy(&Domain::UnitDisk, &centered).unwrap(), 0.0);
        assert_eq!(peach_koehler(&Domain::UnitDisk, &centered, None).unwrap().f[0], Vec2::ZERO);
    }

    #[test]
    fn plane_dipole() {
        let sys = DislocationSystem::dipole(Vec2::new(0.05, 0.0), Vec2::new(-0.05, 0.0));
        let e = renormalized_energy(&Domain::FullPlane, &sys).unwrap();
        assert_abs_diff_eq!(e, -(-(0.1f64.ln()) / (2.0 * PI)), epsilon = 1e-15);
        let f = peach_koehler(&Domain::FullPlane, &sys, None).unwrap().f;
        assert_abs_diff_eq!((f[0] + f[1]).norm(), 0.0, epsilon = 1e-15);
        // Opposite charges attract.
        assert!(f[0].x < 0.0);
    }

    #[test]
    fn half_plane_energy_splits_exactly() {
        let d = 0.37;
        let sys = DislocationSystem::single(Vec2::new(1.5, d), -1);
        let r = peach_koehler(&Domain::HalfPlane, &sys, Some(0)).unwrap();
        assert_abs_diff_eq!(r.f[0].y, -1.0 / (4.0 * PI * d), epsilon = 1e-15);
        assert!(r.residual.unwrap().norm() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        let d = Domain::UnitDisk;
        let empty = DislocationSystem::new(vec![], vec![]);
        assert!(matches!(renormalized_energy(&d, &empty), Err(Error::EmptyConfiguration { .. })));
        let same = DislocationSystem::dipole(Vec2::new(0.1, 0.0), Vec2::new(0.1, 0.0));
        assert!(matches!(renormalized_energy(&d, &same), Err(Error::CoincidentDislocations(0, 1))));
        let out = DislocationSystem::single(Vec2::new(0.0, 1.2), 1);
        assert!(matches!(peach_koehler(&d, &out, None), Err(Error::OutsideDomain(_))));
        let edge = DislocationSystem::single(Vec2::new(0.0, 1.0 - 1e-4), 1);
        assert!(matches!(finite_difference_gradient(&d, &edge, 1e-3), Err(Error::StepTooLarge(_))));
    }

    #[test]
    fn finite_differences_match() {
        let sys = DislocationSystem::single(Vec2::new(0.6, 0.0), 1);
        let fd = finite_difference_gradient(&Domain::UnitDisk, &sys, 1e-5).unwrap();
        let f = peach_koehler(&Domain::UnitDisk, &sys, None).unwrap().f;
        assert!((fd[0] - f[0]).norm() <= 1e-6 * f[0].norm());
        let sys = DislocationSystem::dipole(Vec2::new(0.05, 0.0), Vec2::new(-0.05, 0.0));
        let fd = finite_difference_gradient(&Domain::FullPlane, &sys, 1e-5).unwrap();
        let f = peach_koehler(&Domain::FullPlane, &sys, None).unwrap().f;
        for i in 0..2 {
            assert!((fd[i] - f[i]).norm() <= 1e-6 * f[i].norm());
        }
        let c = DislocationSystem::single(Vec2::ZERO, 1);
        assert!(finite_difference_gradient(&Domain::UnitDisk, &c, 1e-5).unwrap()[0].norm() <= 1e-8);
    }
}
