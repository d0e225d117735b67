//! Confinement energies: exact disk values, an area-quadrature cross-check of
//! the boundary-integral reduction, core-radius convergence and minimizers.

use std::f64::consts::{PI, TAU};

use dislab::confinement::{
    epsilon_convergence_study, gamma_limit_f, minimize_f, regularized_e_eps, SearchOptions, SingularField,
};
use dislab::harmonic::{
    energy_quadrature, solve_dirichlet, solve_punctured_mixed, BoundaryData, DirichletProblem, PuncturedMixedProblem,
    QuadratureRegion,
};
use dislab::{BoundaryDatum, Curve, DatumSpec, Domain, Error, Vec2};
use proptest::prelude::*;

struct Relative(BoundaryDatum, Vec2);

impl BoundaryData for Relative {
    fn sample(&self, t: &[f64], p: &[Vec2]) -> Vec<f64> {
        self.0.relative_datum(self.1, t, p)
    }
}

fn uniform(domain: &Domain) -> BoundaryDatum {
    BoundaryDatum::new(domain, DatumSpec::Uniform).unwrap()
}

/// With the uniform datum the disk limit is `-pi log(1 - |a|^2)`: the disk
/// automorphism moving `a` to the centre carries `theta_0` to `theta_a` up to
/// a harmonic correction whose energy gives exactly this term.
fn disk_limit(a: Vec2) -> f64 {
    -PI * (1.0 - a.norm_sq()).ln()
}

#[test]
fn disk_limit_matches_closed_form() {
    let d = uniform(&Domain::UnitDisk);
    for a in [Vec2::new(0.2, 0.0), Vec2::new(0.0, -0.45), Vec2::new(0.6, 0.6), Vec2::new(0.95, 0.0), Vec2::new(-0.99, 0.0)] {
        let f = gamma_limit_f(&Domain::UnitDisk, &d, a).unwrap().f_limit.unwrap();
        assert!((f - disk_limit(a)).abs() < 1e-10 * (1.0 + f), "{a:?}: {f} vs {}", disk_limit(a));
    }
}

#[test]
fn boundary_integrals_match_area_quadrature() {
    let domain = Domain::UnitDisk;
    let datum = uniform(&domain);
    let a = Vec2::new(0.3, 0.1);
    let d1 = domain.boundary_distance(a).unwrap();
    let v = solve_dirichlet(&DirichletProblem::new(domain.clone(), Relative(datum.clone(), a)).with_tolerance(1e-12)).unwrap();
    let k = SingularField::new(a);
    let outer = energy_quadrature(
        |x| k.eval(x) + v.gradient(x),
        &QuadratureRegion::StarShaped { domain: domain.clone(), center: a, inner: d1 },
        1e-10,
        2_000_000,
    )
    .unwrap();
    let inner = energy_quadrature(|x| v.gradient(x), &QuadratureRegion::Annulus { center: a, inner: 0.0, outer: d1 }, 1e-10, 2_000_000).unwrap();
    let by_area = PI * d1.ln() + outer.value + inner.value;
    let f = gamma_limit_f(&domain, &datum, a).unwrap().f_limit.unwrap();
    assert!((by_area - f).abs() < 1e-7, "{by_area} vs {f}");
}

#[test]
fn regularized_energy_converges_on_the_disk() {
    let domain = Domain::UnitDisk;
    let datum = uniform(&domain);
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let probes = [Vec2::ZERO, Vec2::new(0.2, 0.0), Vec2::new(0.4, 0.0), Vec2::new(0.6, 0.0)];
    let rows = epsilon_convergence_study(&domain, &datum, &probes, &eps).unwrap();
    for (p, chunk) in probes.iter().zip(rows.chunks(eps.len())) {
        if p.norm() == 0.0 {
            assert!(chunk.iter().all(|r| r.f_eps.abs() < 1e-10 && r.f_limit.abs() < 1e-10));
            continue;
        }
        for w in chunk.windows(2) {
            assert!(w[1].difference < w[0].difference, "{p:?}: {chunk:?}");
            // The hole perturbs the energy at order eps^2.
            assert!((w[0].difference / w[1].difference - 4.0).abs() < 0.2);
        }
    }
    for e in eps {
        let r = regularized_e_eps(&domain, &datum, Vec2::ZERO, e).unwrap();
        assert!((r.e_eps.unwrap() - PI * (1.0 / e).ln()).abs() < 1e-10);
    }
}

#[test]
fn regularized_energy_converges_on_an_ellipse() {
    let domain = Domain::parametric(Curve::Ellipse { a: 1.5, b: 1.0 }).unwrap();
    let datum = uniform(&domain);
    let rows = epsilon_convergence_study(&domain, &datum, &[Vec2::new(0.4, 0.2)], &[0.1, 0.05, 0.025]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].difference < w[0].difference, "{rows:?}");
    }
    assert!(rows[2].difference < 1e-2);
}

#[test]
fn circulation_around_the_core_is_two_pi() {
    let domain = Domain::UnitDisk;
    let a = Vec2::new(0.5, -0.2);
    let eps = 0.05;
    let mut p = PuncturedMixedProblem::new(domain.clone(), a, eps, Relative(uniform(&domain), a));
    p.requested_tolerance = 1e-11;
    let w = solve_punctured_mixed(&p).unwrap();
    let k = SingularField::new(a);
    for r in [0.06, 0.1, 0.2] {
        let n = 256;
        let c: f64 = (0..n)
            .map(|j| {
                let e = Vec2::from_polar(1.0, TAU * j as f64 / n as f64);
                let x = a + e * r;
                (k.eval(x) + w.gradient(x)).dot(e.perp()) * r
            })
            .sum::<f64>()
            * TAU
            / n as f64;
        assert!((c - TAU).abs() < 1e-9, "r = {r}: {c}");
    }
}

#[test]
fn minimizers() {
    let domain = Domain::UnitDisk;
    let m = minimize_f(&domain, &uniform(&domain), &SearchOptions::default()).unwrap();
    assert!(m.a.norm() < 1e-4);
    assert!(m.value.abs() < 1e-8);
    assert!(m.certificate.holds && m.certificate.interiority >= 0.5);

    let star = Vec2::new(0.3, 0.0);
    let shifted = BoundaryDatum::new(&domain, DatumSpec::ShiftedVortex { center: star }).unwrap();
    let m = minimize_f(&domain, &shifted, &SearchOptions::default()).unwrap();
    let f_star = gamma_limit_f(&domain, &shifted, star).unwrap().f_limit.unwrap();
    assert!(m.value <= f_star + 1e-9);
    assert!((m.a - star).norm() < 1e-3);
}

#[test]
fn blow_up_towards_the_boundary() {
    let domain = Domain::UnitDisk;
    let datum = uniform(&domain);
    let f = |r: f64| gamma_limit_f(&domain, &datum, Vec2::new(r, 0.0)).unwrap().f_limit.unwrap();
    let sweep: Vec<f64> = [0.5, 0.8, 0.9, 0.95, 0.99, 0.999].iter().map(|r| f(*r)).collect();
    assert!(sweep.windows(2).all(|w| w[1] > w[0]));
    assert!(sweep[5] > f(0.0) + 10.0);
}

#[test]
fn incompatible_circulation() {
    let e = BoundaryDatum::new(&Domain::UnitDisk, DatumSpec::Fourier { cos: vec![0.0], sin: vec![] });
    assert!(matches!(e, Err(Error::IncompatibleDatum { .. })));
    let domain = Domain::parametric(Curve::Ellipse { a: 2.0, b: 1.0 }).unwrap();
    let e = BoundaryDatum::new(&domain, DatumSpec::Fourier { cos: vec![1.0], sin: vec![] });
    assert!(matches!(e, Err(Error::IncompatibleDatum { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn limit_is_rotation_invariant_on_the_disk(r in 0.0f64..0.9, phi in 0.0f64..TAU) {
        let d = uniform(&Domain::UnitDisk);
        let f = gamma_limit_f(&Domain::UnitDisk, &d, Vec2::from_polar(r, phi)).unwrap().f_limit.unwrap();
        prop_assert!((f - disk_limit(Vec2::new(r, 0.0))).abs() < 1e-10 * (1.0 + f));
    }

    #[test]
    fn regularized_never_exceeds_limit(r in 0.0f64..0.7, phi in 0.0f64..TAU, eps in 0.01f64..0.2) {
        let d = uniform(&Domain::UnitDisk);
        let a = Vec2::from_polar(r, phi);
        prop_assume!(eps < 1.0 - r);
        let fe = regularized_e_eps(&Domain::UnitDisk, &d, a, eps).unwrap().f_eps.unwrap();
        let f = gamma_limit_f(&Domain::UnitDisk, &d, a).unwrap().f_limit.unwrap();
        prop_assert!(fe <= f + 1e-9);
    }
}
