//! Gradient-flow integration against closed-form collision times, flow
//! invariants and the collision-time bounds.

use std::f64::consts::{PI, TAU};

use dislab::dynamics::{
    find_equilibrium, fit_boundary_coefficient, incidence_angle, integrate, predict_boundary_collision,
    predict_dipole_collision, CollisionPolicy, EventKind, IntegrateOptions,
};
use dislab::energy::renormalized_energy;
use dislab::geometry::{sample_interior, SamplingRegion};
use dislab::{Curve, DislocationSystem, Domain, Error, Vec2};
use proptest::prelude::*;

fn disk_time(r0: f64) -> f64 {
    2.0 * PI * (r0 * r0 / 2.0 - r0.ln() - 0.5)
}

fn first_time(domain: &Domain, sys: &DislocationSystem, opts: &IntegrateOptions) -> f64 {
    integrate(domain, sys, 100.0, opts).unwrap().first_event().unwrap().time
}

#[test]
fn closed_form_collision_times() {
    let opts = IntegrateOptions::default();
    let t = first_time(&Domain::UnitDisk, &DislocationSystem::single(Vec2::new(0.8, 0.0), 1), &opts);
    assert!((t - 0.271_08).abs() < 1e-5);
    assert!((t - disk_time(0.8)).abs() < 1e-5 * disk_time(0.8));

    let tr = integrate(&Domain::HalfPlane, &DislocationSystem::single(Vec2::new(0.0, 0.5), 1), 10.0, &opts).unwrap();
    let ev = tr.first_event().unwrap();
    assert!((ev.time - PI / 2.0).abs() < 1e-6);
    assert!(matches!(ev.kind, EventKind::BoundaryHit { point, .. } if point.norm() < 1e-12));

    let t = first_time(&Domain::FullPlane, &DislocationSystem::dipole(Vec2::new(0.05, 0.0), Vec2::new(-0.05, 0.0)), &opts);
    assert!((t - 0.015_708).abs() < 1e-6);
}

#[test]
fn event_time_is_localized() {
    let opts = IntegrateOptions::default();
    let tr = integrate(&Domain::UnitDisk, &DislocationSystem::single(Vec2::new(0.8, 0.0), 1), 10.0, &opts).unwrap();
    let ev = tr.first_event().unwrap();
    // The crossing state sits outside the hit threshold by at most one
    // bracket width of travel.
    let last = tr.states.last().unwrap().z[0];
    let speed = tr.velocities.last().unwrap()[0].norm();
    let d = 1.0 - last.norm();
    let eb = opts.boundary_threshold(&Domain::UnitDisk);
    assert!(d >= eb && d - eb <= 2.0 * speed * opts.event_time_tolerance, "{d} {eb}");
    assert!((ev.remainder - 2.0 * PI * d * d).abs() < 1e-15);
    assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn tighter_tolerance_reduces_the_error() {
    let sys = DislocationSystem::single(Vec2::new(0.8, 0.0), 1);
    let errs: Vec<f64> = [1e-4, 1e-6]
        .iter()
        .map(|&rtol| {
            // No time-scale cap, so the error controller alone sets the steps.
            let opts = IntegrateOptions { rtol, atol: rtol * 1e-2, step_fraction: f64::INFINITY, ..Default::default() };
            let tr = integrate(&Domain::UnitDisk, &sys, 10.0, &opts).unwrap();
            let r_end = tr.states.last().unwrap().z[0].norm();
            (tr.first_event().unwrap().crossing_time - (disk_time(0.8) - disk_time(r_end))).abs()
        })
        .collect();
    assert!(errs[1] < 0.1 * errs[0], "{errs:?}");
}

#[test]
fn energy_decreases_and_speed_matches_force() {
    let sys = DislocationSystem::new(vec![Vec2::new(0.3, 0.2), Vec2::new(-0.4, 0.1), Vec2::new(0.1, -0.5)], vec![1, -1, 1]);
    let tr = integrate(&Domain::UnitDisk, &sys, 10.0, &IntegrateOptions::default()).unwrap();
    let energies: Vec<f64> = tr.states.iter().map(|s| renormalized_energy(&Domain::UnitDisk, s).unwrap()).collect();
    for w in energies.windows(2) {
        assert!(w[1] <= w[0] + 1e-10, "{} -> {}", w[0], w[1]);
    }
    for (s, v) in tr.states.iter().zip(&tr.velocities) {
        let f = dislab::energy::peach_koehler(&Domain::UnitDisk, s, None).unwrap().f;
        for (a, b) in f.iter().zip(v) {
            assert!((a.norm() - b.norm()).abs() <= 1e-12 * (1.0 + a.norm()));
        }
    }
}

#[test]
fn first_event_in_the_boundary_regime_is_a_boundary_hit() {
    let set = sample_interior(&Domain::UnitDisk, SamplingRegion::D { n: 2, delta: 0.2, gamma: 0.5 }, 40, 11, None).unwrap();
    for z in set.configurations {
        let sys = DislocationSystem::new(z, vec![1, -1]);
        let tr = integrate(&Domain::UnitDisk, &sys, 10.0, &IntegrateOptions::default()).unwrap();
        let ev = tr.first_event().unwrap();
        assert!(matches!(ev.kind, EventKind::BoundaryHit { index: 0, .. }), "{:?}", ev.kind);
        let last = tr.states.last().unwrap();
        assert!(Domain::UnitDisk.contains(last.z[1]));
    }
}

#[test]
fn half_plane_incidence_is_perpendicular() {
    let tr = integrate(&Domain::HalfPlane, &DislocationSystem::single(Vec2::new(3.0, 0.2), 1), 10.0, &IntegrateOptions::default()).unwrap();
    let ev = tr.first_event().unwrap();
    assert!(incidence_angle(&Domain::HalfPlane, &tr, ev).unwrap() < 1e-6);
}

#[test]
fn insufficient_samples_are_reported() {
    let opts = IntegrateOptions { max_step: f64::INFINITY, step_fraction: 100.0, ..Default::default() };
    let tr = integrate(&Domain::HalfPlane, &DislocationSystem::single(Vec2::new(0.0, 5e-4), 1), 10.0, &opts).unwrap();
    let ev = tr.first_event().unwrap();
    let r = incidence_angle(&Domain::HalfPlane, &tr, ev);
    assert!(matches!(r, Err(Error::InsufficientSamples { .. })) || r.unwrap() < 1e-6);
}

#[test]
fn boundary_collision_coefficient() {
    let opts = IntegrateOptions::default();
    let samples: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&d| (d, first_time(&Domain::UnitDisk, &DislocationSystem::single(Vec2::new(1.0 - d, 0.0), 1), &opts)))
        .collect();
    let (c, ratios) = fit_boundary_coefficient(&samples).unwrap();
    assert!((ratios[2] / (2.0 * PI) - 1.0).abs() < 0.05);
    // T(delta) = 2 pi (delta^2 + delta^3/3 + ...).
    assert!((c - 2.0 * PI / 3.0).abs() < 0.3, "{c}");
    let half = predict_boundary_collision(&Domain::HalfPlane, &DislocationSystem::single(Vec2::new(0.0, 0.1), 1), 0.1 + 1e-12, 0.5, None, &opts).unwrap();
    assert!((half.measured - half.predicted_upper).abs() < 1e-7 * half.predicted_upper);
    assert!(half.satisfied_leading_order || (half.measured - half.predicted_upper).abs() < 1e-9);
}

#[test]
fn dipole_bounds() {
    let opts = IntegrateOptions::default();
    let plane = predict_dipole_collision(
        &Domain::FullPlane,
        &DislocationSystem::dipole(Vec2::new(0.05, 0.0), Vec2::new(-0.05, 0.0)),
        0.1 + 1e-12,
        f64::INFINITY,
        None,
        &opts,
    )
    .unwrap();
    assert!((plane.predicted_upper - 0.015_708).abs() < 1e-6);
    assert!((plane.measured - plane.predicted_upper).abs() < 1e-6);

    let disk = predict_dipole_collision(
        &Domain::UnitDisk,
        &DislocationSystem::dipole(Vec2::new(0.05, 0.0), Vec2::new(-0.05, 0.0)),
        0.12,
        0.5,
        None,
        &opts,
    )
    .unwrap();
    assert!(disk.satisfied_leading_order, "{disk:?}");

    let three = DislocationSystem::new(vec![Vec2::new(0.05, 0.0), Vec2::new(-0.05, 0.0), Vec2::new(0.0, 0.8)], vec![1, -1, 1]);
    assert!(matches!(
        predict_dipole_collision(&Domain::UnitDisk, &three, 0.12, 0.1, None, &opts),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn same_sign_pair_never_collides() {
    let sys = DislocationSystem::new(vec![Vec2::new(0.01, 0.0), Vec2::new(-0.01, 0.0)], vec![1, 1]);
    let opts = IntegrateOptions { on_collision: CollisionPolicy::Annihilate, ..Default::default() };
    let tr = integrate(&Domain::FullPlane, &sys, 1.0, &opts).unwrap();
    assert!(tr.events.is_empty());
}

#[test]
fn smoothed_cardioid_equilibrium_and_axis() {
    let domain = Domain::parametric_with_nodes(Curve::SmoothedCardioid { k: 0.75 }, 256).unwrap();
    let eq = find_equilibrium(&domain, Vec2::new(0.5, 0.0), 1e-10).unwrap();
    assert!(eq.y.abs() < 1e-8);
    let still = integrate(&domain, &DislocationSystem::single(eq, 1), 1.0, &IntegrateOptions::default()).unwrap();
    assert!(still.events.is_empty());
    assert!((still.states.last().unwrap().z[0] - eq).norm() < 1e-6);

    let opts = IntegrateOptions { rtol: 1e-8, atol: 1e-10, ..Default::default() };
    let tr = integrate(&domain, &DislocationSystem::single(eq + Vec2::new(0.1, 0.0), 1), 100.0, &opts).unwrap();
    assert!(tr.states.iter().all(|s| s.z[0].y.abs() < 1e-8));
    let ev = tr.first_event().unwrap();
    assert!(incidence_angle(&domain, &tr, ev).unwrap() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn radial_starts_hit_at_the_closed_form_time(r0 in 0.3f64..0.95, phi in 0.0f64..TAU) {
        let sys = DislocationSystem::single(Vec2::from_polar(r0, phi), 1);
        let t = first_time(&Domain::UnitDisk, &sys, &IntegrateOptions::default());
        prop_assert!((t - disk_time(r0)).abs() <= 1e-5 * disk_time(r0));
    }

    #[test]
    fn plane_dipoles_collide_at_their_midpoint(x in -1.0f64..1.0, y in -1.0f64..1.0, s in 0.01f64..0.3, phi in 0.0f64..TAU) {
        let c = Vec2::new(x, y);
        let e = Vec2::from_polar(0.5 * s, phi);
        let tr = integrate(&Domain::FullPlane, &DislocationSystem::dipole(c + e, c - e), 10.0, &IntegrateOptions::default()).unwrap();
        let ev = tr.first_event().unwrap();
        prop_assert!((ev.time - PI * s * s / 2.0).abs() <= 1e-6 * (PI * s * s / 2.0).max(1e-3));
        let EventKind::DipoleCollision { location, .. } = ev.kind else { panic!() };
        prop_assert!((location - c).norm() < 1e-10);
    }
}
