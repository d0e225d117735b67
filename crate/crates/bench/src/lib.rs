//! Shared fixtures for the criterion benches.

use dislab::{Curve, DislocationSystem, Domain, Vec2};

/// The 2:1 ellipse used as the curved test domain.
pub fn ellipse() -> Domain {
    Domain::parametric(Curve::Ellipse { a: 2.0, b: 1.0 }).expect("valid ellipse")
}

/// Three dislocations well inside both the unit disk and the ellipse.
pub fn three_dislocations() -> DislocationSystem {
    DislocationSystem::new(vec![Vec2::new(0.3, 0.1), Vec2::new(-0.2, 0.4), Vec2::new(0.1, -0.5)], vec![1, -1, 1])
}
