use crate::Vec2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain has no boundary")]
    NoBoundary,
    #[error("configuration is empty or too small (need at least {needed} points, got {got})")]
    EmptyConfiguration { needed: usize, got: usize },
    #[error("point ({}, {}) is not strictly inside the domain", .0.x, .0.y)]
    OutsideDomain(Vec2),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("region is empty or too thin: acceptance rate {rate:.3e} after {attempts} attempts")]
    RegionEmptyOrThin { rate: f64, attempts: u64 },
    #[error("sampling an unbounded domain requires an explicit window")]
    UnboundedRegion,
    #[error("operation requires a bounded domain")]
    UnboundedDomain,
    #[error("solver failed to converge: {0}")]
    SolverDiverged(String),
    #[error("core radius {epsilon} does not fit inside the domain (distance to boundary {distance})")]
    CoreTouchesBoundary { epsilon: f64, distance: f64 },
    #[error("adaptive quadrature exhausted its budget of {budget} evaluations (estimated error {error:.3e})")]
    QuadratureStalled { budget: usize, error: f64 },
    #[error("coincident points")]
    CoincidentPoints,
    #[error("dislocations {0} and {1} coincide")]
    CoincidentDislocations(usize, usize),
    #[error("finite-difference step {0} leaves the admissible set")]
    StepTooLarge(f64),
    #[error("step size fell below {min_step:e} at t = {t} before an event could be certified")]
    StiffnessBudgetExceeded { t: f64, min_step: f64 },
    #[error("invalid initial condition: {0}")]
    InvalidInitial(String),
    #[error("initial configuration is outside the regime: {0}")]
    NotInRegime(String),
    #[error("bound denominator {0} is not positive")]
    NonpositiveDenominator(f64),
    #[error("need at least {needed} samples near the boundary, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("boundary datum has circulation {circulation}, expected 2*pi")]
    IncompatibleDatum { circulation: f64 },
    #[error("minimization did not converge within {0} evaluations")]
    SearchBudgetExceeded(usize),
    #[error("no interior equilibrium found: {0}")]
    EquilibriumNotFound(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
