//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use dislab::confinement::{DatumSpec, SearchOptions};
use dislab::{Curve, Domain, IntegrateOptions, Vec2};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    Montecarlo,
    Cardioid,
    Confinement,
    GreensProbe,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Montecarlo => "montecarlo",
            Experiment::Cardioid => "cardioid",
            Experiment::Confinement => "confinement",
            Experiment::GreensProbe => "greens-probe",
        }
    }
}

/// Domain as a name (`unit-disk`, `half-plane`, `plane`, `ellipse:a,b`,
/// `cardioid`, `cardioid-smoothed[:k]`) or an explicit curve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub name: Option<String>,
    pub curve: Option<Curve>,
    pub kernel_nodes: Option<usize>,
}

impl DomainSpec {
    pub fn named(name: &str) -> Self {
        Self { name: Some(name.into()), ..Default::default() }
    }

    pub fn build(&self) -> Result<Domain, CliError> {
        let curve = match (&self.name, &self.curve) {
            (Some(_), Some(_)) => return Err(CliError::config("domain: give either `name` or `curve`, not both")),
            (None, None) => return Err(CliError::config("domain: `name` or `curve` is required")),
            (None, Some(c)) => c.clone(),
            (Some(n), None) => {
                let d = Domain::from_name(n).map_err(|e| CliError::config(format!("domain: {e}")))?;
                match (&d, self.kernel_nodes) {
                    (Domain::Parametric(p), Some(_)) => p.curve.clone(),
                    (_, Some(_)) => return Err(CliError::config("domain: kernel_nodes applies to curved domains only")),
                    _ => return Ok(d),
                }
            }
        };
        let nodes = self.kernel_nodes.unwrap_or(dislab::geometry::DEFAULT_KERNEL_NODES);
        Domain::parametric_with_nodes(curve, nodes).map_err(|e| CliError::config(format!("domain: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub positions: Vec<[f64; 2]>,
    pub burgers: Vec<i32>,
    pub t_max: f64,
    #[serde(default = "yes")]
    pub svg: bool,
    /// Boundary-regime parameters `[delta0, gamma0]` for a bound prediction.
    pub boundary_bound: Option<[f64; 2]>,
    /// Dipole-regime parameters `[zeta0, eta0]` (and `delta0` for n > 2).
    pub dipole_bound: Option<[f64; 2]>,
    pub dipole_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub runs: usize,
    pub n: usize,
    pub burgers: Vec<i32>,
    pub delta: f64,
    pub gamma: f64,
    pub t_max: f64,
    pub bins: usize,
    /// Write every state of every run to `trajectories.csv`.
    pub trajectories: bool,
    /// Points kept per path in the superposition plot.
    pub svg_points: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            runs: 5000,
            n: 2,
            burgers: vec![1, -1],
            delta: 0.2,
            gamma: 0.5,
            t_max: 20.0,
            bins: 50,
            trajectories: true,
            svg_points: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CardioidConfig {
    pub starts: usize,
    pub radius: f64,
    pub t_max: f64,
    /// Angles above this (degrees) are flagged.
    pub angle_threshold: f64,
    pub equilibrium_guess: [f64; 2],
    pub equilibrium_tolerance: f64,
}

impl Default for CardioidConfig {
    fn default() -> Self {
        Self {
            starts: 80,
            radius: 0.1,
            t_max: 200.0,
            angle_threshold: 5.0,
            equilibrium_guess: [0.5, 0.0],
            equilibrium_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfinementConfig {
    pub datum: DatumSpec,
    pub epsilons: Vec<f64>,
    pub probes: Vec<[f64; 2]>,
    pub search: SearchOptions,
    /// Also minimize `F_eps` for every core radius.
    pub per_epsilon_minimizers: bool,
    /// Lattice size for the per-radius minimizers.
    pub per_epsilon_grid: usize,
}

impl Default for ConfinementConfig {
    fn default() -> Self {
        Self {
            datum: DatumSpec::Uniform,
            epsilons: vec![0.1, 0.05, 0.025, 0.0125],
            probes: vec![[0.0, 0.0], [0.2, 0.0], [0.4, 0.0], [0.6, 0.0]],
            search: SearchOptions::default(),
            per_epsilon_minimizers: false,
            per_epsilon_grid: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// `[x1, x2, y1, y2]`: evaluation point `x` and source `y`.
    pub pairs: Vec<[f64; 4]>,
    #[serde(default = "comma")]
    pub delimiter: char,
}

fn yes() -> bool {
    true
}

fn comma() -> char {
    ','
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub domain: DomainSpec,
    #[serde(default)]
    pub integrator: IntegrateOptions,
    pub simulate: Option<SimulateConfig>,
    pub montecarlo: Option<MonteCarloConfig>,
    pub cardioid: Option<CardioidConfig>,
    pub confinement: Option<ConfinementConfig>,
    pub probe: Option<ProbeConfig>,
}

fn default_seed() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn new(domain: DomainSpec) -> Self {
        Self {
            experiment: None,
            seed: default_seed(),
            output_dir: None,
            threads: None,
            domain,
            integrator: IntegrateOptions::default(),
            simulate: None,
            montecarlo: None,
            cardioid: None,
            confinement: None,
            probe: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks the parts of the file the experiment needs, without solving anything.
    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        if let Some(e) = self.experiment.filter(|e| *e != experiment) {
            return Err(CliError::config(format!(
                "config is for `{}` but `{}` was requested",
                e.name(),
                experiment.name()
            )));
        }
        let o = &self.integrator;
        if !(o.rtol > 0.0 && o.atol > 0.0 && o.min_step > 0.0 && o.event_time_tolerance > 0.0 && o.step_fraction > 0.0) {
            return Err(CliError::config("integrator tolerances and step limits must be positive"));
        }
        let need = |x: bool, what: &str| if x { Ok(()) } else { Err(CliError::config(format!("missing [{what}] section"))) };
        match experiment {
            Experiment::Simulate => {
                need(self.simulate.is_some(), "simulate")?;
                let s = self.simulate.as_ref().expect("checked");
                if s.positions.len() != s.burgers.len() || s.positions.is_empty() {
                    return Err(CliError::config("simulate: positions and burgers must be non-empty and of equal length"));
                }
                if s.burgers.iter().any(|b| b.abs() != 1) {
                    return Err(CliError::config("simulate: Burgers moduli must be +1 or -1"));
                }
                if !(s.t_max > 0.0) {
                    return Err(CliError::config("simulate: t_max must be positive"));
                }
            }
            Experiment::Montecarlo => {
                let m = self.montecarlo.clone().unwrap_or_default();
                if m.burgers.len() != m.n || m.n == 0 {
                    return Err(CliError::config("montecarlo: burgers must list n moduli"));
                }
                if m.bins == 0 || !(m.t_max > 0.0) || !(m.delta > 0.0 && m.delta < m.gamma) {
                    return Err(CliError::config("montecarlo: need bins > 0, t_max > 0 and 0 < delta < gamma"));
                }
            }
            Experiment::Cardioid => {
                let c = self.cardioid.clone().unwrap_or_default();
                if c.starts == 0 || !(c.radius >= 0.0) || !(c.t_max > 0.0) {
                    return Err(CliError::config("cardioid: need starts > 0, radius >= 0 and t_max > 0"));
                }
            }
            Experiment::Confinement => {
                let c = self.confinement.clone().unwrap_or_default();
                if c.epsilons.iter().any(|e| !(*e > 0.0)) || c.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(CliError::config("confinement: epsilons must be positive and strictly decreasing"));
                }
                if c.search.grid == 0 {
                    return Err(CliError::config("confinement: search.grid must be positive"));
                }
            }
            Experiment::GreensProbe => need(self.probe.is_some(), "probe")?,
        }
        Ok(())
    }
}

pub(crate) fn point(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}
