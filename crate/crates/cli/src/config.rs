use std::path::{Path, PathBuf};

use hamlearn_core::hamlearn::LearnConfig;
use hamlearn_core::optim::{OptimizerConfig, Optimizer};
use hamlearn_core::pauli::PauliObservable;
use hamlearn_core::statelearn::StateLearnConfig;
use hamlearn_core::su3::SeriesPolicy;
use hamlearn_core::{Coefficients, Family, ParamHamiltonian, Pauli, PauliString};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One JSON document drives every command; each output directory receives
/// the resolved copy so a run can be replayed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub system: SystemConfig,
    pub learn: LearnConfig,
    pub noise_sigma: f64,
    pub restarts: usize,
    pub heldout: HeldoutConfig,
    pub data_kind: DataKind,
    pub state: StateConfig,
    pub su3: Su3Config,
    pub sweep: SweepConfig,
    /// Existing dataset to learn from instead of generating one.
    pub dataset: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            system: SystemConfig::default(),
            learn: LearnConfig::default(),
            noise_sigma: 0.0,
            restarts: 1,
            heldout: HeldoutConfig::default(),
            data_kind: DataKind::Hamiltonian,
            state: StateConfig::default(),
            su3: Su3Config::default(),
            sweep: SweepConfig::default(),
            dataset: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    Hamiltonian,
    State,
    Su3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub family: Family,
    pub num_sites: usize,
    /// Explicit truth parameters; seeded uniform draws otherwise.
    pub coefficients: Option<Vec<f64>>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            family: Family::ZzXx,
            num_sites: 4,
            coefficients: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeldoutConfig {
    /// `XM`, `YM`, `ZM` for magnetizations or a Pauli string such as `XIXIX`.
    pub observables: Vec<String>,
    pub num_states: usize,
    pub num_steps: usize,
}

impl Default for HeldoutConfig {
    fn default() -> Self {
        Self {
            observables: vec!["ZM".into(), "XM".into()],
            num_states: 2,
            num_steps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateConfig {
    pub num_qubits: usize,
    pub learn: StateLearnConfig,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            num_qubits: 3,
            learn: StateLearnConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Su3Config {
    pub coefficients: Option<Vec<f64>>,
    pub num_states: usize,
    /// Gell-Mann indices `1..=9`.
    pub observables: Vec<usize>,
    pub num_steps: usize,
    pub dt: f64,
    pub series: SeriesPolicy,
    pub optimizer: OptimizerConfig,
}

impl Default for Su3Config {
    fn default() -> Self {
        Self {
            coefficients: None,
            num_states: 3,
            observables: (1..=8).collect(),
            num_steps: 5,
            dt: 0.05,
            series: SeriesPolicy::default(),
            optimizer: OptimizerConfig {
                learning_rate: 0.5,
                max_epochs: 3000,
                cost_threshold: 1e-20,
                optimizer: Optimizer::Sgd,
                ..OptimizerConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub num_steps: Vec<usize>,
    pub num_states: Vec<usize>,
    pub num_observables: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            num_steps: vec![1, 3, 5],
            num_states: vec![2, 6, 8],
            num_observables: vec![1, 3, 6],
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies a seed override to every seeded component.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.learn.seed = self.seed;
        self.state.learn.seed = self.seed;
        self
    }

    pub fn validate(&self) -> CliResult<()> {
        self.learn.validate()?;
        self.state.learn.validate()?;
        self.su3.optimizer.validate()?;
        if self.restarts == 0 {
            return Err(CliError::Config("restarts must be at least 1".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(CliError::Config("noise_sigma must be non-negative".into()));
        }
        if self.heldout.num_states == 0 || self.heldout.num_steps == 0 {
            return Err(CliError::Config("held-out series need at least one state and step".into()));
        }
        if self.sweep.num_steps.is_empty() || self.sweep.num_states.is_empty() || self.sweep.num_observables.is_empty() {
            return Err(CliError::Config("sweep axes must be non-empty".into()));
        }
        Ok(())
    }

    pub fn truth(&self) -> CliResult<ParamHamiltonian<f64>> {
        let coeffs = match &self.system.coefficients {
            Some(c) => Coefficients::Explicit(c.clone()),
            None => Coefficients::Random(self.seed),
        };
        Ok(ParamHamiltonian::build_family(self.system.family, self.system.num_sites, coeffs)?)
    }

    pub fn heldout_observables(&self, num_sites: usize) -> CliResult<Vec<PauliObservable<f64>>> {
        self.heldout
            .observables
            .iter()
            .map(|label| parse_observable(label, num_sites))
            .collect()
    }
}

fn parse_observable(label: &str, num_sites: usize) -> CliResult<PauliObservable<f64>> {
    let axis = match label {
        "XM" => Some(Pauli::X),
        "YM" => Some(Pauli::Y),
        "ZM" => Some(Pauli::Z),
        _ => None,
    };
    if let Some(a) = axis {
        return Ok(PauliObservable::magnetization(num_sites, a));
    }
    let s: PauliString = label
        .parse()
        .map_err(|e| CliError::Config(format!("observable `{label}`: {e}")))?;
    if s.num_sites() != num_sites {
        return Err(CliError::Config(format!(
            "observable `{label}` acts on {} sites, system has {num_sites}",
            s.num_sites()
        )));
    }
    Ok(PauliObservable::from_string(s))
}
