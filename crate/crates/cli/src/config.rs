//! Experiment configuration files.
//!
//! A config is one JSON document:
//!
//! ```json
//! {
//!   "objective": "branin",
//!   "bounds": [[-5, 10], [0, 15]],
//!   "priors": [{"kind": "truncated_normal", "mu": 3.89, "sigma": 0.25}, "uniform"],
//!   "methods": ["warped_bo", "standard_bo", "prior_search"],
//!   "acquisition": {"kind": "ei"},
//!   "n_init": 4, "budget": 34, "runs": 10, "base_seed": 0,
//!   "direction": "minimize", "output_dir": "out/branin"
//! }
//! ```
//!
//! `objective` is either a builtin name or `{"external": "<shell command>"}`
//! (a string is run through `sh -c`; an array is used as argv). `bounds` may
//! be omitted for builtins. `priors` defaults to all-uniform and takes the
//! support of each entry from `bounds`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use warpbo::acq::{AcqKind, AcquisitionSpec, MaximizerBudget, UcbConstants, UcbMode};
use warpbo::bench::Benchmark;
use warpbo::driver::{BoConfig, Direction};
use warpbo::gp::LengthscaleGrid;
use warpbo::space::SearchBox;
use warpbo::warp::{PriorKind, PriorSpec, WarpMap};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Command {
    Shell(String),
    Argv(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectiveSpec {
    Builtin(String),
    External { external: Command },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorDescriptor {
    /// Only `"uniform"` is accepted in string form.
    Named(String),
    Kind(PriorKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WarpedBo,
    StandardBo,
    PriorSearch,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::WarpedBo => "warped_bo",
            Method::StandardBo => "standard_bo",
            Method::PriorSearch => "prior_search",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Method::WarpedBo, Method::StandardBo, Method::PriorSearch]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub kind: AcqKind,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_ucb_mode")]
    pub ucb_mode: UcbMode,
    #[serde(default)]
    pub ucb_constants: Option<UcbConstants>,
}

fn default_delta() -> f64 {
    0.1
}

fn default_ucb_mode() -> UcbMode {
    UcbMode::Simplified
}

fn default_methods() -> Vec<Method> {
    vec![Method::WarpedBo, Method::StandardBo, Method::PriorSearch]
}

fn default_runs() -> usize {
    10
}

fn default_n_init() -> usize {
    4
}

fn default_noise_var() -> f64 {
    1e-6
}

fn default_timeout() -> f64 {
    3600.0
}

fn default_direction() -> Direction {
    Direction::Minimize
}

fn default_acquisition() -> AcquisitionConfig {
    AcquisitionConfig {
        kind: AcqKind::Ei,
        delta: default_delta(),
        ucb_mode: default_ucb_mode(),
        ucb_constants: None,
    }
}

fn default_refit() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub priors: Option<Vec<PriorDescriptor>>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_acquisition")]
    pub acquisition: AcquisitionConfig,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    pub budget: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    #[serde(default = "default_refit")]
    pub refit_every: usize,
    /// Per-evaluation timeout for external objectives, seconds.
    #[serde(default = "default_timeout")]
    pub eval_timeout_secs: f64,
    #[serde(default)]
    pub maximizer: Option<MaximizerBudget>,
    #[serde(default)]
    pub lengthscale_grid: Option<LengthscaleGrid>,
}

/// A config after validation, with everything the runner needs resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub objective: ObjectiveSpec,
    pub space: SearchBox,
    pub warp: WarpMap,
    pub methods: Vec<Method>,
    pub base: BoConfig,
    pub runs: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub eval_timeout_secs: f64,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<Experiment, ConfigError> {
        let builtin = match &self.objective {
            ObjectiveSpec::Builtin(name) => Some(
                Benchmark::by_name(name)
                    .ok_or_else(|| invalid("objective", format!("unknown builtin objective `{name}`")))?,
            ),
            ObjectiveSpec::External { external } => {
                let empty = match external {
                    Command::Shell(s) => s.trim().is_empty(),
                    Command::Argv(v) => v.is_empty(),
                };
                if empty {
                    return Err(invalid("objective", "external command is empty"));
                }
                None
            }
        };
        let bounds = match (&self.bounds, &builtin) {
            (Some(b), _) => b.clone(),
            (None, Some(bench)) => bench.bounds.clone(),
            (None, None) => return Err(invalid("bounds", "required for external objectives")),
        };
        let space = SearchBox::new(bounds).map_err(|e| invalid("bounds", e.to_string()))?;
        if let Some(bench) = &builtin {
            if bench.dim != space.dim() {
                return Err(invalid(
                    "bounds",
                    format!("{} is {}-dimensional, bounds have {} entries", bench.name, bench.dim, space.dim()),
                ));
            }
        }

        let warp = match &self.priors {
            None => WarpMap::uniform(&space),
            Some(priors) => {
                if priors.len() != space.dim() {
                    return Err(invalid(
                        "priors",
                        format!("{} entries for a {}-dimensional box", priors.len(), space.dim()),
                    ));
                }
                let specs = priors
                    .iter()
                    .zip(space.bounds())
                    .enumerate()
                    .map(|(i, (p, &(a, b)))| {
                        let kind = match p {
                            PriorDescriptor::Named(s) if s == "uniform" => PriorKind::Uniform,
                            PriorDescriptor::Named(s) => {
                                return Err(invalid("priors", format!("entry {i}: unknown prior `{s}`")))
                            }
                            PriorDescriptor::Kind(k) => *k,
                        };
                        PriorSpec::new(kind, a, b).map_err(|e| invalid("priors", format!("entry {i}: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                WarpMap::new(specs).map_err(|e| invalid("priors", e.to_string()))?
            }
        };

        if self.methods.is_empty() {
            return Err(invalid("methods", "at least one method is required"));
        }
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        if self.runs == 0 {
            return Err(invalid("runs", "must be at least 1"));
        }
        if !(self.eval_timeout_secs > 0.0 && self.eval_timeout_secs.is_finite()) {
            return Err(invalid("eval_timeout_secs", "must be positive"));
        }

        let acq = &self.acquisition;
        let acquisition = AcquisitionSpec {
            kind: acq.kind,
            delta: acq.delta,
            ucb_mode: acq.ucb_mode,
            ucb_constants: acq.ucb_constants.unwrap_or_default(),
        };
        acquisition.validate().map_err(|m| invalid("acquisition", m))?;

        let base = BoConfig {
            n_init: self.n_init,
            budget: self.budget,
            acquisition,
            direction: self.direction,
            seed: self.base_seed,
            maximizer: self.maximizer.unwrap_or_default(),
            noise_var: self.noise_var,
            refit_every: self.refit_every,
            lengthscale_grid: self.lengthscale_grid.unwrap_or_default(),
            ..BoConfig::default()
        };
        base.validate().map_err(|e| invalid("n_init/budget", e.to_string()))?;

        Ok(Experiment {
            objective: self.objective.clone(),
            space,
            warp,
            methods,
            base,
            runs: self.runs,
            base_seed: self.base_seed,
            output_dir: self.output_dir.clone().unwrap_or_else(|| PathBuf::from("warpbo-out")),
            eval_timeout_secs: self.eval_timeout_secs,
        })
    }
}
