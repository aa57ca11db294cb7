//! The optimisation loop, its baselines and run bookkeeping.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acq::{maximize_acquisition, AcquisitionSpec, MaximizerBudget};
use crate::gp::{fit_lengthscale_mle_on, Dataset, FeatureMap, GpModel, KernelParams, LengthscaleGrid, RawInputs};
use crate::space::SearchBox;
use crate::warp::{PriorSpec, WarpError, WarpMap};

/// Proposals closer than this (max-norm) to an evaluated point get perturbed.
const DUPLICATE_TOL: f64 = 1e-9;
/// Perturbation half-width as a fraction of each box side.
const DUPLICATE_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("objective failed: {0}")]
pub struct ObjectiveError(pub String);

/// A black-box function to optimise.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64, ObjectiveError>;
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64, ObjectiveError> {
        Ok(self(x))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Warp(#[from] WarpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    pub n_init: usize,
    /// Total number of objective evaluations, initial design included.
    pub budget: usize,
    pub acquisition: AcquisitionSpec,
    pub direction: Direction,
    pub seed: u64,
    pub maximizer: MaximizerBudget,
    pub noise_var: f64,
    /// Refit the lengthscale every this many BO iterations.
    pub refit_every: usize,
    /// Lengthscale used before the first refit.
    pub initial_lengthscale: f64,
    pub lengthscale_grid: LengthscaleGrid,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            n_init: 4,
            budget: 40,
            acquisition: AcquisitionSpec::ei(),
            direction: Direction::Minimize,
            seed: 0,
            maximizer: MaximizerBudget::default(),
            noise_var: 1e-6,
            refit_every: 1,
            initial_lengthscale: 0.2,
            lengthscale_grid: LengthscaleGrid::default(),
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::InvalidConfig(m));
        if self.n_init == 0 {
            return bad("n_init must be at least 1".into());
        }
        if self.budget < self.n_init {
            return bad(format!("budget {} is smaller than n_init {}", self.budget, self.n_init));
        }
        if self.refit_every == 0 {
            return bad("refit_every must be at least 1".into());
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return bad(format!("noise_var must be finite and >= 0, got {}", self.noise_var));
        }
        if !(self.initial_lengthscale > 0.0 && self.initial_lengthscale.is_finite()) {
            return bad(format!("initial_lengthscale must be positive, got {}", self.initial_lengthscale));
        }
        self.acquisition.validate().map_err(RunError::InvalidConfig)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// 1-based evaluation count.
    pub iter: usize,
    pub point: Vec<f64>,
    /// Raw objective value.
    pub value: f64,
    /// Best raw value so far in the run's direction.
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trace: Vec<TraceRecord>,
    pub seed: u64,
    pub config: BoConfig,
    /// Seconds spent on each evaluation step (proposal plus objective call).
    pub wall_times: Vec<f64>,
    /// Set when the run aborted early; `trace` then holds what completed.
    pub failure: Option<String>,
}

impl RunResult {
    pub fn final_best(&self) -> Option<f64> {
        self.trace.last().map(|r| r.best)
    }

    /// Best-so-far after `iter` evaluations (1-based).
    pub fn best_at(&self, iter: usize) -> Option<f64> {
        iter.checked_sub(1).and_then(|i| self.trace.get(i)).map(|r| r.best)
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none() && self.trace.len() == self.config.budget
    }
}

/// `n_init` points drawn i.i.d. uniformly from the box.
pub fn initial_design<R: Rng + ?Sized>(space: &SearchBox, n_init: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n_init).map(|_| space.sample_uniform(rng)).collect()
}

/// Truncated-normal priors centred `offset_fraction` of each box side away
/// from `true_opt` (clamped into the box).
pub fn make_shifted_prior(
    space: &SearchBox,
    true_opt: &[f64],
    offset_fraction: f64,
    sigma: f64,
) -> Result<WarpMap, WarpError> {
    if true_opt.len() != space.dim() {
        return Err(WarpError::DimensionMismatch {
            expected: space.dim(),
            got: true_opt.len(),
        });
    }
    if !space.contains(true_opt) {
        return Err(WarpError::InvalidPrior(format!("optimum {true_opt:?} lies outside the box")));
    }
    if !(0.0..1.0).contains(&offset_fraction) {
        return Err(WarpError::Domain {
            what: "offset_fraction",
            value: offset_fraction,
            domain: "[0, 1)",
        });
    }
    let priors = space
        .bounds()
        .iter()
        .zip(true_opt)
        .map(|(&(a, b), &opt)| {
            let mu = (opt + offset_fraction * (b - a)).clamp(a, b);
            PriorSpec::truncated_normal(mu, sigma, a, b)
        })
        .collect::<Result<Vec<_>, _>>()?;
    WarpMap::new(priors)
}

struct Recorder {
    direction: Direction,
    trace: Vec<TraceRecord>,
    wall_times: Vec<f64>,
    best: Option<f64>,
    clock: Instant,
}

impl Recorder {
    fn new(direction: Direction) -> Self {
        Self {
            direction,
            trace: Vec::new(),
            wall_times: Vec::new(),
            best: None,
            clock: Instant::now(),
        }
    }

    fn record(&mut self, point: Vec<f64>, value: f64) {
        let best = match (self.best, self.direction) {
            (None, _) => value,
            (Some(b), Direction::Minimize) => b.min(value),
            (Some(b), Direction::Maximize) => b.max(value),
        };
        self.best = Some(best);
        self.trace.push(TraceRecord {
            iter: self.trace.len() + 1,
            point,
            value,
            best,
        });
        self.wall_times.push(self.clock.elapsed().as_secs_f64());
        self.clock = Instant::now();
    }

    fn finish(self, config: &BoConfig, failure: Option<String>) -> RunResult {
        RunResult {
            trace: self.trace,
            seed: config.seed,
            config: config.clone(),
            wall_times: self.wall_times,
            failure,
        }
    }
}

fn evaluate<O: Objective + ?Sized>(objective: &mut O, x: &[f64]) -> Result<f64, String> {
    match objective.evaluate(x) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("objective returned non-finite value {v} at {x:?}")),
        Err(e) => Err(e.to_string()),
    }
}

fn internal_value(direction: Direction, raw: f64) -> f64 {
    match direction {
        Direction::Maximize => raw,
        Direction::Minimize => -raw,
    }
}

fn separate_from_data<R: Rng + ?Sized>(mut x: Vec<f64>, data: &Dataset, space: &SearchBox, rng: &mut R) -> Vec<f64> {
    let clash = |x: &[f64]| {
        data.points().iter().any(|p| {
            p.iter()
                .zip(x)
                .all(|(a, b)| (a - b).abs() <= DUPLICATE_TOL)
        })
    };
    if clash(&x) {
        for (i, v) in x.iter_mut().enumerate() {
            *v += DUPLICATE_JITTER * space.width(i) * rng.random_range(-1.0..=1.0);
        }
        space.clamp_in_place(&mut x);
    }
    x
}

/// Evaluates the initial design; on success returns the dataset of internal
/// (maximisation) values.
fn run_initial<O: Objective + ?Sized, R: Rng>(
    objective: &mut O,
    space: &SearchBox,
    config: &BoConfig,
    rng: &mut R,
    rec: &mut Recorder,
) -> Result<Dataset, String> {
    let mut data = Dataset::default();
    for x in initial_design(space, config.n_init, rng) {
        let y = evaluate(objective, &x)?;
        rec.record(x.clone(), y);
        data.push(x, internal_value(config.direction, y));
    }
    Ok(data)
}

fn bo_loop<O: Objective + ?Sized, M: FeatureMap>(
    objective: &mut O,
    space: &SearchBox,
    map: &M,
    config: &BoConfig,
) -> Result<RunResult, RunError> {
    config.validate()?;
    if map.dim() != space.dim() {
        return Err(RunError::Warp(WarpError::DimensionMismatch {
            expected: space.dim(),
            got: map.dim(),
        }));
    }
    let spec = config.acquisition.resolved_for(space);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = Recorder::new(config.direction);
    let mut data = match run_initial(objective, space, config, &mut rng, &mut rec) {
        Ok(d) => d,
        Err(e) => return Ok(rec.finish(config, Some(e))),
    };

    let mut params = KernelParams::new(1.0, config.initial_lengthscale, config.noise_var)
        .map_err(|e| RunError::InvalidConfig(e.to_string()))?;
    for t in 0..config.budget - config.n_init {
        if t % config.refit_every == 0 && data.len() >= 2 {
            // keep the previous lengthscale if no grid point factorises
            if let Ok(p) = fit_lengthscale_mle_on(&data, map, params, &config.lengthscale_grid) {
                params = p;
            }
        }
        let model = match GpModel::fit(&data, map, params) {
            Ok(m) => m,
            Err(e) => return Ok(rec.finish(config, Some(format!("GP fit failed: {e}")))),
        };
        let incumbent = data.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let proposal = maximize_acquisition(&model, space, &spec, incumbent, data.len(), &config.maximizer, &mut rng);
        let x = separate_from_data(proposal.point, &data, space, &mut rng);
        let y = match evaluate(objective, &x) {
            Ok(y) => y,
            Err(e) => return Ok(rec.finish(config, Some(e))),
        };
        rec.record(x.clone(), y);
        data.push(x, internal_value(config.direction, y));
    }
    Ok(rec.finish(config, None))
}

/// Bayesian optimisation with the warped kernel. An all-uniform `warp` gives
/// standard BO on the box rescaled to the unit cube.
///
/// Precondition violations are returned as `Err`; failures during the run
/// (objective errors, unrecoverable fits) end it early with
/// [`RunResult::failure`] set and the partial trace kept.
pub fn run_bo<O: Objective + ?Sized>(
    objective: &mut O,
    space: &SearchBox,
    warp: &WarpMap,
    config: &BoConfig,
) -> Result<RunResult, RunError> {
    warp.check_spans(space)?;
    bo_loop(objective, space, warp, config)
}

/// Standard BO with the plain SE kernel on raw coordinates.
pub fn run_plain_bo<O: Objective + ?Sized>(
    objective: &mut O,
    space: &SearchBox,
    config: &BoConfig,
) -> Result<RunResult, RunError> {
    bo_loop(objective, space, &RawInputs { dim: space.dim() }, config)
}

/// Prior based search: after the shared uniform initial design, every
/// evaluation point is an independent draw from the product prior.
pub fn run_prior_search<O: Objective + ?Sized>(
    objective: &mut O,
    space: &SearchBox,
    warp: &WarpMap,
    config: &BoConfig,
) -> Result<RunResult, RunError> {
    config.validate()?;
    warp.check_spans(space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = Recorder::new(config.direction);
    if let Err(e) = run_initial(objective, space, config, &mut rng, &mut rec) {
        return Ok(rec.finish(config, Some(e)));
    }
    for _ in config.n_init..config.budget {
        let x = warp.sample(&mut rng);
        match evaluate(objective, &x) {
            Ok(y) => rec.record(x, y),
            Err(e) => return Ok(rec.finish(config, Some(e))),
        }
    }
    Ok(rec.finish(config, None))
}
