//! Gaussian-process regression on warped inputs.
//!
//! Inputs pass through a [`FeatureMap`] (normally a [`WarpMap`]) before the
//! squared-exponential kernel sees them, so the kernel measures distance in
//! prior-CDF space. Outputs are standardised before fitting and mapped back
//! on prediction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::warp::{WarpError, WarpMap};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Floor on the output standard deviation used for standardisation.
pub const MIN_Y_STD: f64 = 1e-12;
/// Diagonal jitter tried, in order, when the plain factorisation fails.
pub const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least {needed} observations, have {have}")]
    TooFewPoints { needed: usize, have: usize },
    #[error("{points} points but {values} values")]
    LengthMismatch { points: usize, values: usize },
    #[error("observation {index} is not finite ({value})")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),
    #[error("Cholesky failed after exhausting the jitter ladder up to {max_jitter:e}")]
    JitterExhausted { max_jitter: f64 },
}

/// Squared-exponential hyperparameters. `lengthscale` is measured in warped
/// (unit-cube) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub amplitude: f64,
    pub lengthscale: f64,
    pub noise_var: f64,
}

impl KernelParams {
    pub fn new(amplitude: f64, lengthscale: f64, noise_var: f64) -> Result<Self, FitError> {
        let p = Self {
            amplitude,
            lengthscale,
            noise_var,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let ok = self.amplitude.is_finite()
            && self.amplitude > 0.0
            && self.lengthscale.is_finite()
            && self.lengthscale > 0.0
            && self.noise_var.is_finite()
            && self.noise_var >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(FitError::InvalidParams(format!("{self:?}")))
        }
    }

    pub fn with_lengthscale(self, lengthscale: f64) -> Self {
        Self {
            lengthscale,
            ..self
        }
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            lengthscale: 0.2,
            noise_var: 1e-6,
        }
    }
}

/// Input transformation applied before the kernel.
pub trait FeatureMap: Clone + Send + Sync {
    fn dim(&self) -> usize;
    fn map_point(&self, x: &[f64]) -> Result<Vec<f64>, WarpError>;
}

impl FeatureMap for WarpMap {
    fn dim(&self) -> usize {
        WarpMap::dim(self)
    }

    fn map_point(&self, x: &[f64]) -> Result<Vec<f64>, WarpError> {
        self.warp_point(x)
    }
}

/// Identity map: the plain SE kernel on raw coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawInputs {
    pub dim: usize,
}

impl FeatureMap for RawInputs {
    fn dim(&self) -> usize {
        self.dim
    }

    fn map_point(&self, x: &[f64]) -> Result<Vec<f64>, WarpError> {
        if x.len() != self.dim {
            return Err(WarpError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(x.to_vec())
    }
}

fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `amplitude * exp(-|u - v|^2 / (2 l^2))`.
pub fn se_kernel(u: &[f64], v: &[f64], params: &KernelParams) -> f64 {
    se_from_sq_dist(sq_dist(u, v), params)
}

fn se_from_sq_dist(d2: f64, params: &KernelParams) -> f64 {
    params.amplitude * (-0.5 * d2 / (params.lengthscale * params.lengthscale)).exp()
}

/// SE kernel on CDF-warped inputs. The product over dimensions of the
/// per-dimension factors collapses into one exponential of the summed squared
/// warped distances, carrying a single overall amplitude.
pub fn warped_kernel<M: FeatureMap>(
    x: &[f64],
    x2: &[f64],
    map: &M,
    params: &KernelParams,
) -> Result<f64, WarpError> {
    Ok(se_kernel(&map.map_point(x)?, &map.map_point(x2)?, params))
}

/// Observed `(x, y)` pairs in original coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, FitError> {
        if points.len() != values.len() {
            return Err(FitError::LengthMismatch {
                points: points.len(),
                values: values.len(),
            });
        }
        Ok(Self { points, values })
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) {
        self.points.push(x);
        self.values.push(y);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn map_points<M: FeatureMap>(data: &Dataset, map: &M) -> Result<Vec<Vec<f64>>, WarpError> {
    data.points.iter().map(|x| map.map_point(x)).collect()
}

fn gram_from_mapped(mapped: &[Vec<f64>], params: &KernelParams) -> DMatrix<f64> {
    let n = mapped.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = params.amplitude;
        for j in 0..i {
            let v = se_kernel(&mapped[i], &mapped[j], params);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Kernel matrix over the dataset's (warped) inputs, without the noise term.
pub fn gram_matrix<M: FeatureMap>(
    data: &Dataset,
    map: &M,
    params: &KernelParams,
) -> Result<DMatrix<f64>, WarpError> {
    Ok(gram_from_mapped(&map_points(data, map)?, params))
}

/// Standardisation constants `(mean, std)`; population std floored at [`MIN_Y_STD`].
fn standardise(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt().max(MIN_Y_STD))
}

/// Lower Cholesky factor of `k + noise*I`, escalating the diagonal jitter on
/// failure. Returns the factor and the total diagonal addition.
fn cholesky_with_jitter(k: &DMatrix<f64>, noise_var: f64) -> Result<(DMatrix<f64>, f64), FitError> {
    let n = k.nrows();
    for jitter in std::iter::once(0.0).chain(JITTER_LADDER) {
        let diag = noise_var + jitter;
        let mut a = k.clone();
        for i in 0..n {
            a[(i, i)] += diag;
        }
        if let Some(chol) = a.cholesky() {
            return Ok((chol.unpack(), diag));
        }
    }
    Err(FitError::JitterExhausted {
        max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
    })
}

/// Posterior mean and variance at one query point, in original output units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// A fitted, immutable GP posterior.
#[derive(Debug, Clone)]
pub struct GpModel<M: FeatureMap = WarpMap> {
    params: KernelParams,
    map: M,
    mapped_points: Vec<Vec<f64>>,
    chol: DMatrix<f64>,
    weights: DVector<f64>,
    y_mean: f64,
    y_std: f64,
    diag_added: f64,
    log_marginal_likelihood: f64,
}

fn validate_dataset(data: &Dataset) -> Result<(), FitError> {
    if data.is_empty() {
        return Err(FitError::EmptyDataset);
    }
    if let Some((index, &value)) = data.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(FitError::NonFiniteValue { index, value });
    }
    Ok(())
}

impl<M: FeatureMap> GpModel<M> {
    fn from_mapped(
        mapped_points: Vec<Vec<f64>>,
        gram: &DMatrix<f64>,
        values: &[f64],
        map: M,
        params: KernelParams,
    ) -> Result<Self, FitError> {
        let (y_mean, y_std) = standardise(values);
        let ys = DVector::from_iterator(values.len(), values.iter().map(|v| (v - y_mean) / y_std));
        let (chol, diag_added) = cholesky_with_jitter(gram, params.noise_var)?;
        let half = chol
            .solve_lower_triangular(&ys)
            .expect("Cholesky factor has a positive diagonal");
        let weights = chol
            .transpose()
            .solve_upper_triangular(&half)
            .expect("Cholesky factor has a positive diagonal");
        let n = values.len() as f64;
        let log_det_half: f64 = chol.diagonal().iter().map(|d| d.ln()).sum();
        let log_marginal_likelihood = -0.5 * half.norm_squared() - log_det_half - 0.5 * n * LN_2PI;
        Ok(Self {
            params,
            map,
            mapped_points,
            chol,
            weights,
            y_mean,
            y_std,
            diag_added,
            log_marginal_likelihood,
        })
    }

    /// Fits the posterior to `data` with fixed hyperparameters.
    pub fn fit(data: &Dataset, map: &M, params: KernelParams) -> Result<Self, FitError> {
        params.validate()?;
        validate_dataset(data)?;
        let mapped = map_points(data, map)?;
        let gram = gram_from_mapped(&mapped, &params);
        Self::from_mapped(mapped, &gram, &data.values, map.clone(), params)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction, WarpError> {
        let u = self.map.map_point(x)?;
        let k = DVector::from_iterator(
            self.mapped_points.len(),
            self.mapped_points.iter().map(|p| se_kernel(&u, p, &self.params)),
        );
        let mean_std = k.dot(&self.weights);
        let v = self
            .chol
            .solve_lower_triangular(&k)
            .expect("Cholesky factor has a positive diagonal");
        let var_std = (self.params.amplitude - v.norm_squared()).max(0.0);
        Ok(Prediction {
            mean: self.y_mean + self.y_std * mean_std,
            variance: var_std * self.y_std * self.y_std,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn map(&self) -> &M {
        &self.map
    }

    /// Lower Cholesky factor of `K + (noise_var + jitter) I`.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Solution `w` of `(K + (noise_var + jitter) I) w = y_standardised`.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Total value added to the Gram diagonal: noise variance plus any jitter.
    pub fn diagonal_added(&self) -> f64 {
        self.diag_added
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn y_std(&self) -> f64 {
        self.y_std
    }

    /// Log marginal likelihood of the standardised observations.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }
}

/// Fits a GP posterior; see [`GpModel::fit`].
pub fn fit<M: FeatureMap>(data: &Dataset, map: &M, params: KernelParams) -> Result<GpModel<M>, FitError> {
    GpModel::fit(data, map, params)
}

pub fn predict<M: FeatureMap>(model: &GpModel<M>, x: &[f64]) -> Result<Prediction, WarpError> {
    model.predict(x)
}

/// `-1/2 y'(K + s I)^-1 y - 1/2 log|K + s I| - n/2 log 2pi` on standardised `y`.
pub fn log_marginal_likelihood<M: FeatureMap>(
    data: &Dataset,
    map: &M,
    params: KernelParams,
) -> Result<f64, FitError> {
    Ok(GpModel::fit(data, map, params)?.log_marginal_likelihood())
}

/// Log-spaced lengthscale candidates for maximum-likelihood fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthscaleGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for LengthscaleGrid {
    fn default() -> Self {
        Self {
            min: 0.01,
            max: 2.0,
            count: 50,
        }
    }
}

impl LengthscaleGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.min],
            n => {
                let (lo, hi) = (self.min.ln(), self.max.ln());
                (0..n)
                    .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

/// Replaces the lengthscale in `base` by the maximiser of the log marginal
/// likelihood over the default grid.
pub fn fit_lengthscale_mle<M: FeatureMap>(
    data: &Dataset,
    map: &M,
    base: KernelParams,
) -> Result<KernelParams, FitError> {
    fit_lengthscale_mle_on(data, map, base, &LengthscaleGrid::default())
}

/// Grid-search maximum likelihood; ties go to the larger lengthscale.
pub fn fit_lengthscale_mle_on<M: FeatureMap>(
    data: &Dataset,
    map: &M,
    base: KernelParams,
    grid: &LengthscaleGrid,
) -> Result<KernelParams, FitError> {
    base.validate()?;
    validate_dataset(data)?;
    if data.len() < 2 {
        return Err(FitError::TooFewPoints {
            needed: 2,
            have: data.len(),
        });
    }
    let mapped = map_points(data, map)?;
    let n = mapped.len();
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = sq_dist(&mapped[i], &mapped[j]);
            d2[(i, j)] = v;
            d2[(j, i)] = v;
        }
    }
    let (y_mean, y_std) = standardise(&data.values);
    let ys = DVector::from_iterator(n, data.values.iter().map(|v| (v - y_mean) / y_std));

    let mut best: Option<(f64, f64)> = None;
    let mut last_err = None;
    for l in grid.values() {
        let params = base.with_lengthscale(l);
        let gram = d2.map(|v| se_from_sq_dist(v, &params));
        match cholesky_with_jitter(&gram, params.noise_var) {
            Ok((chol, _)) => {
                let half = chol
                    .solve_lower_triangular(&ys)
                    .expect("Cholesky factor has a positive diagonal");
                let log_det_half: f64 = chol.diagonal().iter().map(|d| d.ln()).sum();
                let lml = -0.5 * half.norm_squared() - log_det_half;
                if best.is_none_or(|(_, b)| lml >= b) {
                    best = Some((l, lml));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((l, _)) => Ok(base.with_lengthscale(l)),
        None => Err(last_err.unwrap_or(FitError::JitterExhausted {
            max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
        })),
    }
}
