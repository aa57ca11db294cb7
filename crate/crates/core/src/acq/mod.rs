//! Acquisition functions and their inner maximisation.

mod nelder_mead;

pub use nelder_mead::minimize as nelder_mead;

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gp::{FeatureMap, GpModel};
use crate::space::SearchBox;
use crate::warp::{erfc, WarpError};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density and distribution function at `z`.
pub fn std_normal_pdf_cdf(z: f64) -> (f64, f64) {
    let pdf = INV_SQRT_2PI * (-0.5 * z * z).exp();
    let cdf = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    (pdf, cdf)
}

/// Closed-form expected improvement of a `N(mean, sd^2)` belief over `incumbent`
/// (maximisation). Zero when `sd` is zero.
pub fn expected_improvement(mean: f64, sd: f64, incumbent: f64) -> f64 {
    if sd.is_nan() || sd <= 0.0 {
        return 0.0;
    }
    let diff = mean - incumbent;
    let z = diff / sd;
    let (pdf, cdf) = std_normal_pdf_cdf(z);
    (diff * cdf + sd * pdf).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcqKind {
    Ei,
    Ucb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcbMode {
    /// The full GP-UCB schedule with constants `a`, `b`, `r`.
    Full,
    /// `2 log(d n^2 pi^2 / (6 delta))`.
    Simplified,
}

/// Constants of the full GP-UCB schedule. `r = None` means the longest box
/// side, resolved when a run starts (1 if never resolved).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcbConstants {
    pub a: f64,
    pub b: f64,
    pub r: Option<f64>,
}

impl Default for UcbConstants {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            r: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionSpec {
    pub kind: AcqKind,
    pub delta: f64,
    pub ucb_mode: UcbMode,
    pub ucb_constants: UcbConstants,
}

impl AcquisitionSpec {
    pub fn ei() -> Self {
        Self {
            kind: AcqKind::Ei,
            ..Self::ucb(0.1)
        }
    }

    pub fn ucb(delta: f64) -> Self {
        Self {
            kind: AcqKind::Ucb,
            delta,
            ucb_mode: UcbMode::Simplified,
            ucb_constants: UcbConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        let c = &self.ucb_constants;
        let r_ok = c.r.is_none_or(|r| r > 0.0 && r.is_finite());
        if !(c.a > 0.0 && c.b > 0.0 && c.a.is_finite() && c.b.is_finite() && r_ok) {
            return Err(format!("UCB constants must be positive, got {c:?}"));
        }
        Ok(())
    }

    /// Fills in `r` from the box if unset.
    pub fn resolved_for(mut self, space: &SearchBox) -> Self {
        if self.ucb_constants.r.is_none() {
            self.ucb_constants.r = Some(space.longest_side());
        }
        self
    }
}

impl Default for AcquisitionSpec {
    fn default() -> Self {
        Self::ei()
    }
}

/// Exploration weight `gamma_n` of GP-UCB; `n >= 1`, `d >= 1`.
pub fn ucb_gamma(n: usize, d: usize, spec: &AcquisitionSpec) -> f64 {
    let (n, d) = (n.max(1) as f64, d.max(1) as f64);
    let delta = spec.delta;
    match spec.ucb_mode {
        UcbMode::Simplified => 2.0 * (d * n * n * PI * PI / (6.0 * delta)).ln(),
        UcbMode::Full => {
            let UcbConstants { a, b, r } = spec.ucb_constants;
            let r = r.unwrap_or(1.0);
            let pi_n = PI * PI * n * n / 6.0;
            2.0 * (2.0 * pi_n / delta).ln()
                + 4.0 * d * (d * n * b * r * (2.0 * d * a / delta).ln().sqrt()).ln()
        }
    }
}

/// Upper confidence bound `mean + sqrt(gamma) * sd`.
pub fn upper_confidence_bound(mean: f64, sd: f64, gamma: f64) -> f64 {
    mean + gamma.max(0.0).sqrt() * sd
}

/// Acquisition value at `x` given the fitted model; `n` is the number of
/// observations so far.
pub fn acquisition_value<M: FeatureMap>(
    model: &GpModel<M>,
    x: &[f64],
    spec: &AcquisitionSpec,
    incumbent: f64,
    n: usize,
) -> Result<f64, WarpError> {
    let p = model.predict(x)?;
    Ok(match spec.kind {
        AcqKind::Ei => expected_improvement(p.mean, p.sd(), incumbent),
        AcqKind::Ucb => upper_confidence_bound(p.mean, p.sd(), ucb_gamma(n, model.map().dim(), spec)),
    })
}

/// Effort spent by [`maximize_acquisition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximizerBudget {
    pub candidates: usize,
    pub restarts: usize,
    pub iterations: usize,
    /// Initial simplex edge as a fraction of each box side.
    pub simplex_fraction: f64,
}

impl Default for MaximizerBudget {
    fn default() -> Self {
        Self {
            candidates: 2000,
            restarts: 10,
            iterations: 200,
            simplex_fraction: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub point: Vec<f64>,
    pub acq_value: f64,
    pub restarts_used: usize,
}

/// Random candidates followed by Nelder–Mead polishing of the best few.
/// The search runs in original coordinates; the warp lives in the kernel.
pub fn maximize_acquisition<M: FeatureMap, R: Rng + ?Sized>(
    model: &GpModel<M>,
    space: &SearchBox,
    spec: &AcquisitionSpec,
    incumbent: f64,
    n: usize,
    budget: &MaximizerBudget,
    rng: &mut R,
) -> Proposal {
    let value = |x: &[f64]| {
        acquisition_value(model, x, spec, incumbent, n)
            .ok()
            .filter(|v| v.is_finite())
            .unwrap_or(f64::NEG_INFINITY)
    };

    let n_cand = budget.candidates.max(1);
    let candidates: Vec<(Vec<f64>, f64)> = (0..n_cand)
        .map(|_| {
            let x = space.sample_uniform(rng);
            let v = value(&x);
            (x, v)
        })
        .collect();

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    // stable: equal values keep candidate order
    order.sort_by(|&i, &j| candidates[j].1.total_cmp(&candidates[i].1));

    let (mut best_x, mut best_v) = candidates[order[0]].clone();
    let step: Vec<f64> = (0..space.dim())
        .map(|i| budget.simplex_fraction * space.width(i))
        .collect();
    let restarts = budget.restarts.min(order.len());
    for &i in order.iter().take(restarts) {
        let (x, neg) = nelder_mead(|x| -value(x), &candidates[i].0, &step, space, budget.iterations);
        let v = -neg;
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    if !best_v.is_finite() {
        // every evaluation failed; any in-box point is as good as another
        best_v = 0.0;
    }
    Proposal {
        point: best_x,
        acq_value: best_v,
        restarts_used: restarts,
    }
}
