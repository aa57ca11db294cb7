//! Expert priors over the optimum location and the CDF warping they induce.
//!
//! Each search dimension carries a [`PriorSpec`] whose CDF maps the box side
//! `[a, b]` onto `[0, 1]`. Regions the expert believes likely to contain the
//! optimum are stretched and unlikely regions are compressed, so in warped
//! coordinates the prior over the optimum is uniform. All three prior kinds
//! have a strictly positive density on `(a, b)`: no point of the box is ever
//! ruled out.

mod special;

pub use special::{erf, erfc, ln_gamma, reg_lower_incomplete_gamma, reg_upper_incomplete_gamma};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::SearchBox;

/// Queries this far outside `[a, b]` (relative to `b - a`) are treated as
/// optimiser drift and clamped onto the boundary.
const BOUNDARY_SLACK: f64 = 1e-12;
const MAX_BISECTIONS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WarpError {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("x = {x} is outside the prior support [{a}, {b}]")]
    OutOfSupport { x: f64, a: f64, b: f64 },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid search box: {0}")]
    InvalidBox(String),
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {dim}: {source}")]
    InDimension {
        dim: usize,
        #[source]
        source: Box<WarpError>,
    },
}

/// Shape of a prior; its support comes from the owning [`PriorSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorKind {
    Uniform,
    TruncatedNormal { mu: f64, sigma: f64 },
    /// `beta` is the inverse scale (rate).
    TruncatedGamma { alpha: f64, beta: f64 },
}

/// A validated one-dimensional prior on `[a, b]`.
///
/// The untruncated CDF values at the two ends are cached. When the box sits in
/// the upper half of the base distribution the survival function is used
/// instead, so the normaliser never suffers from cancellation near 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    kind: PriorKind,
    a: f64,
    b: f64,
    upper_tail: bool,
    base_a: f64,
    base_b: f64,
}

impl PriorSpec {
    pub fn new(kind: PriorKind, a: f64, b: f64) -> Result<Self, WarpError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(WarpError::InvalidPrior(format!(
                "support ({a}, {b}) must be finite with a < b"
            )));
        }
        let upper_tail = match kind {
            PriorKind::Uniform => false,
            PriorKind::TruncatedNormal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
                    return Err(WarpError::InvalidPrior(format!(
                        "truncated normal needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
                    )));
                }
                0.5 * (a + b) > mu
            }
            PriorKind::TruncatedGamma { alpha, beta } => {
                if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
                    return Err(WarpError::InvalidPrior(format!(
                        "truncated gamma needs alpha > 0 and beta > 0, got alpha={alpha}, beta={beta}"
                    )));
                }
                if a < 0.0 {
                    return Err(WarpError::InvalidPrior(format!(
                        "truncated gamma support must lie in [0, inf), got a={a}"
                    )));
                }
                reg_lower_incomplete_gamma(alpha, beta * 0.5 * (a + b))? > 0.5
            }
        };
        let mut spec = Self {
            kind,
            a,
            b,
            upper_tail,
            base_a: 0.0,
            base_b: 1.0,
        };
        if kind != PriorKind::Uniform {
            spec.base_a = spec.base(a);
            spec.base_b = spec.base(b);
        }
        // Positive mass on the box; with these kinds that implies a positive
        // density everywhere on (a, b).
        let mass = (spec.base_b - spec.base_a).abs();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(WarpError::InvalidPrior(format!(
                "{kind:?} puts no representable mass on [{a}, {b}]"
            )));
        }
        Ok(spec)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self, WarpError> {
        Self::new(PriorKind::Uniform, a, b)
    }

    pub fn truncated_normal(mu: f64, sigma: f64, a: f64, b: f64) -> Result<Self, WarpError> {
        Self::new(PriorKind::TruncatedNormal { mu, sigma }, a, b)
    }

    pub fn truncated_gamma(alpha: f64, beta: f64, a: f64, b: f64) -> Result<Self, WarpError> {
        Self::new(PriorKind::TruncatedGamma { alpha, beta }, a, b)
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    // Untruncated CDF (or survival function when `upper_tail`).
    fn base(&self, x: f64) -> f64 {
        match self.kind {
            PriorKind::Uniform => (x - self.a) / (self.b - self.a),
            PriorKind::TruncatedNormal { mu, sigma } => {
                let z = (x - mu) / (sigma * std::f64::consts::SQRT_2);
                if self.upper_tail {
                    0.5 * erfc(z)
                } else {
                    0.5 * erfc(-z)
                }
            }
            PriorKind::TruncatedGamma { alpha, beta } => {
                let t = (beta * x).max(0.0);
                // alpha > 0 and t >= 0 were checked at construction
                if self.upper_tail {
                    reg_upper_incomplete_gamma(alpha, t).unwrap_or(f64::NAN)
                } else {
                    reg_lower_incomplete_gamma(alpha, t).unwrap_or(f64::NAN)
                }
            }
        }
    }

    fn clamp_query(&self, x: f64) -> Result<f64, WarpError> {
        let slack = BOUNDARY_SLACK * (self.b - self.a);
        if x.is_nan() || x < self.a - slack || x > self.b + slack {
            return Err(WarpError::OutOfSupport {
                x,
                a: self.a,
                b: self.b,
            });
        }
        Ok(x.clamp(self.a, self.b))
    }

    /// Truncated CDF; exactly 0 at `a` and exactly 1 at `b`.
    pub fn cdf(&self, x: f64) -> Result<f64, WarpError> {
        let x = self.clamp_query(x)?;
        if x <= self.a {
            return Ok(0.0);
        }
        if x >= self.b {
            return Ok(1.0);
        }
        let u = match self.kind {
            PriorKind::Uniform => (x - self.a) / (self.b - self.a),
            _ => (self.base(x) - self.base_a) / (self.base_b - self.base_a),
        };
        Ok(u.clamp(0.0, 1.0))
    }

    /// Quantile function by bisection on the CDF.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64, WarpError> {
        if !(0.0..=1.0).contains(&u) {
            return Err(WarpError::Domain {
                what: "u",
                value: u,
                domain: "[0, 1]",
            });
        }
        if u == 0.0 {
            return Ok(self.a);
        }
        if u == 1.0 {
            return Ok(self.b);
        }
        let (mut lo, mut hi) = (self.a, self.b);
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Truncated CDF of `prior` at `x`.
pub fn cdf(prior: &PriorSpec, x: f64) -> Result<f64, WarpError> {
    prior.cdf(x)
}

/// Quantile of `prior` at probability `u`.
pub fn inverse_cdf(prior: &PriorSpec, u: f64) -> Result<f64, WarpError> {
    prior.inverse_cdf(u)
}

/// One prior per search dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpMap {
    dims: Vec<PriorSpec>,
}

impl WarpMap {
    pub fn new(dims: Vec<PriorSpec>) -> Result<Self, WarpError> {
        if dims.is_empty() {
            return Err(WarpError::InvalidPrior("warp map has no dimensions".into()));
        }
        Ok(Self { dims })
    }

    /// Uniform prior on every side of `space`; warping is then an affine map
    /// onto the unit cube.
    pub fn uniform(space: &SearchBox) -> Self {
        let dims = space
            .bounds()
            .iter()
            .map(|&(a, b)| PriorSpec::uniform(a, b).expect("SearchBox bounds are valid"))
            .collect();
        Self { dims }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn priors(&self) -> &[PriorSpec] {
        &self.dims
    }

    pub fn search_box(&self) -> SearchBox {
        SearchBox::new(self.dims.iter().map(PriorSpec::bounds).collect())
            .expect("prior supports are valid")
    }

    /// Checks that the priors span exactly the sides of `space`.
    pub fn check_spans(&self, space: &SearchBox) -> Result<(), WarpError> {
        if self.dim() != space.dim() {
            return Err(WarpError::DimensionMismatch {
                expected: space.dim(),
                got: self.dim(),
            });
        }
        for (i, (p, &side)) in self.dims.iter().zip(space.bounds()).enumerate() {
            if p.bounds() != side {
                return Err(WarpError::InDimension {
                    dim: i,
                    source: Box::new(WarpError::InvalidPrior(format!(
                        "prior support {:?} differs from box side {:?}",
                        p.bounds(),
                        side
                    ))),
                });
            }
        }
        Ok(())
    }

    /// Maps `x` into the unit cube, one CDF per coordinate.
    pub fn warp_point(&self, x: &[f64]) -> Result<Vec<f64>, WarpError> {
        if x.len() != self.dim() {
            return Err(WarpError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        self.dims
            .iter()
            .zip(x)
            .enumerate()
            .map(|(dim, (p, &v))| {
                p.cdf(v).map_err(|e| WarpError::InDimension {
                    dim,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    /// Draws one point from the product prior by inverse-CDF sampling.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.dims
            .iter()
            .map(|p| {
                p.inverse_cdf(rng.random::<f64>())
                    .expect("uniform deviate lies in [0, 1)")
            })
            .collect()
    }
}
