//! Axis-aligned search boxes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::warp::WarpError;

/// Closed box `[a_1, b_1] x ... x [a_d, b_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct SearchBox {
    bounds: Vec<(f64, f64)>,
}

impl SearchBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, WarpError> {
        if bounds.is_empty() {
            return Err(WarpError::InvalidBox("box has no dimensions".into()));
        }
        for (i, &(a, b)) in bounds.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(WarpError::InvalidBox(format!(
                    "dimension {i}: bounds ({a}, {b}) must be finite with a < b"
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// The unit cube `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Self {
            bounds: vec![(0.0, 1.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn width(&self, dim: usize) -> f64 {
        let (a, b) = self.bounds[dim];
        b - a
    }

    pub fn longest_side(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(&self.bounds)
                .all(|(&v, &(a, b))| v >= a && v <= b)
    }

    pub fn clamp_in_place(&self, x: &mut [f64]) {
        for (v, &(a, b)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(a, b);
        }
    }

    /// One point drawn uniformly from the box.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|&(a, b)| a + (b - a) * rng.random::<f64>())
            .collect()
    }
}

impl TryFrom<Vec<(f64, f64)>> for SearchBox {
    type Error = WarpError;

    fn try_from(bounds: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(bounds)
    }
}

impl From<SearchBox> for Vec<(f64, f64)> {
    fn from(b: SearchBox) -> Self {
        b.bounds
    }
}
