//! Synthetic objectives with known minima.

use std::f64::consts::PI;

/// `1 - exp(-|x - mu|^2 / 2)` with `mu = (0.2, 0.2, 0.2)`; minimum 0 at `mu`.
pub fn gaussian3d(x: &[f64]) -> f64 {
    assert_eq!(x.len(), 3, "gaussian3d takes 3 coordinates");
    let r2: f64 = x.iter().map(|v| (v - 0.2) * (v - 0.2)).sum();
    -(-0.5 * r2).exp_m1()
}

/// Branin–Hoo function.
pub fn branin(x: &[f64]) -> f64 {
    assert_eq!(x.len(), 2, "branin takes 2 coordinates");
    let (a, r, s) = (1.0, 6.0, 10.0);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    let (x1, x2) = (x[0], x[1]);
    a * (x2 - b * x1 * x1 + c * x1 - r).powi(2) + s * (1.0 - t) * x1.cos() + s
}

/// Two-dimensional Levy function; minimum 0 at `(1, 1)`.
pub fn levy2d(x: &[f64]) -> f64 {
    assert_eq!(x.len(), 2, "levy2d takes 2 coordinates");
    let w1 = 1.0 + (x[0] - 1.0) / 4.0;
    let w2 = 1.0 + (x[1] - 1.0) / 4.0;
    (PI * w1).sin().powi(2)
        + (w1 - 1.0).powi(2) * (1.0 + 10.0 * (PI * w1 + 1.0).sin().powi(2))
        + (w2 - 1.0).powi(2) * (1.0 + (2.0 * PI * w2).sin().powi(2))
}

pub const BRANIN_MIN: f64 = 0.397_887_357_729_738_3;

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: &'static str,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub known_min_value: f64,
    pub known_minimizers: Vec<Vec<f64>>,
    pub func: fn(&[f64]) -> f64,
}

impl Benchmark {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.func)(x)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        all().into_iter().find(|b| b.name == name)
    }
}

pub fn all() -> Vec<Benchmark> {
    vec![
        Benchmark {
            name: "gaussian3d",
            dim: 3,
            bounds: vec![(-2.0, 2.0); 3],
            known_min_value: 0.0,
            known_minimizers: vec![vec![0.2; 3]],
            func: gaussian3d,
        },
        Benchmark {
            name: "branin",
            dim: 2,
            bounds: vec![(-5.0, 10.0), (0.0, 15.0)],
            known_min_value: BRANIN_MIN,
            known_minimizers: vec![vec![-PI, 12.275], vec![PI, 2.275], vec![3.0 * PI, 2.475]],
            func: branin,
        },
        Benchmark {
            name: "levy2d",
            dim: 2,
            bounds: vec![(-10.0, 10.0); 2],
            known_min_value: 0.0,
            known_minimizers: vec![vec![1.0, 1.0]],
            func: levy2d,
        },
    ]
}
