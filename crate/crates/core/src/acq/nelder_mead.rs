//! Box-clamped Nelder–Mead minimiser used to polish acquisition candidates.

use crate::space::SearchBox;

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimises `f` starting from `x0`. The initial simplex offsets `x0` by
/// `step[i]` along each axis (flipped inward at the box face); every vertex
/// is clamped into `space`. Returns the best vertex and its value.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    space: &SearchBox,
    iterations: usize,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let clamp = |mut x: Vec<f64>| {
        space.clamp_in_place(&mut x);
        x
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let start = clamp(x0.to_vec());
    let fs = eval(&start);
    simplex.push((start.clone(), fs));
    for i in 0..d {
        let mut v = start.clone();
        let (_, hi) = space.bounds()[i];
        v[i] = if v[i] + step[i] <= hi {
            v[i] + step[i]
        } else {
            v[i] - step[i]
        };
        let v = clamp(v);
        let fv = eval(&v);
        simplex.push((v, fv));
    }

    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if (worst - best).abs() <= 1e-14 * (1.0 + best.abs()) && diameter(&simplex) < 1e-12 {
            break;
        }

        let mut centroid = vec![0.0; d];
        for (v, _) in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / d as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            clamp(
                centroid
                    .iter()
                    .zip(from)
                    .map(|(c, x)| c + t * (x - c))
                    .collect(),
            )
        };

        let xr = along(-REFLECTION, &simplex[d].0);
        let fr = eval(&xr);
        let second_worst = simplex[d - 1].1;

        if fr < best {
            let xe = along(EXPANSION, &xr);
            let fe = eval(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second_worst {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(CONTRACTION, &xr);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(CONTRACTION, &simplex[d].0);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(worst) {
                simplex[d] = (xc, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = clamp(
                        anchor
                            .iter()
                            .zip(&vertex.0)
                            .map(|(a, x)| a + SHRINK * (x - a))
                            .collect(),
                    );
                    let fx = eval(&x);
                    *vertex = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let first = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(v, _)| {
            v.iter()
                .zip(first)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
