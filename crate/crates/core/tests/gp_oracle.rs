mod common;

use common::{dense_inverse, dot, log_abs_det, mat_vec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warpbo::gp::{
    fit, fit_lengthscale_mle, gram_matrix, log_marginal_likelihood, se_kernel, warped_kernel, Dataset, KernelParams,
    LengthscaleGrid,
};
use warpbo::space::SearchBox;
use warpbo::warp::{PriorSpec, WarpMap};

fn random_map(rng: &mut ChaCha8Rng, d: usize, kind: usize) -> WarpMap {
    let priors = (0..d)
        .map(|_| {
            let a = if kind == 2 { rng.random_range(0.0..2.0) } else { rng.random_range(-5.0..5.0) };
            let b = a + rng.random_range(0.5..10.0);
            match kind {
                0 => PriorSpec::uniform(a, b),
                1 => PriorSpec::truncated_normal(rng.random_range(a..b), rng.random_range(0.1..1.0) * (b - a), a, b),
                _ => PriorSpec::truncated_gamma(rng.random_range(0.5..4.0), rng.random_range(0.1..2.0), a, b),
            }
            .unwrap()
        })
        .collect();
    WarpMap::new(priors).unwrap()
}

fn random_dataset(rng: &mut ChaCha8Rng, space: &SearchBox, n: usize) -> Dataset {
    let pts: Vec<_> = (0..n).map(|_| space.sample_uniform(rng)).collect();
    let vals: Vec<_> = pts
        .iter()
        .map(|p| p.iter().map(|v| v.sin()).sum::<f64>() + rng.random_range(-0.5..0.5))
        .collect();
    Dataset::new(pts, vals).unwrap()
}

/// Oracle kernel matrix from first principles: warp each point, then the SE
/// formula written out directly.
fn oracle_gram(data: &Dataset, map: &WarpMap, p: &KernelParams, diag: f64) -> Vec<Vec<f64>> {
    let w: Vec<Vec<f64>> = data.points().iter().map(|x| map.warp_point(x).unwrap()).collect();
    (0..w.len())
        .map(|i| {
            (0..w.len())
                .map(|j| {
                    let d2: f64 = w[i].iter().zip(&w[j]).map(|(a, b)| (a - b).powi(2)).sum();
                    p.amplitude * (-d2 / (2.0 * p.lengthscale * p.lengthscale)).exp() + if i == j { diag } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

struct Fixture {
    data: Dataset,
    map: WarpMap,
    params: KernelParams,
}

fn fixtures() -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..20)
        .map(|i| {
            let d = 1 + i % 3;
            let map = random_map(&mut rng, d, i % 3);
            let n = 1 + (i * 7) % 10;
            let data = random_dataset(&mut rng, &map.search_box(), n);
            let params = KernelParams::new(
                rng.random_range(0.5..2.0),
                rng.random_range(0.1..0.6),
                rng.random_range(1e-3..1e-1),
            )
            .unwrap();
            Fixture { data, map, params }
        })
        .collect()
}

#[test]
fn predictions_match_dense_inverse_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (fi, f) in fixtures().iter().enumerate() {
        let model = fit(&f.data, &f.map, f.params).unwrap();
        let k = oracle_gram(&f.data, &f.map, &f.params, model.diagonal_added());
        let kinv = dense_inverse(&k);
        let ys: Vec<f64> = f.data.values().iter().map(|y| (y - model.y_mean()) / model.y_std()).collect();
        let w = mat_vec(&kinv, &ys);
        for (a, b) in w.iter().zip(model.weights().iter()) {
            assert!((a - b).abs() < 1e-8, "fixture {fi}: weight {a} vs {b}");
        }
        let space = f.map.search_box();
        for _ in 0..20 {
            let q = space.sample_uniform(&mut rng);
            let kq: Vec<f64> = f.data.points().iter().map(|x| warped_kernel(&q, x, &f.map, &f.params).unwrap()).collect();
            let mean = model.y_mean() + model.y_std() * dot(&kq, &w);
            let var = (f.params.amplitude - dot(&kq, &mat_vec(&kinv, &kq))) * model.y_std().powi(2);
            let p = model.predict(&q).unwrap();
            assert!((p.mean - mean).abs() < 1e-8, "fixture {fi}: mean {} vs {mean}", p.mean);
            assert!((p.variance - var.max(0.0)).abs() < 1e-8, "fixture {fi}: var {} vs {var}", p.variance);
        }
    }
}

#[test]
fn log_marginal_likelihood_matches_determinant_oracle() {
    for (fi, f) in fixtures().iter().enumerate().filter(|(_, f)| f.data.len() <= 8) {
        let model = fit(&f.data, &f.map, f.params).unwrap();
        let k = oracle_gram(&f.data, &f.map, &f.params, model.diagonal_added());
        let ys: Vec<f64> = f.data.values().iter().map(|y| (y - model.y_mean()) / model.y_std()).collect();
        let n = ys.len() as f64;
        let want = -0.5 * dot(&ys, &mat_vec(&dense_inverse(&k), &ys))
            - 0.5 * log_abs_det(&k)
            - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
        let got = log_marginal_likelihood(&f.data, &f.map, f.params).unwrap();
        assert!((got - want).abs() < 1e-8, "fixture {fi}: {got} vs {want}");
    }
}

#[test]
fn warped_gram_is_psd_for_random_designs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..100 {
        let d = 1 + i % 3;
        let map = random_map(&mut rng, d, i % 3);
        let data = random_dataset(&mut rng, &map.search_box(), 50);
        let p = KernelParams::new(rng.random_range(0.1..10.0), rng.random_range(0.01..2.0), 0.0).unwrap();
        let mut k = gram_matrix(&data, &map, &p).unwrap();
        assert_eq!(k, k.transpose());
        for j in 0..50 {
            k[(j, j)] += 1e-8;
        }
        assert!(k.cholesky().is_some(), "design {i} not PSD");
    }
}

#[test]
fn kernel_is_exactly_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in 0..3 {
        let map = random_map(&mut rng, 2, kind);
        let space = map.search_box();
        let p = KernelParams::new(1.3, 0.2, 0.0).unwrap();
        for _ in 0..1000 {
            let x = space.sample_uniform(&mut rng);
            let y = space.sample_uniform(&mut rng);
            assert_eq!(
                warped_kernel(&x, &y, &map, &p).unwrap(),
                warped_kernel(&y, &x, &map, &p).unwrap()
            );
        }
    }
}

#[test]
fn uniform_warp_reduces_to_plain_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 1..=3 {
        let space = SearchBox::unit(d);
        let map = WarpMap::uniform(&space);
        let p = KernelParams::new(1.0, 0.3, 0.0).unwrap();
        for _ in 0..1000 {
            let x = space.sample_uniform(&mut rng);
            let y = space.sample_uniform(&mut rng);
            let a = warped_kernel(&x, &y, &map, &p).unwrap();
            assert!((a - se_kernel(&x, &y, &p)).abs() <= 1e-15);
        }
    }
}

#[test]
fn variance_is_never_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for f in fixtures() {
        let model = fit(&f.data, &f.map, f.params).unwrap();
        let space = f.map.search_box();
        for _ in 0..10_000 {
            assert!(model.predict(&space.sample_uniform(&mut rng)).unwrap().variance >= 0.0);
        }
        // training inputs are the likeliest place for rounding to go negative
        for x in f.data.points() {
            assert!(model.predict(x).unwrap().variance >= 0.0);
        }
    }
}

#[test]
fn shifting_outputs_shifts_means_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for f in fixtures().into_iter().filter(|f| f.data.len() > 1) {
        let c = 123.456;
        let shifted = Dataset::new(f.data.points().to_vec(), f.data.values().iter().map(|v| v + c).collect()).unwrap();
        let m0 = fit(&f.data, &f.map, f.params).unwrap();
        let m1 = fit(&shifted, &f.map, f.params).unwrap();
        let space = f.map.search_box();
        for _ in 0..50 {
            let q = space.sample_uniform(&mut rng);
            let (a, b) = (m0.predict(&q).unwrap(), m1.predict(&q).unwrap());
            assert!((b.mean - a.mean - c).abs() < 1e-10);
            assert!((b.variance - a.variance).abs() < 1e-10);
        }
    }
}

/// Draws one function from a GP with l = 0.3 at 30 inputs, refits, and returns
/// the recovered grid index minus the index nearest 0.3.
fn mle_offset(seed: u64) -> i64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = SearchBox::unit(1);
    let map = WarpMap::uniform(&space);
    let truth = KernelParams::new(1.0, 0.3, 0.0).unwrap();
    let pts: Vec<Vec<f64>> = (0..30).map(|_| space.sample_uniform(&mut rng)).collect();
    let holder = Dataset::new(pts.clone(), vec![0.0; 30]).unwrap();
    let mut k = gram_matrix(&holder, &map, &truth).unwrap();
    for i in 0..30 {
        k[(i, i)] += 1e-8;
    }
    let l = k.cholesky().unwrap().unpack();
    let z = nalgebra::DVector::from_iterator(30, (0..30).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)));
    let y = l * z;
    let data = Dataset::new(pts, y.iter().cloned().collect()).unwrap();
    let fitted = fit_lengthscale_mle(&data, &map, KernelParams::new(1.0, 0.1, 1e-6).unwrap()).unwrap();
    let grid = LengthscaleGrid::default().values();
    let nearest = grid
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 0.3).abs().total_cmp(&(b.1 - 0.3).abs()))
        .unwrap()
        .0 as i64;
    grid.iter().position(|&g| g == fitted.lengthscale).unwrap() as i64 - nearest
}

#[test]
fn mle_recovers_generating_lengthscale() {
    let off = mle_offset(0);
    assert!(off.abs() <= 1, "recovered lengthscale is {off} grid steps from 0.3");
}

#[test]
fn mle_estimator_is_centred_on_truth() {
    let offsets: Vec<i64> = (0..200).map(mle_offset).collect();
    let hits = offsets.iter().filter(|o| o.abs() <= 1).count();
    let mut sorted = offsets.clone();
    sorted.sort();
    assert!(sorted[100].abs() <= 1, "median offset {}", sorted[100]);
    assert!(hits >= 120, "only {hits}/200 draws within one grid step");
}
