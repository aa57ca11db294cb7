mod common;

use common::{ks_critical_1pct, ks_statistic};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use warpbo::acq::MaximizerBudget;
use warpbo::bench;
use warpbo::driver::{initial_design, make_shifted_prior, run_bo, run_prior_search, BoConfig, Direction, RunResult};
use warpbo::space::SearchBox;
use warpbo::warp::{PriorSpec, WarpMap};

fn marginal(points: &[Vec<f64>], d: usize) -> Vec<f64> {
    points.iter().map(|p| p[d]).collect()
}

fn uniform_cdf(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |x| ((x - a) / (b - a)).clamp(0.0, 1.0)
}

#[test]
fn initial_design_is_uniform() {
    let space = SearchBox::new(vec![(0.0, 2.0); 3]).unwrap();
    let pts = initial_design(&space, 10_000, &mut ChaCha8Rng::seed_from_u64(77));
    for d in 0..3 {
        let ks = ks_statistic(&marginal(&pts, d), uniform_cdf(0.0, 2.0));
        assert!(ks < ks_critical_1pct(10_000), "dim {d}: {ks}");
    }
}

fn draws(warp: &WarpMap, seed: u64) -> Vec<Vec<f64>> {
    let space = warp.search_box();
    let config = BoConfig {
        n_init: 1,
        budget: 10_001,
        seed,
        ..BoConfig::default()
    };
    let r = run_prior_search(&mut |_: &[f64]| 0.0, &space, warp, &config).unwrap();
    assert!(r.is_complete());
    r.trace[1..].iter().map(|t| t.point.clone()).collect()
}

#[test]
fn prior_search_with_uniform_priors_is_random_search() {
    let space = SearchBox::new(vec![(-5.0, 10.0), (0.0, 15.0)]).unwrap();
    let pts = draws(&WarpMap::uniform(&space), 3);
    for (d, &(a, b)) in space.bounds().iter().enumerate() {
        let ks = ks_statistic(&marginal(&pts, d), uniform_cdf(a, b));
        assert!(ks < ks_critical_1pct(10_000), "dim {d}: {ks}");
    }
}

#[test]
fn prior_search_follows_truncated_normal() {
    let prior = PriorSpec::truncated_normal(0.4, 1.0, -2.0, 2.0).unwrap();
    let gamma = PriorSpec::truncated_gamma(2.0, 0.5, 0.0, 10.0).unwrap();
    let warp = WarpMap::new(vec![prior, gamma]).unwrap();
    let pts = draws(&warp, 4);
    for (d, p) in warp.priors().iter().enumerate() {
        let ks = ks_statistic(&marginal(&pts, d), |x| p.cdf(x).unwrap());
        assert!(ks < ks_critical_1pct(10_000), "dim {d}: {ks}");
    }
}

fn check_bookkeeping(r: &RunResult, space: &SearchBox) {
    assert!(r.is_complete(), "{:?}", r.failure);
    assert_eq!(r.trace.len(), r.config.budget);
    assert_eq!(r.wall_times.len(), r.config.budget);
    for (i, t) in r.trace.iter().enumerate() {
        assert_eq!(t.iter, i + 1);
        assert!(space.contains(&t.point));
    }
    for w in r.trace.windows(2) {
        match r.config.direction {
            Direction::Minimize => assert!(w[1].best <= w[0].best),
            Direction::Maximize => assert!(w[1].best >= w[0].best),
        }
    }
}

#[test]
fn warped_bo_on_gaussian3d_improves_on_its_design() {
    let b = bench::Benchmark::by_name("gaussian3d").unwrap();
    let space = SearchBox::new(b.bounds.clone()).unwrap();
    let warp = make_shifted_prior(&space, &b.known_minimizers[0], 0.05, 1.0).unwrap();
    for (i, p) in warp.priors().iter().enumerate() {
        assert_eq!(p.bounds(), space.bounds()[i]);
    }
    for seed in 0..3 {
        let config = BoConfig {
            seed,
            budget: 20,
            maximizer: MaximizerBudget {
                candidates: 500,
                restarts: 4,
                iterations: 100,
                simplex_fraction: 0.02,
            },
            ..BoConfig::default()
        };
        let mut f = |x: &[f64]| b.evaluate(x);
        let r = run_bo(&mut f, &space, &warp, &config).unwrap();
        check_bookkeeping(&r, &space);
        let design_best = r.best_at(config.n_init).unwrap();
        assert!(r.final_best().unwrap() < design_best, "seed {seed}");
        assert!(r.final_best().unwrap() < 0.1, "seed {seed}: {}", r.final_best().unwrap());
    }
}

#[test]
fn prior_search_bookkeeping_and_shared_design() {
    let b = bench::Benchmark::by_name("branin").unwrap();
    let space = SearchBox::new(b.bounds.clone()).unwrap();
    let warp = make_shifted_prior(&space, &b.known_minimizers[1], 0.05, 0.25).unwrap();
    let config = BoConfig {
        seed: 11,
        budget: 34,
        ..BoConfig::default()
    };
    let r = run_prior_search(&mut |x: &[f64]| b.evaluate(x), &space, &warp, &config).unwrap();
    check_bookkeeping(&r, &space);
    let design = initial_design(&space, 4, &mut ChaCha8Rng::seed_from_u64(11));
    for (t, x) in r.trace.iter().zip(&design) {
        assert_eq!(&t.point, x);
    }
}
