//! Bayesian optimisation that folds an expert's prior belief about the
//! optimum's location into the Gaussian-process kernel.
//!
//! Each search dimension gets a prior over where the optimum lies. Inputs are
//! pushed through the prior CDFs before the squared-exponential kernel sees
//! them, which stretches likely regions and compresses unlikely ones. The
//! acquisition function and the outer loop are otherwise standard.
//!
//! ```
//! use warpbo::{bench, driver, space::SearchBox, warp::WarpMap};
//!
//! let space = SearchBox::new(vec![(-2.0, 2.0); 3]).unwrap();
//! let warp = driver::make_shifted_prior(&space, &[0.2; 3], 0.05, 1.0).unwrap();
//! let config = driver::BoConfig { budget: 8, ..driver::BoConfig::default() };
//! let run = driver::run_bo(&mut |x: &[f64]| bench::gaussian3d(x), &space, &warp, &config).unwrap();
//! assert_eq!(run.trace.len(), 8);
//! ```

pub mod acq;
pub mod bench;
pub mod driver;
pub mod gp;
pub mod space;
pub mod warp;

pub use acq::{AcquisitionSpec, MaximizerBudget};
pub use driver::{BoConfig, Direction, RunResult};
pub use gp::{Dataset, GpModel, KernelParams};
pub use space::SearchBox;
pub use warp::{PriorKind, PriorSpec, WarpMap};
