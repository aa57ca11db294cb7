//! Runs every (method, seed) cell of an experiment and writes its outputs.

use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;
use warpbo::bench::Benchmark;
use warpbo::driver::{run_bo, run_prior_search, BoConfig, Objective, ObjectiveError, RunResult};
use warpbo::warp::WarpMap;

use crate::aggregate::{aggregate, write_aggregate_file, AggregateError};
use crate::config::{Experiment, Method, ObjectiveSpec};
use crate::trace::write_trace_file;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build thread pool: {0}")]
    Pool(String),
    #[error("{method} seed {seed} failed: {message}")]
    Run {
        method: &'static str,
        seed: u64,
        message: String,
    },
    #[error("aggregating {method}: {source}")]
    Aggregate {
        method: &'static str,
        #[source]
        source: AggregateError,
    },
}

pub fn trace_file_name(method: Method, seed: u64) -> String {
    format!("trace_{}_seed{seed}.csv", method.name())
}

pub fn aggregate_file_name(method: Method) -> String {
    format!("aggregate_{}.csv", method.name())
}

pub struct CellResult {
    pub method: Method,
    pub seed: u64,
    pub result: Result<RunResult, String>,
}

struct Builtin(Benchmark);

impl Objective for Builtin {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64, ObjectiveError> {
        Ok(self.0.evaluate(x))
    }
}

fn make_objective(exp: &Experiment) -> Result<Box<dyn Objective>, String> {
    match &exp.objective {
        ObjectiveSpec::Builtin(name) => Benchmark::by_name(name)
            .map(|b| Box::new(Builtin(b)) as Box<dyn Objective>)
            .ok_or_else(|| format!("unknown builtin objective `{name}`")),
        ObjectiveSpec::External { external } => {
            let timeout = Duration::from_secs_f64(exp.eval_timeout_secs);
            crate::external::ExternalObjective::spawn(external, timeout)
                .map(|o| Box::new(o) as Box<dyn Objective>)
                .map_err(|e| e.to_string())
        }
    }
}

/// Runs one method for one seed. All methods seeded alike draw the same
/// initial design.
pub fn run_cell(exp: &Experiment, method: Method, seed: u64) -> Result<RunResult, String> {
    let config = BoConfig { seed, ..exp.base.clone() };
    let mut objective = make_objective(exp)?;
    let result = match method {
        Method::WarpedBo => run_bo(objective.as_mut(), &exp.space, &exp.warp, &config),
        Method::StandardBo => run_bo(objective.as_mut(), &exp.space, &WarpMap::uniform(&exp.space), &config),
        Method::PriorSearch => run_prior_search(objective.as_mut(), &exp.space, &exp.warp, &config),
    };
    result.map_err(|e| e.to_string())
}

fn write_trace(dir: &Path, method: Method, seed: u64, r: &RunResult, dim: usize) -> Result<(), ExperimentError> {
    let path = dir.join(trace_file_name(method, seed));
    write_trace_file(&path, dim, &r.trace).map_err(|source| ExperimentError::Io { path, source })
}

/// Runs all cells on up to `jobs` threads, writes one trace per cell and one
/// aggregate per method into `exp.output_dir`. Traces of failed runs are
/// still written (partial); the first failure in (method, seed) order is
/// returned as the error after all cells finish.
pub fn run_experiment(exp: &Experiment, jobs: usize) -> Result<Vec<CellResult>, ExperimentError> {
    let dir = &exp.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
        path: dir.clone(),
        source,
    })?;
    let cells: Vec<(Method, u64)> = exp
        .methods
        .iter()
        .flat_map(|&m| (0..exp.runs as u64).map(move |i| (m, exp.base_seed.wrapping_add(i))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let dim = exp.space.dim();
    let results: Vec<CellResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(method, seed)| {
                let result = run_cell(exp, method, seed);
                let written = match &result {
                    Ok(r) => write_trace(dir, method, seed, r, dim).map_err(|e| e.to_string()),
                    Err(_) => Ok(()),
                };
                let result = match (result, written) {
                    (Ok(r), Ok(())) => match &r.failure {
                        Some(f) => Err(f.clone()),
                        None => Ok(r),
                    },
                    (Ok(_), Err(e)) | (Err(e), _) => Err(e),
                };
                CellResult { method, seed, result }
            })
            .collect()
    });

    for &method in &exp.methods {
        let traces: Option<Vec<_>> = results
            .iter()
            .filter(|c| c.method == method)
            .map(|c| c.result.as_ref().ok().map(|r| r.trace.clone()))
            .collect();
        if let Some(traces) = traces {
            let rows = aggregate(&traces).map_err(|source| ExperimentError::Aggregate {
                method: method.name(),
                source,
            })?;
            let path = dir.join(aggregate_file_name(method));
            write_aggregate_file(&path, &rows).map_err(|source| ExperimentError::Io { path, source })?;
        }
    }

    if let Some(c) = results.iter().find(|c| c.result.is_err()) {
        return Err(ExperimentError::Run {
            method: c.method.name(),
            seed: c.seed,
            message: c.result.as_ref().err().cloned().unwrap_or_default(),
        });
    }
    Ok(results)
}

/// Recomputes `aggregate_<method>.csv` from the trace files found in `dir`.
/// Returns the methods aggregated and their run counts.
pub fn aggregate_dir(dir: &Path) -> Result<Vec<(Method, usize)>, Box<dyn std::error::Error>> {
    let mut found: Vec<(Method, u64, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(stem) = name.strip_prefix("trace_").and_then(|s| s.strip_suffix(".csv")) else {
            continue;
        };
        let Some((method, seed)) = stem.rsplit_once("_seed") else {
            continue;
        };
        if let (Some(m), Ok(s)) = (Method::from_name(method), seed.parse()) {
            found.push((m, s, path));
        }
    }
    found.sort();
    let mut summary = Vec::new();
    let mut methods: Vec<Method> = found.iter().map(|f| f.0).collect();
    methods.dedup();
    for m in methods {
        let traces = found
            .iter()
            .filter(|f| f.0 == m)
            .map(|f| crate::trace::read_trace_file(&f.2).map_err(|e| format!("{}: {e}", f.2.display())))
            .collect::<Result<Vec<_>, _>>()?;
        let rows = aggregate(&traces).map_err(|e| format!("{}: {e}", m.name()))?;
        write_aggregate_file(&dir.join(aggregate_file_name(m)), &rows)?;
        summary.push((m, traces.len()));
    }
    Ok(summary)
}
