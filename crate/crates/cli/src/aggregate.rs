//! Cross-seed summaries of best-so-far traces.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;
use warpbo::driver::TraceRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub iter: usize,
    pub mean_best: f64,
    /// Sample standard deviation over runs divided by `sqrt(runs)`.
    pub stderr_best: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error("no traces to aggregate")]
    Empty,
    #[error("trace {index} has {got} rows, expected {expected}")]
    LengthMismatch { index: usize, expected: usize, got: usize },
}

/// Mean and standard error of best-so-far at every iteration. Each column is
/// summed in sorted order, so the result does not depend on trace order.
pub fn aggregate(traces: &[Vec<TraceRecord>]) -> Result<Vec<AggregateRow>, AggregateError> {
    let first = traces.first().ok_or(AggregateError::Empty)?;
    let len = first.len();
    if let Some((index, t)) = traces.iter().enumerate().find(|(_, t)| t.len() != len) {
        return Err(AggregateError::LengthMismatch {
            index,
            expected: len,
            got: t.len(),
        });
    }
    let runs = traces.len() as f64;
    Ok((0..len)
        .map(|i| {
            let mut col: Vec<f64> = traces.iter().map(|t| t[i].best).collect();
            col.sort_by(f64::total_cmp);
            let mean = col.iter().sum::<f64>() / runs;
            let stderr = if traces.len() > 1 {
                let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
                (ss / (runs - 1.0)).sqrt() / runs.sqrt()
            } else {
                0.0
            };
            AggregateRow {
                iter: first[i].iter,
                mean_best: mean,
                stderr_best: stderr,
            }
        })
        .collect())
}

pub fn write_aggregate<W: Write>(mut out: W, rows: &[AggregateRow]) -> io::Result<()> {
    writeln!(out, "iter,mean_best,stderr_best")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.iter, r.mean_best, r.stderr_best)?;
    }
    out.flush()
}

pub fn write_aggregate_file(path: &Path, rows: &[AggregateRow]) -> io::Result<()> {
    write_aggregate(io::BufWriter::new(fs::File::create(path)?), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(bests: &[f64]) -> Vec<TraceRecord> {
        bests
            .iter()
            .enumerate()
            .map(|(i, &b)| TraceRecord {
                iter: i + 1,
                point: vec![0.0],
                value: b,
                best: b,
            })
            .collect()
    }

    #[test]
    fn hand_examples() {
        let one = aggregate(&[trace(&[5.0, 4.0])]).unwrap();
        assert_eq!(one[1], AggregateRow { iter: 2, mean_best: 4.0, stderr_best: 0.0 });
        let two = aggregate(&[trace(&[1.0]), trace(&[3.0])]).unwrap();
        assert_eq!(two[0].mean_best, 2.0);
        assert!((two[0].stderr_best - 1.0).abs() < 1e-15);
        let same = aggregate(&vec![trace(&[0.3, 0.2, 0.1]); 5]).unwrap();
        assert!(same.iter().all(|r| r.stderr_best == 0.0));
    }

    #[test]
    fn errors() {
        assert_eq!(aggregate(&[]), Err(AggregateError::Empty));
        assert_eq!(
            aggregate(&[trace(&[1.0, 2.0]), trace(&[1.0])]),
            Err(AggregateError::LengthMismatch { index: 1, expected: 2, got: 1 })
        );
    }

    #[test]
    fn order_of_traces_does_not_matter() {
        let ts: Vec<_> = [0.1, 0.7, 1e-9, 3.3, 0.2 + 0.1, 1e6].iter().map(|&v| trace(&[v, v / 3.0])).collect();
        let mut rev = ts.clone();
        rev.reverse();
        rev.swap(0, 3);
        assert_eq!(aggregate(&ts).unwrap(), aggregate(&rev).unwrap());
    }
}
