//! Per-run trace files.
//!
//! CSV with header `iter,x_0,...,x_{d-1},y,best`. Floats are written in the
//! shortest form that parses back to the same value, so reading a trace
//! reproduces it bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;
use warpbo::driver::TraceRecord;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn header(dim: usize) -> String {
    let mut h = String::from("iter");
    for i in 0..dim {
        write!(h, ",x_{i}").unwrap();
    }
    h.push_str(",y,best");
    h
}

pub fn write_trace<W: Write>(mut out: W, dim: usize, trace: &[TraceRecord]) -> io::Result<()> {
    writeln!(out, "{}", header(dim))?;
    for r in trace {
        assert_eq!(r.point.len(), dim, "trace record has the wrong dimension");
        let mut line = r.iter.to_string();
        for v in &r.point {
            write!(line, ",{v}").unwrap();
        }
        write!(line, ",{},{}", r.value, r.best).unwrap();
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn write_trace_file(path: &Path, dim: usize, trace: &[TraceRecord]) -> io::Result<()> {
    write_trace(io::BufWriter::new(fs::File::create(path)?), dim, trace)
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut lines = input.lines();
    let head = lines.next().transpose()?.ok_or(TraceError::Format {
        line: 1,
        message: "empty file".into(),
    })?;
    let cols = head.split(',').count();
    if cols < 4 || head != header(cols - 3) {
        return Err(TraceError::Format {
            line: 1,
            message: format!("unexpected header `{head}`"),
        });
    }
    let dim = cols - 3;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let bad = |message: String| TraceError::Format { line: lineno, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(bad(format!("expected {cols} fields, found {}", fields.len())));
        }
        let iter = fields[0].parse().map_err(|e| bad(format!("iter: {e}")))?;
        let nums = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("`{f}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(TraceRecord {
            iter,
            point: nums[..dim].to_vec(),
            value: nums[dim],
            best: nums[dim + 1],
        });
    }
    Ok(out)
}

pub fn read_trace_file(path: &Path) -> Result<Vec<TraceRecord>, TraceError> {
    read_trace(BufReader::new(fs::File::open(path)?))
}
