//! Line-delimited JSON trajectory files.
//!
//! The first line is a header `{"format":"rankgrad-trajectory","version":1}`;
//! every following line is one [`TrajectoryRecord`]:
//!
//! ```text
//! {"t":1,"f":9871.2,"grad_norm":0.98,"queries":15,"eta":50.0,"mu":0.01,"accepted_exponent":2}
//! ```
//!
//! `f` is `null` when the objective is unknown, `queries` is cumulative, and
//! `accepted_exponent` is `null` when no shrunk step was accepted. Readers
//! reject unknown formats and versions newer than their own.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::step::IterationRecord;

pub const TRAJECTORY_FORMAT: &str = "rankgrad-trajectory";
pub const TRAJECTORY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: usize,
    pub f: Option<f64>,
    pub grad_norm: f64,
    pub queries: u64,
    pub eta: f64,
    pub mu: f64,
    pub accepted_exponent: Option<u32>,
}

impl From<&IterationRecord> for TrajectoryRecord {
    fn from(r: &IterationRecord) -> Self {
        Self {
            t: r.t,
            f: r.f_value,
            grad_norm: r.grad_norm,
            queries: r.total_queries,
            eta: r.eta,
            mu: r.mu,
            accepted_exponent: r.accepted_exponent,
        }
    }
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("missing header line")]
    MissingHeader,
    #[error("unsupported trajectory format {format:?} version {version}")]
    Unsupported { format: String, version: u32 },
}

pub fn write_trajectory<W: Write>(mut out: W, records: &[TrajectoryRecord]) -> io::Result<()> {
    let header = Header {
        format: TRAJECTORY_FORMAT.into(),
        version: TRAJECTORY_VERSION,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_trajectory<R: BufRead>(input: R) -> Result<Vec<TrajectoryRecord>, TrajectoryError> {
    let mut lines = input
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let (_, first) = lines.next().ok_or(TrajectoryError::MissingHeader)?;
    let header: Header = serde_json::from_str(&first?)
        .map_err(|source| TrajectoryError::Parse { line: 1, source })?;
    if header.format != TRAJECTORY_FORMAT || header.version > TRAJECTORY_VERSION {
        return Err(TrajectoryError::Unsupported {
            format: header.format,
            version: header.version,
        });
    }
    lines
        .map(|(i, line)| {
            serde_json::from_str(&line?).map_err(|source| TrajectoryError::Parse {
                line: i + 1,
                source,
            })
        })
        .collect()
}
