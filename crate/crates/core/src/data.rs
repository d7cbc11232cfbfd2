//! Count-series files and small text formats used by the command line.
//!
//! A count file holds whitespace-separated nonnegative integers; lines whose
//! first non-blank character is `#` are comments.

use std::path::Path;

use serde::Serialize;

use crate::error::{InarError, Result};

const BOSTON: &str = include_str!("../data/boston_armed_robberies.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountSeries {
    pub values: Vec<u64>,
    pub source: String,
}

impl CountSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn parse_counts(text: &str, source: impl Into<String>) -> Result<CountSeries> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_start();
        if line.starts_with('#') {
            continue;
        }
        for tok in line.split_whitespace() {
            let v = tok.parse::<u64>().map_err(|_| InarError::Parse {
                line: i + 1,
                msg: format!("`{tok}` is not a nonnegative integer"),
            })?;
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(InarError::EmptyFile);
    }
    Ok(CountSeries { values, source: source.into() })
}

pub fn load_counts(path: impl AsRef<Path>) -> Result<CountSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_counts(&text, path.display().to_string())
}

/// Monthly armed robberies in Boston, 1966-1975 (118 counts), vendored.
pub fn boston() -> CountSeries {
    parse_counts(BOSTON, "boston_armed_robberies.txt").expect("vendored data parses")
}

/// Comma-separated, nondecreasing, finite, nonnegative times, e.g. `0.5,1,2`.
pub fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let grid = s
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            match tok.parse::<f64>() {
                Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
                _ => Err(InarError::InvalidArgument(format!("invalid time `{tok}`"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(InarError::InvalidArgument("time grid must be sorted".into()));
    }
    Ok(grid)
}

/// Comma-separated positive integers, e.g. `200,1000,5000`.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            match tok.parse::<usize>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(InarError::InvalidArgument(format!("invalid positive integer `{tok}`"))),
            }
        })
        .collect()
}
