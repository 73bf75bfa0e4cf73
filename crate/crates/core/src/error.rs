// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("row {row} has norm {norm} and lies outside the unit ball")]
    OutOfBall { row: usize, norm: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "power iteration for eigenpair {pair} did not converge after {iterations} iterations \
         (best residual {residual:e})"
    )]
    NotConverged {
        pair: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("dimension {dim} exceeds the dense cap of {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("matrix is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("operation requires {expected} mode but parameters are {actual}")]
    ModeMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("matrix is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("insufficient trials: {0}")]
    InsufficientTrials(String),
}

impl Error {
    /// True for failures of the numerical machinery as opposed to bad input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::RankDeficient(_) | Error::InsufficientTrials(_)
        )
    }
}
