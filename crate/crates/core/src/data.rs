// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Datasets of points in the d-dimensional unit ball.
//!
//! Points are stored either as dense rows or as compressed sparse rows. The
//! empirical covariance `C = (1/n) Σ x xᵀ` is never materialized on the hot
//! path: [`Dataset::covariance_apply`] computes `C v` in `O(nnz)`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on the unit-ball constraint for floating-point round-off.
pub const BALL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// One point per line, comma-separated decimals, no header.
    DenseCsv,
    /// Header `n d nnz`, then `row col value` triplets (0-indexed).
    SparseCoo,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-csv" => Ok(InputFormat::DenseCsv),
            "sparse-coo" => Ok(InputFormat::SparseCoo),
            other => Err(Error::InvalidParameter(format!("unknown input format `{other}`"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::DenseCsv => "dense-csv",
            InputFormat::SparseCoo => "sparse-coo",
        })
    }
}

/// What to do with points outside the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalePolicy {
    /// Out-of-ball rows are an error.
    #[default]
    Reject,
    /// Divide every point by the largest norm when it exceeds 1.
    Rescale,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse {
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
}

/// Borrowed view of a single point.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse { cols: &'a [usize], vals: &'a [f64] },
}

impl Row<'_> {
    pub fn dot(&self, v: &[f64]) -> f64 {
        match *self {
            Row::Dense(x) => x.iter().zip(v).map(|(a, b)| a * b).sum(),
            Row::Sparse { cols, vals } => cols.iter().zip(vals).map(|(&c, &a)| a * v[c]).sum(),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        match *self {
            Row::Dense(x) => x.iter().map(|a| a * a).sum(),
            Row::Sparse { vals, .. } => vals.iter().map(|a| a * a).sum(),
        }
    }

    /// `out += alpha * x`
    pub fn axpy(&self, alpha: f64, out: &mut [f64]) {
        match *self {
            Row::Dense(x) => out.iter_mut().zip(x).for_each(|(o, a)| *o += alpha * a),
            Row::Sparse { cols, vals } => {
                for (&c, &a) in cols.iter().zip(vals) {
                    out[c] += alpha * a;
                }
            }
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        self.axpy(1.0, &mut out);
        out
    }
}

/// An immutable sample `S = (x_1, ..., x_n)` with every `‖x_i‖ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    dim: usize,
    storage: Storage,
}

impl Dataset {
    /// Builds a dense dataset, rejecting out-of-ball rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows_with(rows, ScalePolicy::Reject)
    }

    pub fn from_rows_with(rows: Vec<Vec<f64>>, policy: ScalePolicy) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
        }
        let mut flat = Vec::with_capacity(n * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("row {i} has non-finite entry {bad}")));
            }
            flat.extend(row);
        }
        let mut data = Dataset {
            n,
            dim,
            storage: Storage::Dense(flat),
        };
        data.enforce_ball(policy)?;
        Ok(data)
    }

    /// Builds a sparse dataset from `(row, col, value)` triplets. Repeated
    /// coordinates are summed.
    pub fn from_triplets(
        n: usize,
        dim: usize,
        triplets: &[(usize, usize, f64)],
        policy: ScalePolicy,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
        }
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= n || c >= dim {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({r}, {c}) outside a {n} x {dim} dataset"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite value at ({r}, {c})")));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut data = Dataset {
            n,
            dim,
            storage: Storage::Sparse {
                row_ptr,
                cols,
                vals,
            },
        };
        data.enforce_ball(policy)?;
        Ok(data)
    }

    /// Parses the `dense-csv` format.
    pub fn parse_dense_csv(text: &str, policy: ScalePolicy) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| parse_f64(tok, lineno + 1))
                .collect::<Result<Vec<f64>>>()?;
            if let Some(first) = rows.first().map(Vec::len) {
                if row.len() != first {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected {first} columns, found {}", row.len()),
                    });
                }
            }
            rows.push(row);
        }
        Self::from_rows_with(rows, policy)
    }

    /// Parses the `sparse-coo` format.
    pub fn parse_sparse_coo(text: &str, policy: ScalePolicy) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::EmptyDataset)?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(Error::Parse {
                line: hline,
                message: "header must be `n d nnz`".into(),
            });
        }
        let n = parse_usize(head[0], hline)?;
        let dim = parse_usize(head[1], hline)?;
        let nnz = parse_usize(head[2], hline)?;

        let mut triplets = Vec::with_capacity(nnz);
        for (lineno, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected `row col value`".into(),
                });
            }
            triplets.push((
                parse_usize(toks[0], lineno)?,
                parse_usize(toks[1], lineno)?,
                parse_f64(toks[2], lineno)?,
            ));
        }
        if triplets.len() != nnz {
            return Err(Error::Parse {
                line: hline,
                message: format!("header declares {nnz} entries, found {}", triplets.len()),
            });
        }
        Self::from_triplets(n, dim, &triplets, policy)
    }

    pub fn parse(text: &str, format: InputFormat, policy: ScalePolicy) -> Result<Self> {
        match format {
            InputFormat::DenseCsv => Self::parse_dense_csv(text, policy),
            InputFormat::SparseCoo => Self::parse_sparse_coo(text, policy),
        }
    }

    /// Reads a dataset file.
    pub fn ingest(path: impl AsRef<Path>, format: InputFormat, policy: ScalePolicy) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, format, policy)
    }

    fn enforce_ball(&mut self, policy: ScalePolicy) -> Result<()> {
        let mut max_norm = 0.0f64;
        for i in 0..self.n {
            let norm = self.row(i).norm_squared().sqrt();
            if norm > 1.0 + BALL_TOLERANCE && policy == ScalePolicy::Reject {
                return Err(Error::OutOfBall { row: i, norm });
            }
            max_norm = max_norm.max(norm);
        }
        if max_norm > 1.0 {
            let scale = 1.0 / max_norm;
            match &mut self.storage {
                Storage::Dense(v) => v.iter_mut().for_each(|x| *x *= scale),
                Storage::Sparse { vals, .. } => vals.iter_mut().for_each(|x| *x *= scale),
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; datasets hold at least one point.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.len(),
            Storage::Sparse { vals, .. } => vals.len(),
        }
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.storage {
            Storage::Dense(v) => Row::Dense(&v[i * self.dim..(i + 1) * self.dim]),
            Storage::Sparse {
                row_ptr,
                cols,
                vals,
            } => {
                let (a, b) = (row_ptr[i], row_ptr[i + 1]);
                Row::Sparse {
                    cols: &cols[a..b],
                    vals: &vals[a..b],
                }
            }
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    /// All points as dense vectors.
    pub fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_dense(self.dim)).collect()
    }

    /// Computes `C v = (1/n) Σ x_i ⟨x_i, v⟩` without forming `C`.
    pub fn covariance_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        self.covariance_apply_into(v, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`Dataset::covariance_apply`] for solver loops.
    pub(crate) fn covariance_apply_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for row in self.rows() {
            let proj = row.dot(v);
            if proj != 0.0 {
                row.axpy(proj, out);
            }
        }
        let inv_n = 1.0 / self.n as f64;
        out.iter_mut().for_each(|o| *o *= inv_n);
    }

    /// `H = Σ x_i x_iᵀ`, the unnormalized scatter matrix.
    pub fn scatter_matrix(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for row in self.rows() {
            let x = row.to_dense(self.dim);
            for a in 0..self.dim {
                if x[a] == 0.0 {
                    continue;
                }
                for b in 0..self.dim {
                    h[(a, b)] += x[a] * x[b];
                }
            }
        }
        h
    }

    /// Materialized empirical covariance `C = H / n`.
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        self.scatter_matrix() / self.n as f64
    }

    /// `tr(C) = (1/n) Σ ‖x_i‖²`.
    pub fn covariance_trace(&self) -> f64 {
        self.rows().map(|r| r.norm_squared()).sum::<f64>() / self.n as f64
    }

    /// Copy of the dataset with row `i` removed.
    pub fn without_row(&self, i: usize) -> Result<Self> {
        if i >= self.n {
            return Err(Error::InvalidParameter(format!("row {i} out of range")));
        }
        if self.n == 1 {
            return Err(Error::EmptyDataset);
        }
        match &self.storage {
            Storage::Dense(v) => {
                let mut flat = Vec::with_capacity((self.n - 1) * self.dim);
                flat.extend_from_slice(&v[..i * self.dim]);
                flat.extend_from_slice(&v[(i + 1) * self.dim..]);
                Ok(Dataset {
                    n: self.n - 1,
                    dim: self.dim,
                    storage: Storage::Dense(flat),
                })
            }
            Storage::Sparse { .. } => {
                let triplets = self.triplets_where(|r| r != i);
                let remap: Vec<(usize, usize, f64)> = triplets
                    .into_iter()
                    .map(|(r, c, v)| (if r > i { r - 1 } else { r }, c, v))
                    .collect();
                Self::from_triplets(self.n - 1, self.dim, &remap, ScalePolicy::Reject)
            }
        }
    }

    /// Copy of the dataset with `extra` appended. New points must lie in the ball.
    pub fn with_rows(&self, extra: &[Vec<f64>]) -> Result<Self> {
        for (j, x) in extra.iter().enumerate() {
            if x.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    actual: x.len(),
                });
            }
            let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1.0 + BALL_TOLERANCE {
                return Err(Error::OutOfBall {
                    row: self.n + j,
                    norm,
                });
            }
        }
        match &self.storage {
            Storage::Dense(v) => {
                let mut flat = v.clone();
                extra.iter().for_each(|x| flat.extend_from_slice(x));
                Ok(Dataset {
                    n: self.n + extra.len(),
                    dim: self.dim,
                    storage: Storage::Dense(flat),
                })
            }
            Storage::Sparse { .. } => {
                let mut triplets = self.triplets_where(|_| true);
                for (j, x) in extra.iter().enumerate() {
                    for (c, &v) in x.iter().enumerate() {
                        if v != 0.0 {
                            triplets.push((self.n + j, c, v));
                        }
                    }
                }
                Self::from_triplets(self.n + extra.len(), self.dim, &triplets, ScalePolicy::Reject)
            }
        }
    }

    /// Same points, dense storage.
    pub fn to_dense(&self) -> Self {
        Dataset::from_rows(self.to_dense_rows()).expect("points already validated")
    }

    /// Same points, sparse storage (explicit zeros dropped).
    pub fn to_sparse(&self) -> Self {
        let triplets: Vec<_> = self
            .triplets_where(|_| true)
            .into_iter()
            .filter(|t| t.2 != 0.0)
            .collect();
        Self::from_triplets(self.n, self.dim, &triplets, ScalePolicy::Reject)
            .expect("points already validated")
    }

    fn triplets_where(&self, keep: impl Fn(usize) -> bool) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in (0..self.n).filter(|&i| keep(i)) {
            match self.row(i) {
                Row::Dense(x) => out.extend(x.iter().enumerate().map(|(c, &v)| (i, c, v))),
                Row::Sparse { cols, vals } => {
                    out.extend(cols.iter().zip(vals).map(|(&c, &v)| (i, c, v)))
                }
            }
        }
        out
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let tok = tok.trim();
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            message: format!("`{tok}` is not a finite decimal"),
        }),
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("`{tok}` is not a non-negative integer"),
    })
}
