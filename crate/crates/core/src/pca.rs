// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Non-private PCA.
//!
//! [`solve_pca`] runs power iteration with projection deflation against the
//! already-converged vectors, touching the data only through
//! [`Dataset::covariance_apply`]. It returns `k + 1` eigenpairs so that the
//! eigengap `λ_k − λ_{k+1}` is available to the mechanism.
//! [`dense_eig_oracle`] materializes the covariance and is the reference the
//! solver is tested against.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{orthonormality_defect, sorted_symmetric_eigen};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest dimension for which the covariance may be materialized.
pub const DENSE_CAP: usize = 500;
/// Gaps below this are reported as exactly zero.
pub const DEGENERATE_GAP: f64 = 1e-12;

const MIN_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on `‖C u − λ u‖` for every returned pair.
    pub tol: f64,
    /// Per-pair iteration cap; `None` uses [`default_max_iter`].
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iter: None,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(seed: u64) -> Self {
        SolverOptions {
            seed,
            ..Self::default()
        }
    }
}

/// `10 ⌈ln(d / tol) / max(gap, 1e-3)⌉`, floored at 1000.
pub fn default_max_iter(dim: usize, tol: f64, gap_estimate: Option<f64>) -> usize {
    let gap = gap_estimate.unwrap_or(0.0).max(1e-3);
    let iters = 10.0 * ((dim as f64 / tol).ln() / gap).ceil();
    (iters as usize).max(MIN_MAX_ITER)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaSolution {
    pub k: usize,
    /// d × (k+1); the first `k` columns are the empirical minimizer.
    pub eigenvectors: DMatrix<f64>,
    /// `λ_1 ≥ … ≥ λ_{k+1}`.
    pub eigenvalues: Vec<f64>,
    /// `λ_k − λ_{k+1}`, clamped to zero below [`DEGENERATE_GAP`].
    pub gap: f64,
    pub degenerate: bool,
    /// Largest `‖C u − λ u‖` over the returned pairs.
    pub residual: f64,
    pub iterations: usize,
}

impl PcaSolution {
    /// The d × k orthonormal minimizer `Û`.
    pub fn u_hat(&self) -> DMatrix<f64> {
        self.eigenvectors.columns(0, self.k).into_owned()
    }
}

/// Top `k + 1` eigenpairs of the empirical covariance by power iteration.
pub fn solve_pca(data: &Dataset, k: usize, opts: &SolverOptions) -> Result<PcaSolution> {
    let d = data.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidParameter(format!(
            "rank k = {k} must satisfy 1 <= k < d = {d}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {} must be positive", opts.tol)));
    }
    let max_iter = opts
        .max_iter
        .unwrap_or_else(|| default_max_iter(d, opts.tol, None));
    // Residuals of earlier pairs leak into later ones through the deflation;
    // iterating to a tighter internal target keeps the true residual under tol.
    let inner_tol = opts.tol / (2.0 * ((k + 1) as f64).sqrt());

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut found: Vec<DVector<f64>> = Vec::with_capacity(k + 1);
    let mut total_iters = 0usize;
    let mut cv = vec![0.0; d];

    for pair in 0..=k {
        let mut v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        project_out(&mut v, &found);
        normalize_or_pick(&mut v, &found);

        let mut best = f64::INFINITY;
        let mut converged = false;
        for _ in 0..max_iter {
            total_iters += 1;
            data.covariance_apply_into(v.as_slice(), &mut cv);
            let mut w = DVector::from_column_slice(&cv);
            project_out(&mut w, &found);
            let lambda = v.dot(&w);
            let residual = (&w - lambda * &v).norm();
            best = best.min(residual);
            if residual <= inner_tol {
                converged = true;
                break;
            }
            let norm = w.norm();
            if norm == 0.0 {
                converged = true;
                break;
            }
            v = w / norm;
            // Re-orthogonalize so round-off cannot drift back toward found vectors.
            project_out(&mut v, &found);
            let renorm = v.norm();
            v /= renorm;
        }
        if !converged {
            return Err(Error::NotConverged {
                pair,
                iterations: max_iter,
                residual: best,
            });
        }
        found.push(v);
    }

    let mut pairs: Vec<(f64, DVector<f64>, f64)> = found
        .into_iter()
        .map(|u| {
            data.covariance_apply_into(u.as_slice(), &mut cv);
            let cu = DVector::from_column_slice(&cv);
            let lambda = u.dot(&cu);
            let residual = (&cu - lambda * &u).norm();
            (lambda, u, residual)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let residual = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    if residual > opts.tol {
        let pair = pairs.iter().position(|p| p.2 == residual).unwrap_or(0);
        return Err(Error::NotConverged {
            pair,
            iterations: total_iters,
            residual,
        });
    }
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = DMatrix::from_columns(&pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>());
    let raw_gap = eigenvalues[k - 1] - eigenvalues[k];
    let degenerate = raw_gap < DEGENERATE_GAP;
    Ok(PcaSolution {
        k,
        eigenvectors,
        eigenvalues,
        gap: if degenerate { 0.0 } else { raw_gap },
        degenerate,
        residual,
        iterations: total_iters,
    })
}

fn project_out(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for b in basis {
        let c = b.dot(v);
        v.axpy(-c, b, 1.0);
    }
}

/// Normalizes `v`; if it vanished after projection, falls back to the first
/// coordinate vector not spanned by `basis`.
fn normalize_or_pick(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    let norm = v.norm();
    if norm > 1e-8 {
        *v /= norm;
        return;
    }
    for i in 0..v.len() {
        let mut e = DVector::zeros(v.len());
        e[i] = 1.0;
        project_out(&mut e, basis);
        let n = e.norm();
        if n > 1e-8 {
            *v = e / n;
            return;
        }
    }
}

/// Full spectrum of a materialized covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSpectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
}

impl DenseSpectrum {
    pub fn gap(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1] - self.eigenvalues[k]
    }

    pub fn top_vector(&self) -> DVector<f64> {
        self.eigenvectors.column(0).into_owned()
    }
}

/// Exact symmetric eigendecomposition of `C`, for `d ≤ DENSE_CAP`.
pub fn dense_eig_oracle(data: &Dataset) -> Result<DenseSpectrum> {
    dense_eig_oracle_with_cap(data, DENSE_CAP)
}

pub fn dense_eig_oracle_with_cap(data: &Dataset, cap: usize) -> Result<DenseSpectrum> {
    if data.dim() > cap {
        return Err(Error::DenseCapExceeded {
            dim: data.dim(),
            cap,
        });
    }
    let (eigenvalues, eigenvectors) = sorted_symmetric_eigen(&data.covariance_matrix());
    Ok(DenseSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// `F̂(U) = −tr(U Uᵀ C) = −(1/n) Σ ‖Uᵀ x_i‖²`.
pub fn empirical_risk(data: &Dataset, u: &DMatrix<f64>) -> Result<f64> {
    if u.nrows() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            actual: u.nrows(),
        });
    }
    let defect = orthonormality_defect(u);
    if defect > 1e-8 {
        return Err(Error::NotOrthonormal(defect));
    }
    let cols: Vec<Vec<f64>> = u.column_iter().map(|c| c.iter().copied().collect()).collect();
    let total: f64 = data
        .rows()
        .map(|x| cols.iter().map(|c| x.dot(c).powi(2)).sum::<f64>())
        .sum();
    Ok(-total / data.len() as f64)
}
