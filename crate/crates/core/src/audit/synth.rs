// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ScalePolicy};
use crate::error::{Error, Result};
use crate::seed::{trial_rng, DATA_SALT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// `x = e1` with probability `(1 + gap) / 2`, otherwise `x = e2`.
    TwoPoint,
    /// `x = Σ_i ±√λ_i e_i` with independent signs: covariance
    /// `diag(gap + b, b, b/2, …)` with `b` chosen so that every point is a unit vector.
    Spiked,
}

/// A population distribution with analytically known covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub gap: f64,
    pub kind: SyntheticKind,
}

impl SyntheticSpec {
    pub fn new(dim: usize, gap: f64, kind: SyntheticKind) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter("synthetic data needs d >= 2".into()));
        }
        if !(gap > 0.0 && gap <= 1.0) {
            return Err(Error::InvalidParameter(format!("population gap must lie in (0, 1], got {gap}")));
        }
        Ok(SyntheticSpec { dim, gap, kind })
    }

    pub fn two_point(dim: usize, gap: f64) -> Result<Self> {
        Self::new(dim, gap, SyntheticKind::TwoPoint)
    }

    pub fn spiked(dim: usize, gap: f64) -> Result<Self> {
        Self::new(dim, gap, SyntheticKind::Spiked)
    }

    /// Diagonal of the population covariance `E[x xᵀ]`.
    pub fn population_eigenvalues(&self) -> Vec<f64> {
        let mut lam = vec![0.0; self.dim];
        match self.kind {
            SyntheticKind::TwoPoint => {
                lam[0] = (1.0 + self.gap) / 2.0;
                lam[1] = (1.0 - self.gap) / 2.0;
            }
            SyntheticKind::Spiked => {
                let b = 2.0 * (1.0 - self.gap) / (self.dim as f64 + 2.0);
                lam[0] = self.gap + b;
                lam[1] = b;
                lam[2..].iter_mut().for_each(|l| *l = b / 2.0);
            }
        }
        lam
    }

    /// `F(u) = −uᵀ C u`.
    pub fn population_risk(&self, u: &[f64]) -> f64 {
        -self
            .population_eigenvalues()
            .iter()
            .zip(u)
            .map(|(l, x)| l * x * x)
            .sum::<f64>()
    }

    /// `F(u*) = −λ_1` with `u* = e1`.
    pub fn optimal_risk(&self) -> f64 {
        -self.population_eigenvalues()[0]
    }

    /// `F(u) − F(u*)` for a unit vector `u`.
    pub fn excess_risk(&self, u: &[f64]) -> f64 {
        self.population_risk(u) - self.optimal_risk()
    }
}

/// `n` i.i.d. draws from `spec`. Two-point data is stored sparse.
pub fn synth_generate(spec: &SyntheticSpec, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = trial_rng(seed, DATA_SALT, 0);
    match spec.kind {
        SyntheticKind::TwoPoint => {
            let p_first = (1.0 + spec.gap) / 2.0;
            let triplets: Vec<(usize, usize, f64)> = (0..n)
                .map(|i| {
                    let col = if rng.random::<f64>() < p_first { 0 } else { 1 };
                    (i, col, 1.0)
                })
                .collect();
            Dataset::from_triplets(n, spec.dim, &triplets, ScalePolicy::Reject)
        }
        SyntheticKind::Spiked => {
            let amp: Vec<f64> = spec.population_eigenvalues().iter().map(|l| l.sqrt()).collect();
            let rows = (0..n)
                .map(|_| {
                    amp.iter()
                        .map(|a| if rng.random::<bool>() { *a } else { -*a })
                        .collect()
                })
                .collect();
            // Σλ = 1 up to round-off.
            Dataset::from_rows_with(rows, ScalePolicy::Rescale)
        }
    }
}
