// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Utility and sample-complexity experiments on synthetic populations.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::synth::{synth_generate, SyntheticSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{orthonormality_defect, sorted_symmetric_eigen};
use crate::mechanism::{dp_pca_with, NoisePolicy};
use crate::pca::{SolverOptions, DENSE_CAP};
use crate::seed::{map_trials, trial_rng, trial_seed, DATA_SALT, MECHANISM_SALT};
use crate::sensitivity::{Mode, PrivacyParams};

/// "Constant probability" for sweeps.
pub const SUCCESS_PROBABILITY: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub n: usize,
    pub mode: Mode,
    pub runs: usize,
    pub eps_g: f64,
    /// Fraction of runs with excess population risk at most `eps_g`.
    pub success_fraction: f64,
    pub median_excess_risk: f64,
    pub q10_excess_risk: f64,
    pub q90_excess_risk: f64,
    pub max_orthonormality_defect: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Draws a fresh dataset of size `n` per run, releases a private direction,
/// and scores it against the analytic population risk.
pub fn utility_experiment(
    spec: &SyntheticSpec,
    n: usize,
    p: &PrivacyParams,
    eps_g: f64,
    runs: usize,
    seed: u64,
    noise: NoisePolicy,
) -> Result<UtilityReport> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    if p.dim() != spec.dim {
        return Err(Error::DimensionMismatch {
            expected: spec.dim,
            actual: p.dim(),
        });
    }
    let outcomes = map_trials(runs, |r| -> Result<(f64, f64)> {
        let data = synth_generate(spec, n, trial_seed(seed, DATA_SALT, r))?;
        let mut rng = trial_rng(seed, MECHANISM_SALT, r);
        let opts = SolverOptions::with_seed(rng.next_u64());
        let rec = dp_pca_with(&data, 1, p, &opts, &mut rng, noise)?;
        Ok((spec.excess_risk(&rec.direction()), orthonormality_defect(&rec.u_tilde)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut risks: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    risks.sort_by(f64::total_cmp);
    let hits = risks.iter().filter(|&&r| r <= eps_g).count();
    Ok(UtilityReport {
        n,
        mode: p.mode(),
        runs,
        eps_g,
        success_fraction: hits as f64 / runs as f64,
        median_excess_risk: quantile(&risks, 0.5),
        q10_excess_risk: quantile(&risks, 0.1),
        q90_excess_risk: quantile(&risks, 0.9),
        max_orthonormality_defect: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
    })
}

/// Privacy budget shared by both modes of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepBudget {
    pub eps_p: f64,
    /// Used by the APPROX curve only.
    pub delta_p: f64,
    pub c_sens: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dim: usize,
    pub gap: f64,
    pub eps_g: f64,
    pub budget: SweepBudget,
    pub records: Vec<UtilityReport>,
    /// Smallest grid `n` reaching [`SUCCESS_PROBABILITY`], per mode.
    pub approx_threshold_n: Option<usize>,
    pub pure_threshold_n: Option<usize>,
    /// APPROX reaches the threshold at a strictly smaller grid `n` than PURE.
    pub separation_holds: bool,
}

/// Runs [`utility_experiment`] for both modes at every `n` in the grid.
pub fn sample_complexity_sweep(
    spec: &SyntheticSpec,
    budget: SweepBudget,
    eps_g: f64,
    n_grid: &[usize],
    runs: usize,
    seed: u64,
) -> Result<SweepReport> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n grid must be non-empty and strictly increasing".into()));
    }
    let approx = PrivacyParams::approx(budget.eps_p, budget.delta_p, budget.c_sens, spec.dim)?;
    let pure = PrivacyParams::pure(budget.eps_p, budget.c_sens, spec.dim)?;
    let mut records = Vec::with_capacity(2 * n_grid.len());
    for &n in n_grid {
        for p in [&approx, &pure] {
            records.push(utility_experiment(spec, n, p, eps_g, runs, seed, NoisePolicy::Calibrated)?);
        }
    }
    let threshold = |mode: Mode| {
        records
            .iter()
            .find(|r| r.mode == mode && r.success_fraction >= SUCCESS_PROBABILITY)
            .map(|r| r.n)
    };
    let approx_threshold_n = threshold(Mode::Approx);
    let pure_threshold_n = threshold(Mode::Pure);
    let separation_holds = match (approx_threshold_n, pure_threshold_n) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    };
    Ok(SweepReport {
        dim: spec.dim,
        gap: spec.gap,
        eps_g,
        budget,
        records,
        approx_threshold_n,
        pure_threshold_n,
        separation_holds,
    })
}

/// Comparison baseline: top eigenvector of the covariance plus a symmetric
/// Gaussian matrix with entry scale `√(2 ln(1.25/δ)) · (2/n) / ε`.
pub fn input_perturbation_baseline(
    data: &Dataset,
    p: &PrivacyParams,
    seed: u64,
    noise: NoisePolicy,
) -> Result<Vec<f64>> {
    if p.mode() != Mode::Approx {
        return Err(Error::ModeMismatch {
            expected: Mode::Approx.name(),
            actual: p.mode().name(),
        });
    }
    let d = data.dim();
    if d > DENSE_CAP {
        return Err(Error::DenseCapExceeded { dim: d, cap: DENSE_CAP });
    }
    if p.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: p.dim(),
        });
    }
    let sigma = match noise {
        NoisePolicy::Calibrated => {
            (2.0 * (1.25 / p.delta_p()).ln()).sqrt() * (2.0 / data.len() as f64) / p.eps_p()
        }
        #[cfg(any(test, feature = "noise-override"))]
        NoisePolicy::Off => 0.0,
    };
    let mut rng = trial_rng(seed, MECHANISM_SALT, 0);
    let mut e = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        for i in 0..=j {
            let z = sigma * rng.sample::<f64, _>(StandardNormal);
            e[(i, j)] = z;
            e[(j, i)] = z;
        }
    }
    let (_, vecs) = sorted_symmetric_eigen(&(data.covariance_matrix() + e));
    Ok(vecs.column(0).iter().copied().collect())
}
