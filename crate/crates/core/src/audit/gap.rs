// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Empirical checks on the eigengap: concentration around the population gap
//! and the effect of `k` edits on `n·GAP`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::synth::{synth_generate, SyntheticSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::sorted_symmetric_eigen;
use crate::pca::{dense_eig_oracle, DENSE_CAP};
use crate::seed::{map_trials, trial_rng, trial_seed, DATA_SALT};

/// Default constant in `n ≥ c · ln(d) / gap²`.
pub const BERNSTEIN_CONSTANT: f64 = 64.0;

/// Sample size at which the empirical gap is expected to exceed half the
/// population gap with high probability.
pub fn bernstein_sample_size(dim: usize, gap: f64, constant: f64) -> usize {
    (constant * (dim as f64).ln().max(1.0) / (gap * gap)).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConcentration {
    pub n: usize,
    pub trials: usize,
    pub population_gap: f64,
    /// Fraction of trials with `GAP(S) ≥ GAP(D)/2`.
    pub fraction: f64,
    pub min_gap: f64,
    pub median_gap: f64,
}

/// Draws `trials` samples of size `n` and reports how often the empirical
/// gap is at least half the population gap.
pub fn empirical_gap_concentration(
    spec: &SyntheticSpec,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<GapConcentration> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let gaps = map_trials(trials, |t| -> Result<f64> {
        let data = synth_generate(spec, n, trial_seed(seed, DATA_SALT, t))?;
        Ok(dense_eig_oracle(&data)?.gap(1))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let half = spec.gap / 2.0;
    let hits = gaps.iter().filter(|&&g| g >= half).count();
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(GapConcentration {
        n,
        trials,
        population_gap: spec.gap,
        fraction: hits as f64 / trials as f64,
        min_gap: sorted[0],
        median_gap: sorted[trials / 2],
    })
}

/// `λ_1(H) − λ_2(H)` for `H = Σ x xᵀ`, which equals `m · GAP` for `m` points.
pub fn scaled_gap_of(scatter: &DMatrix<f64>) -> f64 {
    let (vals, _) = sorted_symmetric_eigen(scatter);
    vals[0] - vals[1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCheckRecord {
    pub n: usize,
    pub gap: f64,
    pub edits: usize,
    pub trials: usize,
    /// Random neighbors violating `max(0, nG − k) ≤ m G' ≤ nG + k`.
    pub violations: usize,
    /// Smallest distance to either bound over the random neighbors (negative means violated).
    pub min_margin: f64,
    /// `|m G' − (nG + k)|` for `S' = S + k × u_1`.
    pub upper_attainment_error: f64,
    /// `|m G' − (nG − k)|` for `S' = S + k × u_2`, when `k ≤ nG`.
    pub lower_attainment_error: Option<f64>,
}

const BOUND_TOLERANCE: f64 = 1e-9;

/// Random point in the unit ball (direction uniform, radius uniform on [0,1]).
fn random_ball_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    let g = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = g.norm().max(f64::MIN_POSITIVE);
    g * (rng.random::<f64>() / norm)
}

/// Verifies the gap-perturbation bound on `trials` random `k`-edit neighbors
/// of `data`, and checks that adding `k` copies of the top (resp. second)
/// eigenvector moves `n·GAP` by exactly `+k` (resp. `−k`).
pub fn neighbor_gap_check(
    data: &Dataset,
    edits: usize,
    trials: usize,
    seed: u64,
) -> Result<GapCheckRecord> {
    if data.dim() > DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            dim: data.dim(),
            cap: DENSE_CAP,
        });
    }
    if data.dim() < 2 {
        return Err(Error::InvalidParameter("gap needs d >= 2".into()));
    }
    let n = data.len();
    let scatter = data.scatter_matrix();
    let (vals, vecs) = sorted_symmetric_eigen(&scatter);
    let t = vals[0] - vals[1];
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("neighbor_gap_check needs GAP(S) > 0".into()));
    }
    let rows = data.to_dense_rows();
    let k = edits as f64;

    let margins = map_trials(trials, |trial| {
        let mut rng = trial_rng(seed, DATA_SALT, trial);
        let mut h = scatter.clone();
        let mut live: Vec<usize> = (0..n).collect();
        let mut m = n;
        for _ in 0..edits {
            let remove = m > 1 && !live.is_empty() && rng.random::<bool>();
            if remove {
                let pick = rng.random_range(0..live.len());
                let x = DVector::from_column_slice(&rows[live.swap_remove(pick)]);
                h -= &x * x.transpose();
                m -= 1;
            } else {
                let x = random_ball_point(data.dim(), &mut rng);
                h += &x * x.transpose();
                m += 1;
            }
        }
        let mg = scaled_gap_of(&h);
        let lower = (t - k).max(0.0);
        let upper = t + k;
        (mg - lower).min(upper - mg)
    });
    let violations = margins.iter().filter(|&&m| m < -BOUND_TOLERANCE).count();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);

    let u1 = vecs.column(0).into_owned();
    let u2 = vecs.column(1).into_owned();
    let up = &scatter + (&u1 * u1.transpose()) * k;
    let upper_attainment_error = (scaled_gap_of(&up) - (t + k)).abs();
    let lower_attainment_error = (k <= t).then(|| {
        let down = &scatter + (&u2 * u2.transpose()) * k;
        (scaled_gap_of(&down) - (t - k)).abs()
    });

    Ok(GapCheckRecord {
        n,
        gap: t / n as f64,
        edits,
        trials,
        violations,
        min_margin,
        upper_attainment_error,
        lower_attainment_error,
    })
}
