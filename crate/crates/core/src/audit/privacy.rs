// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Empirical privacy-loss estimation on a pair of neighboring datasets.
//!
//! The mechanism is run many times on each dataset, a one-dimensional
//! statistic of the output is histogrammed, and the DP inequality
//! `P(E) ≤ e^ε Q(E) + δ` is tested on events `E` built from the bins. This is
//! a falsification tool: a large estimate is evidence of a bug, a small one is
//! not a proof.

use std::f64::consts::PI;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::orthonormality_defect;
use crate::mechanism::{dp_pca_with, NoisePolicy};
use crate::pca::SolverOptions;
use crate::seed::{map_trials, trial_rng, MECHANISM_SALT};
use crate::sensitivity::{Mode, PrivacyParams};

/// Bins with fewer hits than this in either histogram are excluded.
pub const MIN_BIN_OCCUPANCY: usize = 25;
/// Default allowance for binning and sampling error.
pub const DEFAULT_SLACK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSettings {
    pub k: usize,
    pub trials: usize,
    pub bins: usize,
    pub seed: u64,
    pub slack: f64,
    pub min_occupancy: usize,
    pub noise: NoisePolicy,
}

impl AuditSettings {
    pub fn new(trials: usize, bins: usize, seed: u64) -> Self {
        AuditSettings {
            k: 1,
            trials,
            bins,
            seed,
            slack: DEFAULT_SLACK,
            min_occupancy: MIN_BIN_OCCUPANCY,
            noise: NoisePolicy::Calibrated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditStatistic {
    /// `atan2(u₂, u₁)` folded to `[0, π)`, for d = 2.
    FoldedAngle,
    /// `arccos |u₁|` in `[0, π/2]`, for d = 3.
    PolarAngle,
}

impl AuditStatistic {
    fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(AuditStatistic::FoldedAngle),
            3 => Ok(AuditStatistic::PolarAngle),
            _ => Err(Error::InvalidParameter(format!(
                "privacy audit supports d in {{2, 3}}, got {dim}"
            ))),
        }
    }

    fn range(self) -> (f64, f64) {
        match self {
            AuditStatistic::FoldedAngle => (0.0, PI),
            AuditStatistic::PolarAngle => (0.0, PI / 2.0),
        }
    }

    fn eval(self, u: &[f64]) -> f64 {
        match self {
            AuditStatistic::FoldedAngle => u[1].atan2(u[0]).rem_euclid(PI),
            AuditStatistic::PolarAngle => u[0].abs().min(1.0).acos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
    pub statistic: AuditStatistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Estimated privacy loss; infinite when `diverged`.
    pub eps_hat: f64,
    pub trials: usize,
    pub bins: BinSpec,
    pub mode: Mode,
    pub eps_p: f64,
    pub delta_p: f64,
    pub slack: f64,
    /// Events whose log-ratio exceeds `eps_p + slack`.
    pub violations: usize,
    /// Bins dropped for low occupancy.
    pub excluded_bins: usize,
    /// Some bin with mass above δ on one side has no hits on the other.
    pub diverged: bool,
    /// Largest `|ln(p̂_b / q̂_b)|` over retained bins, without δ.
    pub max_bin_log_ratio: f64,
    pub max_orthonormality_defect: f64,
    pub notes: Vec<String>,
}

/// Result of [`estimate_privacy_loss`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEstimate {
    pub eps_hat: f64,
    pub excluded_bins: usize,
    pub diverged: bool,
    pub max_bin_log_ratio: f64,
    /// Event log-ratios above the threshold passed in.
    pub exceedances: usize,
}

/// Estimates `max_E ln((P(E) − δ) / Q(E))` over both directions of the pair.
///
/// Events are unions of the top-`j` retained bins ordered by `p̂_b / q̂_b`;
/// for a fixed histogram these include every single bin and the optimal
/// event for each ε. Bins below `min_occupancy` in either histogram are
/// excluded. A bin holding mass above δ on one side and none on the other
/// makes the estimate infinite.
pub fn estimate_privacy_loss(
    p_counts: &[usize],
    q_counts: &[usize],
    delta: f64,
    min_occupancy: usize,
    threshold: f64,
) -> LossEstimate {
    let p_total = p_counts.iter().sum::<usize>().max(1) as f64;
    let q_total = q_counts.iter().sum::<usize>().max(1) as f64;
    let mut excluded = 0;
    let mut diverged = false;
    let mut retained: Vec<(f64, f64)> = Vec::new();
    for (&pc, &qc) in p_counts.iter().zip(q_counts) {
        let (ph, qh) = (pc as f64 / p_total, qc as f64 / q_total);
        if pc >= min_occupancy && qc >= min_occupancy {
            retained.push((ph, qh));
            continue;
        }
        if pc + qc > 0 {
            excluded += 1;
        }
        if (pc >= min_occupancy && qc == 0 && ph > delta)
            || (qc >= min_occupancy && pc == 0 && qh > delta)
        {
            diverged = true;
        }
    }

    let max_bin_log_ratio = retained
        .iter()
        .map(|(p, q)| (p / q).ln().abs())
        .fold(0.0, f64::max);

    let mut eps_hat = 0.0f64;
    let mut exceedances = 0;
    for flip in [false, true] {
        let mut pairs: Vec<(f64, f64)> = retained
            .iter()
            .map(|&(p, q)| if flip { (q, p) } else { (p, q) })
            .collect();
        pairs.sort_by(|a, b| (b.0 / b.1).total_cmp(&(a.0 / a.1)));
        let (mut pe, mut qe) = (0.0, 0.0);
        for (p, q) in pairs {
            pe += p;
            qe += q;
            if pe > delta {
                let ratio = ((pe - delta) / qe).ln();
                eps_hat = eps_hat.max(ratio);
                if ratio > threshold {
                    exceedances += 1;
                }
            }
        }
    }
    LossEstimate {
        eps_hat: if diverged { f64::INFINITY } else { eps_hat },
        excluded_bins: excluded,
        diverged,
        max_bin_log_ratio,
        exceedances,
    }
}

/// True when `a` and `b` differ by adding, removing or replacing one point.
pub fn within_one_edit(a: &Dataset, b: &Dataset) -> bool {
    if a.dim() != b.dim() {
        return false;
    }
    let sort = |d: &Dataset| {
        let mut rows = d.to_dense_rows();
        rows.sort_by(|x, y| {
            x.iter()
                .zip(y)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        rows
    };
    let (ra, rb) = (sort(a), sort(b));
    // Multiset difference sizes via a merge walk.
    let (mut i, mut j, mut only_a, mut only_b) = (0, 0, 0, 0);
    while i < ra.len() && j < rb.len() {
        match ra[i]
            .iter()
            .zip(&rb[j])
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
        {
            None => {
                i += 1;
                j += 1;
            }
            Some(std::cmp::Ordering::Less) => {
                only_a += 1;
                i += 1;
            }
            Some(_) => {
                only_b += 1;
                j += 1;
            }
        }
    }
    only_a += ra.len() - i;
    only_b += rb.len() - j;
    only_a <= 1 && only_b <= 1
}

fn histogram(
    data: &Dataset,
    p: &PrivacyParams,
    settings: &AuditSettings,
    statistic: AuditStatistic,
    side: u64,
) -> Result<(Vec<usize>, f64)> {
    let (lo, hi) = statistic.range();
    let width = (hi - lo) / settings.bins as f64;
    let master = settings.seed.wrapping_add(side.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let outcomes = map_trials(settings.trials, |t| -> Result<(usize, f64)> {
        let mut rng = trial_rng(master, MECHANISM_SALT, t);
        let opts = SolverOptions::with_seed(rng.next_u64());
        let rec = dp_pca_with(data, settings.k, p, &opts, &mut rng, settings.noise)?;
        let stat = statistic.eval(rec.u_tilde.column(0).as_slice());
        let bin = (((stat - lo) / width) as usize).min(settings.bins - 1);
        Ok((bin, orthonormality_defect(&rec.u_tilde)))
    });
    let mut counts = vec![0usize; settings.bins];
    let mut defect = 0.0f64;
    for o in outcomes {
        let (bin, d) = o?;
        counts[bin] += 1;
        defect = defect.max(d);
    }
    Ok((counts, defect))
}

/// Runs the mechanism `trials` times on each dataset and estimates the
/// privacy loss from histograms of the output angle.
pub fn privacy_audit(
    s: &Dataset,
    s_neighbor: &Dataset,
    p: &PrivacyParams,
    settings: &AuditSettings,
) -> Result<AuditReport> {
    if settings.k != 1 {
        return Err(Error::InvalidParameter("privacy audit bins k = 1 outputs only".into()));
    }
    if settings.trials == 0 || settings.bins == 0 {
        return Err(Error::InvalidParameter("trials and bins must be >= 1".into()));
    }
    if !within_one_edit(s, s_neighbor) {
        return Err(Error::InvalidParameter("datasets are not neighbors".into()));
    }
    let statistic = AuditStatistic::for_dim(s.dim())?;
    let (p_counts, dp) = histogram(s, p, settings, statistic, 0)?;
    let (q_counts, dq) = histogram(s_neighbor, p, settings, statistic, 1)?;
    let est = estimate_privacy_loss(
        &p_counts,
        &q_counts,
        p.delta_p(),
        settings.min_occupancy,
        p.eps_p() + settings.slack,
    );
    if est.excluded_bins == settings.bins {
        return Err(Error::InsufficientTrials(format!(
            "no bin reaches {} hits on both sides with {} trials",
            settings.min_occupancy, settings.trials
        )));
    }
    let mut notes = Vec::new();
    if est.diverged {
        notes.push("a bin with mass on one side has no hits on the other".to_string());
    }
    if est.excluded_bins > 0 {
        notes.push(format!(
            "{} bins excluded below occupancy {}",
            est.excluded_bins, settings.min_occupancy
        ));
    }
    let (lo, hi) = statistic.range();
    Ok(AuditReport {
        eps_hat: est.eps_hat,
        trials: settings.trials,
        bins: BinSpec {
            count: settings.bins,
            lo,
            hi,
            statistic,
        },
        mode: p.mode(),
        eps_p: p.eps_p(),
        delta_p: p.delta_p(),
        slack: settings.slack,
        violations: if est.diverged { est.exceedances.max(1) } else { est.exceedances },
        excluded_bins: est.excluded_bins,
        diverged: est.diverged,
        max_bin_log_ratio: est.max_bin_log_ratio,
        max_orthonormality_defect: dp.max(dq),
        notes,
    })
}
