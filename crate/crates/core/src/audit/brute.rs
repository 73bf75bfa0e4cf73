// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force local sensitivity of the leading eigenvector and the
//! calibration of the sensitivity constant `C`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::synth::{synth_generate, SyntheticSpec};
use crate::data::{Dataset, ScalePolicy};
use crate::error::{Error, Result};
use crate::linalg::{sign_class_distance, sorted_symmetric_eigen};
use crate::pca::DEGENERATE_GAP;
use crate::seed::{map_trials, trial_rng, trial_seed, DATA_SALT};

/// Largest dimension the brute-force search accepts.
pub const BRUTE_FORCE_MAX_DIM: usize = 10;
/// Seed of the calibration run that produced [`crate::sensitivity::DEFAULT_C`].
pub const CALIBRATION_SEED: u64 = 20_260_101;
/// Candidate additions per instance in the calibration run.
pub const CALIBRATION_BUDGET: usize = 4000;
/// Safety factor over the largest implied constant.
pub const CALIBRATION_MARGIN: f64 = 1.2;
/// Instances enter the calibration only in the `1/(n·GAP)` regime.
pub const CALIBRATION_MIN_SCALED_GAP: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WorstNeighbor {
    None,
    Removal { index: usize },
    Addition { point: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSensitivityEstimate {
    pub n: usize,
    pub dim: usize,
    pub gap: f64,
    /// Largest class distance between the top eigenvector of `S` and of a neighbor.
    pub estimate: f64,
    /// `estimate · n · GAP(S)`.
    pub implied_c: f64,
    pub worst: WorstNeighbor,
    pub candidates: usize,
}

struct Searcher {
    scatter: DMatrix<f64>,
    n: usize,
    top: Vec<f64>,
}

impl Searcher {
    /// Class distance between the top eigenvector of `S` and that of `S + x`
    /// (or `S − x` when `sign < 0`). A degenerate neighbor counts as the global
    /// sensitivity because its solver output is arbitrary.
    fn distance(&self, x: &[f64], sign: f64) -> f64 {
        let xv = DVector::from_column_slice(x);
        let h = &self.scatter + (&xv * xv.transpose()) * sign;
        let m = if sign > 0.0 { self.n + 1 } else { self.n - 1 };
        let (vals, vecs) = sorted_symmetric_eigen(&h);
        if (vals[0] - vals[1]) / (m as f64) < DEGENERATE_GAP {
            return SQRT_2;
        }
        let top: Vec<f64> = vecs.column(0).iter().copied().collect();
        sign_class_distance(&self.top, &top)
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

/// Candidate unit directions for additions. `x` and `−x` give the same
/// rank-one update, so only a hemisphere is covered.
fn candidate_directions<R: Rng + ?Sized>(dim: usize, budget: usize, rng: &mut R) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0]],
        2 => (0..budget)
            .map(|j| {
                let th = PI * j as f64 / budget as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci lattice on the upper hemisphere.
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..budget)
                .map(|j| {
                    let z = 1.0 - (j as f64 + 0.5) / budget as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * j as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => (0..budget)
            .map(|_| unit((0..dim).map(|_| rng.sample(StandardNormal)).collect()))
            .collect(),
    }
}

/// Estimates `LS(S) = max_{d(S,S') ≤ 1} ‖[A(S)] − [A(S')]‖` for `k = 1` by
/// exhaustive removals plus a search over `budget` added unit vectors
/// (grid for `d ≤ 3`, random directions with local refinement otherwise),
/// followed by a radial sweep of the best direction. Exact eigenvectors come
/// from a dense decomposition of each neighbor.
pub fn brute_force_local_sensitivity(
    data: &Dataset,
    budget: usize,
    seed: u64,
) -> Result<LocalSensitivityEstimate> {
    let dim = data.dim();
    if dim > BRUTE_FORCE_MAX_DIM {
        return Err(Error::DenseCapExceeded {
            dim,
            cap: BRUTE_FORCE_MAX_DIM,
        });
    }
    if dim < 2 {
        return Err(Error::InvalidParameter("local sensitivity needs d >= 2".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidParameter("budget must be >= 1".into()));
    }
    let n = data.len();
    let scatter = data.scatter_matrix();
    let (vals, vecs) = sorted_symmetric_eigen(&scatter);
    let gap = (vals[0] - vals[1]) / n as f64;
    let searcher = Searcher {
        scatter,
        n,
        top: vecs.column(0).iter().copied().collect(),
    };
    let mut rng = trial_rng(seed, DATA_SALT, 0);
    let mut best = 0.0f64;
    let mut worst = WorstNeighbor::None;
    let mut candidates = 0usize;

    if n > 1 {
        let rows = data.to_dense_rows();
        let mut seen: Vec<&Vec<f64>> = Vec::new();
        for (i, x) in rows.iter().enumerate() {
            if seen.contains(&x) {
                continue;
            }
            seen.push(x);
            candidates += 1;
            let dist = searcher.distance(x, -1.0);
            if dist > best {
                best = dist;
                worst = WorstNeighbor::Removal { index: i };
            }
        }
    }

    let grid = dim <= 3;
    let coarse = if grid { budget } else { budget.div_ceil(2) };
    let mut scored: Vec<(f64, Vec<f64>)> = candidate_directions(dim, coarse, &mut rng)
        .into_iter()
        .map(|x| (searcher.distance(&x, 1.0), x))
        .collect();
    candidates += scored.len();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best_add = scored[0].clone();
    if !grid {
        // Local refinement around the best few directions with a shrinking radius.
        let seeds: Vec<Vec<f64>> = scored.iter().take(5).map(|s| s.1.clone()).collect();
        let per_seed = (budget - coarse) / seeds.len().max(1);
        for start in seeds {
            let mut cur = (searcher.distance(&start, 1.0), start);
            let mut radius = 0.3;
            for step in 0..per_seed {
                let trial = unit(
                    cur.1
                        .iter()
                        .map(|a| a + radius * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                );
                let dist = searcher.distance(&trial, 1.0);
                candidates += 1;
                if dist > cur.0 {
                    cur = (dist, trial);
                }
                if step % 20 == 19 {
                    radius *= 0.7;
                }
            }
            if cur.0 > best_add.0 {
                best_add = cur;
            }
        }
    } else {
        // Refine between grid neighbors of the best grid point.
        let mut radius = PI / budget as f64;
        let mut cur = best_add.clone();
        for _ in 0..60 {
            for delta in [-radius, radius] {
                let trial = rotate_toward_grid(&cur.1, delta);
                let dist = searcher.distance(&trial, 1.0);
                candidates += 1;
                if dist > cur.0 {
                    cur = (dist, trial);
                }
            }
            radius *= 0.7;
        }
        best_add = cur;
    }

    for step in 1..=20 {
        let r = step as f64 / 20.0;
        let x: Vec<f64> = best_add.1.iter().map(|a| a * r).collect();
        candidates += 1;
        let dist = searcher.distance(&x, 1.0);
        if dist > best_add.0 {
            best_add = (dist, x);
        }
    }
    if best_add.0 > best {
        best = best_add.0;
        worst = WorstNeighbor::Addition { point: best_add.1 };
    }

    Ok(LocalSensitivityEstimate {
        n,
        dim,
        gap,
        estimate: best,
        implied_c: best * n as f64 * gap,
        worst,
        candidates,
    })
}

/// Perturbs a grid direction within its plane (d = 2) or along the azimuth
/// and elevation (d = 3).
fn rotate_toward_grid(x: &[f64], delta: f64) -> Vec<f64> {
    if x.len() == 2 {
        let th = x[1].atan2(x[0]) + delta;
        vec![th.cos(), th.sin()]
    } else {
        let phi = x[1].atan2(x[0]) + delta;
        let el = x[2].clamp(-1.0, 1.0).asin() + delta / 2.0;
        vec![el.cos() * phi.cos(), el.cos() * phi.sin(), el.sin()]
    }
}

/// Hard instance: `n + 1` copies of `u` and `n` of `v`, against the swap.
/// Their leading eigenvectors are `u` and `v` for every `n`.
pub fn hard_pair(n: usize, u: &[f64], v: &[f64]) -> Result<(Dataset, Dataset)> {
    let mut a = vec![u.to_vec(); n + 1];
    a.extend(vec![v.to_vec(); n]);
    let mut b = vec![u.to_vec(); n];
    b.extend(vec![v.to_vec(); n + 1]);
    Ok((Dataset::from_rows(a)?, Dataset::from_rows(b)?))
}

/// Fixed corpus of two-point, random sparse and near-degenerate datasets in
/// `d ∈ {2, 3, 5}`.
pub fn calibration_corpus(seed: u64) -> Result<Vec<(String, Dataset)>> {
    let mut out = Vec::new();
    let mut idx = 0u64;
    let mut next_seed = || {
        idx += 1;
        trial_seed(seed, DATA_SALT, idx)
    };
    for &d in &[2usize, 3, 5] {
        for &g in &[0.3, 0.6, 0.9] {
            for &n in &[12usize, 40] {
                let spec = SyntheticSpec::two_point(d, g)?;
                out.push((format!("two-point d={d} gap={g} n={n}"), synth_generate(&spec, n, next_seed())?));
            }
        }
        for &n in &[20usize, 60] {
            out.push((format!("sparse d={d} n={n}"), random_sparse(n, d, 0.4, next_seed())?));
        }
        for &n in &[100usize, 400] {
            let spec = SyntheticSpec::spiked(d, 0.05)?;
            out.push((format!("near-degenerate d={d} n={n}"), synth_generate(&spec, n, next_seed())?));
        }
        for &n in &[30usize, 90] {
            let spec = SyntheticSpec::spiked(d, 0.5)?;
            out.push((format!("spiked d={d} gap=0.5 n={n}"), synth_generate(&spec, n, next_seed())?));
        }
    }
    Ok(out)
}

/// Random sparse rows with the given fill, scaled into the ball.
pub fn random_sparse(n: usize, dim: usize, fill: f64, seed: u64) -> Result<Dataset> {
    let mut rng = trial_rng(seed, DATA_SALT, 0);
    let mut triplets = Vec::new();
    for r in 0..n {
        let mut row = Vec::new();
        for c in 0..dim {
            if rng.random::<f64>() < fill {
                // Skewed toward the first axis so the spectrum has a gap.
                let weight = if c == 0 { 1.0 } else { 0.5 };
                row.push((c, weight * rng.random_range(-1.0..1.0)));
            }
        }
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        let scale = if norm > 1.0 { 1.0 / norm } else { 1.0 };
        triplets.extend(row.into_iter().map(|(c, v)| (r, c, v * scale)));
    }
    Dataset::from_triplets(n, dim, &triplets, ScalePolicy::Reject)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationInstance {
    pub label: String,
    pub n: usize,
    pub dim: usize,
    pub gap: f64,
    pub scaled_gap: f64,
    pub estimate: f64,
    pub implied_c: f64,
    /// Whether the instance is in the `n·GAP ≥ 4` regime used for calibration.
    pub in_regime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub seed: u64,
    pub budget: usize,
    pub instances: Vec<CalibrationInstance>,
    pub max_implied_c: f64,
    pub calibrated_c: f64,
}

/// Runs the brute-force search over `corpus` and sets
/// `C = 1.2 × max implied C` over instances with `n·GAP ≥ 4`.
pub fn calibrate_constant(
    corpus: &[(String, Dataset)],
    budget: usize,
    seed: u64,
) -> Result<CalibrationReport> {
    let instances = map_trials(corpus.len(), |i| -> Result<CalibrationInstance> {
        let (label, data) = &corpus[i as usize];
        let est = brute_force_local_sensitivity(data, budget, trial_seed(seed, DATA_SALT, i))?;
        let scaled_gap = est.gap * est.n as f64;
        Ok(CalibrationInstance {
            label: label.clone(),
            n: est.n,
            dim: est.dim,
            gap: est.gap,
            scaled_gap,
            estimate: est.estimate,
            implied_c: est.implied_c,
            in_regime: scaled_gap >= CALIBRATION_MIN_SCALED_GAP,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_implied_c = instances
        .iter()
        .filter(|i| i.in_regime)
        .map(|i| i.implied_c)
        .fold(0.0, f64::max);
    Ok(CalibrationReport {
        seed,
        budget,
        instances,
        max_implied_c,
        calibrated_c: CALIBRATION_MARGIN * max_implied_c,
    })
}
