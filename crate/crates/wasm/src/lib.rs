// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Browser bindings. Every function returns a JSON string or an error message.

use std::f64::consts::PI;

use dppca::sensitivity::{a_k, sample_size_target};
use dppca::seed::{trial_rng, MECHANISM_SALT};
use dppca::{dp_pca, required_sample_size, smooth_upper_bound, to_canonical_json, Dataset, PrivacyParams, SolverOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest trial count the histogram accepts; keeps the page responsive.
pub const MAX_TRIALS: usize = 20_000;
/// Largest `n` accepted by the curve and histogram.
pub const MAX_N: usize = 100_000;

fn params(eps_p: f64, delta_p: f64, pure: bool, c_sens: f64, dim: usize) -> Result<PrivacyParams, String> {
    let p = if pure {
        PrivacyParams::pure(eps_p, c_sens, dim)
    } else {
        PrivacyParams::approx(eps_p, delta_p, c_sens, dim)
    };
    p.map_err(|e| e.to_string())
}

fn json<T: Serialize>(kind: &str, v: &T) -> Result<String, String> {
    to_canonical_json(kind, v, false).map_err(|e| e.to_string())
}

fn check_n(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must lie in 1..={MAX_N}"));
    }
    Ok(())
}

#[derive(Serialize)]
struct Curve {
    n: usize,
    gap: f64,
    beta: f64,
    smooth_bound: f64,
    argmax_k: usize,
    ls_bound: f64,
    /// `exp(−βk) A(k)` for `k = 0, 1, …`.
    terms: Vec<f64>,
    /// `A(k)` for the same `k`.
    a_k: Vec<f64>,
}

/// The terms `exp(−βk) A(k)` whose maximum is the smooth bound `U(S)`.
#[wasm_bindgen]
pub fn smooth_sensitivity_curve(
    n: usize,
    gap: f64,
    eps_p: f64,
    delta_p: f64,
    pure: bool,
    c_sens: f64,
    dim: usize,
) -> Result<String, String> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&gap) {
        return Err("gap must lie in [0, 1]".into());
    }
    let p = params(eps_p, delta_p, pure, c_sens, dim)?;
    let prof = smooth_upper_bound(n, gap, &p);
    // Enough of the range to show the peak and its decay.
    let k_max = n.min(((n as f64 * gap) * 1.5) as usize + 20);
    let a: Vec<f64> = (0..=k_max).map(|k| a_k(n, gap, k, &p)).collect();
    let terms = a
        .iter()
        .enumerate()
        .map(|(k, v)| (-prof.beta * k as f64).exp() * v)
        .collect();
    json(
        "curve",
        &Curve {
            n,
            gap: prof.gap,
            beta: prof.beta,
            smooth_bound: prof.smooth_bound,
            argmax_k: prof.argmax_k,
            ls_bound: prof.ls_bound,
            terms,
            a_k: a,
        },
    )
}

#[derive(Serialize)]
struct Histogram {
    n: usize,
    gap: f64,
    trials: usize,
    smooth_bound: f64,
    noise_scale: f64,
    /// Bin edges span `[0, π)`.
    counts: Vec<usize>,
    /// Folded angle of the true top direction (0 for the two-point data).
    true_angle: f64,
}

/// Histogram of the folded angle of private directions released on 2-D
/// two-point data with `n` points and empirical gap close to `gap`.
#[wasm_bindgen]
pub fn private_angle_histogram(
    n: usize,
    gap: f64,
    eps_p: f64,
    delta_p: f64,
    pure: bool,
    trials: usize,
    bins: usize,
    seed: u64,
) -> Result<String, String> {
    check_n(n)?;
    if trials == 0 || trials > MAX_TRIALS || bins == 0 || bins > 360 {
        return Err(format!("trials must lie in 1..={MAX_TRIALS} and bins in 1..=360"));
    }
    let on_first = (((1.0 + gap) / 2.0) * n as f64).round() as usize;
    let on_first = on_first.clamp(n.div_ceil(2), n);
    let mut rows = vec![vec![1.0, 0.0]; on_first];
    rows.extend(vec![vec![0.0, 1.0]; n - on_first]);
    let data = Dataset::from_rows(rows).map_err(|e| e.to_string())?;
    let p = params(eps_p, delta_p, pure, dppca::DEFAULT_C, 2)?;

    let mut counts = vec![0usize; bins];
    let mut first = None;
    for t in 0..trials as u64 {
        let mut rng = trial_rng(seed, MECHANISM_SALT, t);
        let rec = dp_pca(&data, 1, &p, &SolverOptions::with_seed(seed), &mut rng).map_err(|e| e.to_string())?;
        let u = rec.direction();
        let angle = u[1].atan2(u[0]).rem_euclid(PI);
        counts[((angle / PI * bins as f64) as usize).min(bins - 1)] += 1;
        first.get_or_insert((rec.profile, rec.noise_scale));
    }
    let (profile, noise_scale) = first.expect("trials >= 1");
    json(
        "histogram",
        &Histogram {
            n,
            gap: profile.gap,
            trials,
            smooth_bound: profile.smooth_bound,
            noise_scale,
            counts,
            true_angle: 0.0,
        },
    )
}

#[derive(Serialize)]
struct SampleSize {
    n: u64,
    /// The bound on `U(S)` the formula guarantees.
    target: f64,
    /// `U(S)` actually attained at that `n`.
    smooth_bound: f64,
}

/// Sample size at which the smooth bound falls below the utility target.
#[wasm_bindgen]
pub fn sample_size(
    gap: f64,
    eps_g: f64,
    eps_p: f64,
    delta_p: f64,
    pure: bool,
    c_sens: f64,
    dim: usize,
) -> Result<String, String> {
    let p = params(eps_p, delta_p, pure, c_sens, dim)?;
    let n = required_sample_size(gap, eps_g, &p).map_err(|e| e.to_string())?;
    let smooth_bound = if n as usize <= 50 * MAX_N {
        smooth_upper_bound(n as usize, gap, &p).smooth_bound
    } else {
        f64::NAN
    };
    json(
        "sample-size",
        &SampleSize {
            n,
            target: sample_size_target(eps_g, &p),
            smooth_bound,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(json: &str, key: &str) -> f64 {
        let pat = format!("\"{key}\":");
        let start = json.find(&pat).unwrap() + pat.len();
        let rest = &json[start..];
        let end = rest.find([',', '}']).unwrap();
        rest[..end].parse().unwrap()
    }

    #[test]
    fn curve_peaks_at_the_smooth_bound() {
        let out = smooth_sensitivity_curve(100, 0.5, 1.0, 0.01, false, 1.0, 2).unwrap();
        let u = field(&out, "smooth_bound");
        assert!(u > 0.0 && u <= 2f64.sqrt());
        assert!(out.contains("\"terms\":["));
        assert!(smooth_sensitivity_curve(0, 0.5, 1.0, 0.01, false, 1.0, 2).is_err());
    }

    #[test]
    fn histogram_is_seeded_and_complete() {
        let a = private_angle_histogram(200, 0.6, 1.0, 0.01, false, 300, 18, 4).unwrap();
        assert_eq!(a, private_angle_histogram(200, 0.6, 1.0, 0.01, false, 300, 18, 4).unwrap());
        let counts = &a[a.find("\"counts\":[").unwrap() + 10..];
        let counts = &counts[..counts.find(']').unwrap()];
        let total: usize = counts.split(',').map(|c| c.parse::<usize>().unwrap()).sum();
        assert_eq!(total, 300);
        assert!(private_angle_histogram(200, 0.6, 1.0, 0.01, false, MAX_TRIALS + 1, 18, 4).is_err());
    }

    #[test]
    fn sample_size_meets_target() {
        let out = sample_size(0.5, 0.1, 1.0, 0.01, false, 1.0, 4).unwrap();
        assert_eq!(field(&out, "n"), 578.0);
        assert!(field(&out, "smooth_bound") <= field(&out, "target"));
        assert!(sample_size(0.0, 0.1, 1.0, 0.01, false, 1.0, 4).is_err());
    }
}
