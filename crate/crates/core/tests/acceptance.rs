// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use dppca::audit::{
    brute_force_local_sensitivity, calibrate_constant, calibration_corpus, empirical_gap_concentration,
    input_perturbation_baseline, neighbor_gap_check, privacy_audit, random_sparse, sample_complexity_sweep,
    synth_generate, utility_experiment, AuditSettings, SweepBudget, SyntheticSpec, CALIBRATION_BUDGET,
    CALIBRATION_MIN_SCALED_GAP, SUCCESS_PROBABILITY,
};
use dppca::linalg::{haar_orthogonal, orthonormality_defect};
use dppca::mechanism::{gaussian_noise, standard_cauchy, symmetrize};
use dppca::pca::PcaSolution;
use dppca::seed::{trial_rng, DATA_SALT, MECHANISM_SALT};
use dppca::sensitivity::{a_k, compute_beta, smooth_upper_bound_with_beta, CALIBRATION_CORPUS_MAX_IMPLIED_C};
use dppca::{
    dense_eig_oracle, dp_pca, required_sample_size, smooth_upper_bound, solve_pca, to_canonical_json, Dataset,
    Mode, NoisePolicy, PrivacyParams, ScalePolicy, SolverOptions, DEFAULT_C,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

type Outcome = (bool, String);

/// Largest `‖ŨᵀŨ − I‖` seen by any mechanism run in this suite.
static MAX_DEFECT: std::sync::Mutex<f64> = std::sync::Mutex::new(0.0);

fn note_defect(d: f64) {
    let mut m = MAX_DEFECT.lock().unwrap();
    *m = m.max(d);
}

fn dense_dataset(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = trial_rng(seed, DATA_SALT, 0);
    let basis = haar_orthogonal(d, &mut rng);
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let z = nalgebra::DVector::from_fn(d, |i, _| 0.8f64.powi(i as i32) * rng.sample::<f64, _>(StandardNormal));
            (&basis * z).iter().copied().collect()
        })
        .collect();
    let max = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    rows.iter_mut().for_each(|r| r.iter_mut().for_each(|v| *v /= max));
    Dataset::from_rows(rows).unwrap()
}

fn sparse_dataset(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = trial_rng(seed, DATA_SALT, 1);
    let mut triplets = Vec::new();
    for r in 0..n {
        let mut row = Vec::new();
        for c in 0..d {
            if rng.random::<f64>() < 0.3 {
                row.push((c, 0.85f64.powi(c as i32) * rng.random_range(-1.0..1.0)));
            }
        }
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt().max(1.0);
        triplets.extend(row.into_iter().map(|(c, v)| (r, c, v / norm)));
    }
    Dataset::from_triplets(n, d, &triplets, ScalePolicy::Reject).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = trial_rng(1, DATA_SALT, 99);
    let (mut worst_val, mut worst_align) = (0.0f64, 0.0f64);
    for i in 0..50u64 {
        let n = rng.random_range(20..=200);
        let d = rng.random_range(3..=50);
        let k = rng.random_range(1..=3usize).min(d - 1);
        let data = if i % 2 == 0 { dense_dataset(n, d, i) } else { sparse_dataset(n, d, i) };
        let sol = match solve_pca(&data, k, &SolverOptions::with_seed(i)) {
            Ok(s) => s,
            Err(e) => return (false, format!("dataset {i} (n={n}, d={d}, k={k}): {e}")),
        };
        let oracle = dense_eig_oracle(&data).unwrap();
        for j in 0..=k {
            worst_val = worst_val.max((sol.eigenvalues[j] - oracle.eigenvalues[j]).abs());
            let dot = sol.eigenvectors.column(j).dot(&oracle.eigenvectors.column(j));
            worst_align = worst_align.max(1.0 - dot.abs());
        }
    }
    (
        worst_val <= 1e-8 && worst_align <= 1e-8,
        format!("max |dλ| = {worst_val:.2e}, max 1-|<u,û>| = {worst_align:.2e} over 50 datasets"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = trial_rng(2, DATA_SALT, 0);
    let (mut violations, mut worst_attain, mut min_margin) = (0, 0.0f64, f64::INFINITY);
    let pairs = 1000;
    let per_base = 10;
    for b in 0..(pairs / per_base) as u64 {
        let d = rng.random_range(2..=6);
        let n = rng.random_range(5..=80);
        let gap = rng.random_range(0.1..=1.0);
        let spec = if b % 2 == 0 {
            SyntheticSpec::spiked(d, gap).unwrap()
        } else {
            SyntheticSpec::two_point(d, gap).unwrap()
        };
        let data = synth_generate(&spec, n, b).unwrap();
        if dense_eig_oracle(&data).unwrap().gap(1) <= 0.0 {
            continue;
        }
        let k = rng.random_range(1..=5);
        let rec = neighbor_gap_check(&data, k, per_base, b).unwrap();
        violations += rec.violations;
        min_margin = min_margin.min(rec.min_margin);
        worst_attain = worst_attain.max(rec.upper_attainment_error);
        if let Some(e) = rec.lower_attainment_error {
            worst_attain = worst_attain.max(e);
        }
    }
    (
        violations == 0 && worst_attain <= 1e-9,
        format!("{violations} violations, min margin {min_margin:.3e}, attainment error {worst_attain:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut checked = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let budgets = [
        PrivacyParams::approx(1.0, 1e-3, DEFAULT_C, 8).unwrap(),
        PrivacyParams::approx(0.3, 0.05, DEFAULT_C, 2).unwrap(),
        PrivacyParams::pure(1.0, DEFAULT_C, 8).unwrap(),
        PrivacyParams::pure(0.5, DEFAULT_C, 3).unwrap(),
    ];
    let betas: Vec<f64> = vec![
        compute_beta(&PrivacyParams::approx(1.0, 1e-3, DEFAULT_C, 8).unwrap()),
        compute_beta(&PrivacyParams::pure(1.0, DEFAULT_C, 8).unwrap()),
    ];
    let ns = [10usize, 17, 31, 64, 100, 250, 777, 1000, 3000, 10_000];
    let gaps = [0.01, 0.03, 0.1, 0.25, 0.5, 0.77, 1.0];
    for p in &budgets {
        for &beta in &betas {
            for &n in &ns {
                for &g in &gaps {
                    let t = n as f64 * g;
                    let u = smooth_upper_bound_with_beta(n, g, p, beta).smooth_bound;
                    for dn in [-1i64, 0, 1] {
                        let n2 = n as i64 + dn;
                        if n2 < 1 {
                            continue;
                        }
                        for dt in [-1.0, 0.0, 1.0] {
                            let t2 = (t + dt).clamp(0.0, n2 as f64);
                            let g2 = t2 / n2 as f64;
                            let u2 = smooth_upper_bound_with_beta(n2 as usize, g2, p, beta).smooth_bound;
                            let lo = (-beta).exp() * u2;
                            let hi = beta.exp() * u2;
                            let slack = 1e-12 * u.max(u2);
                            worst = worst.max(lo - u - slack).max(u - hi - slack);
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    (
        worst <= 0.0,
        format!("{checked} neighbor pairs, worst excess {worst:.2e} (must be <= 0)"),
    )
}

fn criterion_4() -> Outcome {
    let p = PrivacyParams::approx(1.0, 1e-3, DEFAULT_C, 2).unwrap();
    let mut instances = Vec::new();
    for seed in [777u64, 778] {
        for (label, data) in calibration_corpus(seed).unwrap() {
            let est = brute_force_local_sensitivity(&data, CALIBRATION_BUDGET, seed).unwrap();
            if est.gap * est.n as f64 >= CALIBRATION_MIN_SCALED_GAP {
                instances.push((label, est));
            }
        }
    }
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for (_, est) in &instances {
        let p = p.with_c(DEFAULT_C).unwrap();
        let bound = a_k(est.n, est.gap, 0, &p);
        worst_ratio = worst_ratio.max(est.estimate / bound);
        if est.estimate > bound {
            violations += 1;
        }
    }
    (
        instances.len() >= 30 && violations == 0,
        format!(
            "{} instances, {violations} above C/(nG) with C = {DEFAULT_C} (calibration max {CALIBRATION_CORPUS_MAX_IMPLIED_C:.4}), worst ratio {worst_ratio:.4}",
            instances.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = trial_rng(5, DATA_SALT, 0);
    let mut failures = 0;
    let mut worst = 0.0f64;
    for i in 0..100 {
        let d = rng.random_range(2..=30usize);
        let gap = rng.random_range(0.05..=1.0);
        let eps_p = rng.random_range(0.1..=1.0);
        let delta = 10f64.powf(rng.random_range(-8.0..=-1.0));
        let eps_g = rng.random_range(0.05..=0.5);
        let p = if i % 2 == 0 {
            PrivacyParams::approx(eps_p, delta, DEFAULT_C, d).unwrap()
        } else {
            PrivacyParams::pure(eps_p, DEFAULT_C, d).unwrap()
        };
        let n = required_sample_size(gap, eps_g, &p).unwrap() as usize;
        let u = smooth_upper_bound(n, gap, &p).smooth_bound;
        let target = match p.mode() {
            Mode::Approx => eps_g * eps_p / (d as f64).sqrt(),
            Mode::Pure => eps_g * eps_p / d as f64,
        };
        worst = worst.max(u / target);
        if u > target {
            failures += 1;
        }
    }
    (failures == 0, format!("{failures}/100 tuples above target, worst U/target {worst:.4}"))
}

fn criterion_6() -> Outcome {
    let mut rows = vec![vec![1.0, 0.0]; 19];
    rows.push(vec![0.0, 1.0]);
    let s = Dataset::from_rows(rows.clone()).unwrap();
    rows[0] = vec![0.0, 1.0];
    let s2 = Dataset::from_rows(rows).unwrap();
    let settings = AuditSettings::new(100_000, 60, 6);
    let approx = PrivacyParams::approx(1.0, 0.05, DEFAULT_C, 2).unwrap();
    let pure = PrivacyParams::pure(1.0, DEFAULT_C, 2).unwrap();

    let a = privacy_audit(&s, &s2, &approx, &settings).unwrap();
    let control = privacy_audit(&s, &s, &approx, &settings).unwrap();
    let pu = privacy_audit(&s, &s2, &pure, &settings).unwrap();
    for r in [&a, &control, &pu] {
        note_defect(r.max_orthonormality_defect);
    }
    (
        a.eps_hat <= 1.5 && control.eps_hat <= 0.05 && pu.eps_hat <= 1.5,
        format!(
            "APPROX eps_hat {:.4}, control {:.4}, PURE {:.4} (excluded bins {}/{}/{})",
            a.eps_hat, control.eps_hat, pu.eps_hat, a.excluded_bins, control.excluded_bins, pu.excluded_bins
        ),
    )
}

fn criterion_7() -> Outcome {
    let spec = SyntheticSpec::two_point(8, 0.5).unwrap();
    let approx = PrivacyParams::approx(1.0, 1e-3, DEFAULT_C, 8).unwrap();
    let pure = PrivacyParams::pure(1.0, DEFAULT_C, 8).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [&approx, &pure] {
        let n = required_sample_size(spec.gap / 2.0, 0.1, p).unwrap() as usize;
        let rep = utility_experiment(&spec, n, p, 0.1, 100, 7, NoisePolicy::Calibrated).unwrap();
        note_defect(rep.max_orthonormality_defect);
        ok &= rep.success_fraction >= SUCCESS_PROBABILITY;
        parts.push(format!(
            "{} n={n} success {:.2} median excess {:.2e}",
            p.mode(),
            rep.success_fraction,
            rep.median_excess_risk
        ));
    }
    (ok, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let spec = SyntheticSpec::two_point(8, 0.5).unwrap();
    let budget = SweepBudget {
        eps_p: 1.0,
        delta_p: 1e-3,
        c_sens: DEFAULT_C,
    };
    let grid = [250, 500, 1000, 2000, 4000];
    let rep = sample_complexity_sweep(&spec, budget, 0.1, &grid, 100, 8).unwrap();
    for r in &rep.records {
        note_defect(r.max_orthonormality_defect);
    }
    let curve = |mode: Mode| {
        rep.records
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| format!("{}:{:.2}", r.n, r.success_fraction))
            .collect::<Vec<_>>()
            .join(" ")
    };
    (
        rep.separation_holds,
        format!(
            "threshold n APPROX {:?}, PURE {:?}; APPROX [{}] PURE [{}]",
            rep.approx_threshold_n,
            rep.pure_threshold_n,
            curve(Mode::Approx),
            curve(Mode::Pure)
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

fn criterion_9() -> Outcome {
    const DRAWS: usize = 100_000;
    let mut rng = trial_rng(9, MECHANISM_SALT, 0);
    let cauchy_median = median((0..DRAWS).map(|_| standard_cauchy(&mut rng).abs()).collect());

    let p = PrivacyParams::approx(1.0, 0.01, DEFAULT_C, 10).unwrap();
    let profile = smooth_upper_bound(500, 0.3, &p);
    let draw = gaussian_noise(&profile, &p, DRAWS / 10, &mut rng).unwrap();
    let m = draw.matrix.len() as f64;
    let var = draw.matrix.iter().map(|v| v * v).sum::<f64>() / m;
    let expected = 5.0 * profile.smooth_bound * (2.0 * 200f64.ln()).sqrt();
    let scale_err = var.sqrt() / expected - 1.0;

    let sol = PcaSolution {
        k: 1,
        eigenvectors: DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        eigenvalues: vec![1.0, 0.0],
        gap: 1.0,
        degenerate: false,
        residual: 0.0,
        iterations: 0,
    };
    let plus = (0..DRAWS).filter(|_| symmetrize(&sol, &mut rng).1[(0, 0)] > 0.0).count();
    let freq = plus as f64 / DRAWS as f64;

    // Fresh mechanism runs in both modes, plus every run recorded by earlier criteria.
    let data = dense_dataset(200, 6, 9);
    for (i, p) in [
        PrivacyParams::approx(1.0, 1e-3, DEFAULT_C, 6).unwrap(),
        PrivacyParams::pure(1.0, DEFAULT_C, 6).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        for k in 1..=3 {
            for t in 0..50 {
                let mut rng = trial_rng(9, MECHANISM_SALT, (i * 1000 + k * 100 + t) as u64);
                let rec = dp_pca(&data, k, p, &SolverOptions::with_seed(t as u64), &mut rng).unwrap();
                note_defect(orthonormality_defect(&rec.u_tilde));
            }
        }
    }
    let defect = *MAX_DEFECT.lock().unwrap();
    (
        (cauchy_median - 1.0).abs() <= 0.02
            && scale_err.abs() <= 0.01
            && (freq - 0.5).abs() <= 0.02
            && defect <= 1e-10,
        format!(
            "Cauchy median |Z| {cauchy_median:.4}, Gaussian scale error {:+.3}%, sign frequency {freq:.4}, max orthonormality defect {defect:.2e}",
            100.0 * scale_err
        ),
    )
}

#[derive(Serialize)]
struct Rows<T: Serialize> {
    rows: T,
}

#[derive(Serialize)]
struct Release {
    direction: Vec<f64>,
    noise_scale: f64,
    smooth_bound: f64,
}

fn criterion_10() -> Outcome {
    let spec = SyntheticSpec::spiked(3, 0.5).unwrap();
    let data = synth_generate(&spec, 60, 10).unwrap();
    let (s, s2) = {
        let mut rows = vec![vec![1.0, 0.0]; 9];
        rows.push(vec![0.0, 1.0]);
        let a = Dataset::from_rows(rows.clone()).unwrap();
        rows[0] = vec![0.0, 1.0];
        (a, Dataset::from_rows(rows).unwrap())
    };
    let approx = PrivacyParams::approx(1.0, 1e-3, DEFAULT_C, 3).unwrap();
    let approx2 = PrivacyParams::approx(1.0, 0.05, DEFAULT_C, 2).unwrap();
    let budget = SweepBudget {
        eps_p: 1.0,
        delta_p: 1e-3,
        c_sens: DEFAULT_C,
    };

    let ops: Vec<(&str, Box<dyn Fn(u64) -> String>)> = vec![
        ("dp_pca", Box::new(|seed| {
            let mut rng = trial_rng(seed, MECHANISM_SALT, 0);
            let rec = dp_pca(&data, 1, &approx, &SolverOptions::with_seed(seed), &mut rng).unwrap();
            let r = Release {
                direction: rec.direction(),
                noise_scale: rec.noise_scale,
                smooth_bound: rec.profile.smooth_bound,
            };
            to_canonical_json("fit", &r, false).unwrap()
        })),
        ("synth_generate", Box::new(|seed| {
            to_canonical_json("data", &Rows { rows: synth_generate(&spec, 30, seed).unwrap().to_dense_rows() }, false).unwrap()
        })),
        ("random_sparse", Box::new(|seed| {
            to_canonical_json("data", &Rows { rows: random_sparse(30, 4, 0.4, seed).unwrap().to_dense_rows() }, false).unwrap()
        })),
        ("privacy_audit", Box::new(|seed| {
            let r = privacy_audit(&s, &s2, &approx2, &AuditSettings::new(2000, 10, seed)).unwrap();
            to_canonical_json("audit", &r, false).unwrap()
        })),
        ("utility_experiment", Box::new(|seed| {
            let r = utility_experiment(&spec, 200, &approx, 0.1, 10, seed, NoisePolicy::Calibrated).unwrap();
            to_canonical_json("utility", &r, false).unwrap()
        })),
        ("sample_complexity_sweep", Box::new(|seed| {
            let r = sample_complexity_sweep(&spec, budget, 0.1, &[100, 200], 5, seed).unwrap();
            to_canonical_json("sweep", &r, false).unwrap()
        })),
        ("neighbor_gap_check", Box::new(|seed| {
            to_canonical_json("gap", &neighbor_gap_check(&data, 2, 20, seed).unwrap(), false).unwrap()
        })),
        ("empirical_gap_concentration", Box::new(|seed| {
            to_canonical_json("gap", &empirical_gap_concentration(&spec, 50, 10, seed).unwrap(), false).unwrap()
        })),
        ("brute_force_local_sensitivity", Box::new(|seed| {
            to_canonical_json("brute", &brute_force_local_sensitivity(&data, 200, seed).unwrap(), false).unwrap()
        })),
        ("calibrate_constant", Box::new(|seed| {
            let corpus: Vec<_> = calibration_corpus(seed).unwrap().into_iter().take(4).collect();
            to_canonical_json("calibrate", &calibrate_constant(&corpus, 100, seed).unwrap(), false).unwrap()
        })),
        ("input_perturbation_baseline", Box::new(|seed| {
            let u = input_perturbation_baseline(&data, &approx, seed, NoisePolicy::Calibrated).unwrap();
            to_canonical_json("baseline", &Rows { rows: u }, false).unwrap()
        })),
    ];
    let mut bad = Vec::new();
    let mut seeded = 0;
    for (name, op) in &ops {
        let (a, b) = (op(42), op(42));
        if a != b {
            bad.push(*name);
        }
        seeded += usize::from(op(43) != a);
    }
    (
        bad.is_empty(),
        if bad.is_empty() {
            format!(
                "{} operations reproduce byte-identical JSON ({seeded} of them change with the seed)",
                ops.len()
            )
        } else {
            format!("not deterministic: {}", bad.join(", "))
        },
    )
}

fn main() {
    // Guard against a silently wrong global sensitivity in the printed bounds.
    assert!((PrivacyParams::approx(1.0, 0.5, 1.0, 2).unwrap().mode().global_sensitivity() - SQRT_2).abs() < 1e-15);

    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("eigensolver matches dense oracle", criterion_1),
        ("gap perturbation bound and attainment", criterion_2),
        ("smooth bound is beta-smooth", criterion_3),
        ("brute-force sensitivity below calibrated bound", criterion_4),
        ("sample-size formula meets its target", criterion_5),
        ("empirical privacy loss", criterion_6),
        ("utility at the required sample size", criterion_7),
        ("APPROX needs fewer samples than PURE", criterion_8),
        ("noise and symmetrization distributions", criterion_9),
        ("byte-identical output under a fixed seed", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
