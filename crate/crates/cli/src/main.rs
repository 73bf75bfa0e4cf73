// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! `dppca` command-line front end.
//!
//! Output schema (version 1). Every object carries `schema_version` and
//! `kind`, followed by the payload fields:
//!
//! - `fit`: budget, `n`, `dim`, `k`, `seed`, `gap`, `beta`, `ls_bound`,
//!   `smooth_bound`, `argmax_k`, `noise_scale`, `resampled`, and `subspace`
//!   (the private columns). `trace` is present only with `--trace`.
//! - `sensitivity`: budget and the sensitivity profile.
//! - `audit`, `sweep`, `calibrate`: the corresponding audit reports.
//! - `error`: `code` (`invalid-input` or `numerical`) and `message`.
//!
//! Floats use 17 significant digits; non-finite values are `null`.

mod args;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use dppca::audit::{
    calibrate_constant, calibration_corpus, privacy_audit, sample_complexity_sweep, AuditSettings, SweepBudget,
    SyntheticSpec,
};
use dppca::linalg::columns;
use dppca::sensitivity::SensitivityProfile;
use dppca::seed::{trial_rng, MECHANISM_SALT};
use dppca::{dp_pca, solve_pca, smooth_upper_bound, to_canonical_json, Dataset, Mode, PrivacyParams, ScalePolicy, SolverOptions};
use serde::Serialize;

use args::{Cli, Command, InputArgs, OutputArgs, PrivacyArgs, SolverArgs};

enum Failure {
    Invalid(String),
    Numerical(String),
}

impl From<dppca::Error> for Failure {
    fn from(e: dppca::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Serialize)]
struct Budget {
    mode: Mode,
    eps_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_p: Option<f64>,
    c_sens: f64,
}

#[derive(Serialize)]
struct Trace {
    warning: &'static str,
    eigenvalues: Vec<f64>,
    u_hat: Vec<Vec<f64>>,
    symmetrizer: Vec<Vec<f64>>,
    u_bar: Vec<Vec<f64>>,
    noise: Vec<Vec<f64>>,
    residual: f64,
    iterations: usize,
    degenerate: bool,
}

#[derive(Serialize)]
struct FitOutput {
    #[serde(flatten)]
    budget: Budget,
    n: usize,
    dim: usize,
    k: usize,
    seed: u64,
    gap: f64,
    beta: f64,
    ls_bound: f64,
    smooth_bound: f64,
    argmax_k: usize,
    noise_scale: f64,
    resampled: bool,
    /// Private columns, one vector per component.
    subspace: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Trace>,
}

#[derive(Serialize)]
struct SensitivityOutput {
    eps_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_p: Option<f64>,
    c_sens: f64,
    dim: usize,
    k: usize,
    #[serde(flatten)]
    profile: SensitivityProfile,
}

#[derive(Serialize)]
struct ErrorOutput<'a> {
    code: &'a str,
    message: &'a str,
}

fn privacy(args: &PrivacyArgs, dim: usize) -> CliResult<PrivacyParams> {
    match (args.pure, args.delta_p) {
        (true, Some(_)) => Err(Failure::Invalid("--pure and --delta-p are mutually exclusive".into())),
        (true, None) => Ok(PrivacyParams::pure(args.eps_p, args.c_sens, dim)?),
        (false, Some(delta)) => Ok(PrivacyParams::approx(args.eps_p, delta, args.c_sens, dim)?),
        (false, None) => Err(Failure::Invalid("--delta-p is required unless --pure is given".into())),
    }
}

fn budget(p: &PrivacyParams) -> Budget {
    Budget {
        mode: p.mode(),
        eps_p: p.eps_p(),
        delta_p: (p.mode() == Mode::Approx).then(|| p.delta_p()),
        c_sens: p.c_sens(),
    }
}

fn load(args: &InputArgs, path: &Path) -> CliResult<Dataset> {
    let policy = if args.rescale { ScalePolicy::Rescale } else { ScalePolicy::Reject };
    Dataset::ingest(path, args.format.into(), policy)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn solver(args: &SolverArgs, seed: u64) -> SolverOptions {
    SolverOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        seed,
    }
}

fn emit<T: Serialize>(kind: &str, value: &T, out: &OutputArgs) -> CliResult<()> {
    let mut text = to_canonical_json(kind, value, true)?;
    text.push('\n');
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(a) => {
            let data = load(&a.input, &a.input.input)?;
            let p = privacy(&a.privacy, data.dim())?;
            let mut rng = trial_rng(a.seed, MECHANISM_SALT, 0);
            let rec = dp_pca(&data, a.k, &p, &solver(&a.solver, a.seed), &mut rng)?;
            let trace = a.trace.then(|| Trace {
                warning: "not private: contains the non-private solution and the noise",
                eigenvalues: rec.solution.eigenvalues.clone(),
                u_hat: columns(&rec.solution.u_hat()),
                symmetrizer: columns(&rec.sym),
                u_bar: columns(&rec.u_bar),
                noise: columns(&rec.noise),
                residual: rec.solution.residual,
                iterations: rec.solution.iterations,
                degenerate: rec.solution.degenerate,
            });
            let out = FitOutput {
                budget: budget(&p),
                n: data.len(),
                dim: data.dim(),
                k: a.k,
                seed: a.seed,
                gap: rec.profile.gap,
                beta: rec.profile.beta,
                ls_bound: rec.profile.ls_bound,
                smooth_bound: rec.profile.smooth_bound,
                argmax_k: rec.profile.argmax_k,
                noise_scale: rec.noise_scale,
                resampled: rec.resampled,
                subspace: columns(&rec.u_tilde),
                trace,
            };
            emit("fit", &out, &a.output)
        }
        Command::Sensitivity(a) => {
            let data = load(&a.input, &a.input.input)?;
            let p = privacy(&a.privacy, data.dim())?;
            let sol = solve_pca(&data, a.k, &solver(&a.solver, a.seed))?;
            let b = budget(&p);
            let out = SensitivityOutput {
                eps_p: b.eps_p,
                delta_p: b.delta_p,
                c_sens: b.c_sens,
                dim: data.dim(),
                k: a.k,
                profile: smooth_upper_bound(data.len(), sol.gap, &p),
            };
            emit("sensitivity", &out, &a.output)
        }
        Command::Audit(a) => {
            let s = load(&a.input, &a.input.input)?;
            let s2 = load(&a.input, &a.neighbor)?;
            let p = privacy(&a.privacy, s.dim())?;
            let mut settings = AuditSettings::new(a.trials, a.bins, a.seed);
            settings.slack = a.slack;
            emit("audit", &privacy_audit(&s, &s2, &p, &settings)?, &a.output)
        }
        Command::Sweep(a) => {
            let spec = SyntheticSpec::new(a.dim, a.gap, a.kind.into())?;
            let b = SweepBudget {
                eps_p: a.eps_p,
                delta_p: a.delta_p,
                c_sens: a.c_sens,
            };
            let rep = sample_complexity_sweep(&spec, b, a.eps_g, &a.n_grid, a.runs, a.seed)?;
            if let Some(path) = &a.csv {
                let mut csv = String::from("n,mode,runs,success_fraction,median_excess_risk,q10_excess_risk,q90_excess_risk\n");
                for r in &rep.records {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                        r.n, r.mode, r.runs, r.success_fraction, r.median_excess_risk, r.q10_excess_risk, r.q90_excess_risk
                    );
                }
                fs::write(path, csv).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            }
            emit("sweep", &rep, &a.output)
        }
        Command::Calibrate(a) => {
            let corpus = calibration_corpus(a.seed)?;
            emit("calibrate", &calibrate_constant(&corpus, a.budget, a.seed)?, &a.output)
        }
    }
}

fn report(code: &str, message: &str) {
    let body = ErrorOutput { code, message };
    match to_canonical_json("error", &body, true) {
        Ok(text) => println!("{text}"),
        Err(_) => println!("{{\"kind\":\"error\",\"code\":\"{code}\"}}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            report("invalid-input", e.render().to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            report("invalid-input", &msg);
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            report("numerical", &msg);
            ExitCode::from(3)
        }
    }
}
