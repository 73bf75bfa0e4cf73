// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dppca::audit::{SyntheticKind, CALIBRATION_BUDGET, DEFAULT_SLACK};
use dppca::pca::DEFAULT_TOL;
use dppca::{InputFormat, DEFAULT_C};

/// Differentially private PCA and its audit harness.
///
/// Every command writes one JSON object to `--out` or stdout. Failures are
/// reported as a JSON error object with exit code 2 (invalid input or
/// configuration) or 3 (numerical failure).
#[derive(Debug, Parser)]
#[command(name = "dppca", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Release a private top-k subspace of a dataset.
    Fit(FitArgs),
    /// Report the smooth sensitivity bound of a dataset. Releases nothing private.
    Sensitivity(SensitivityArgs),
    /// Estimate the privacy loss on a pair of neighboring datasets.
    Audit(AuditArgs),
    /// Success fraction against n for both modes on synthetic data.
    Sweep(SweepArgs),
    /// Brute-force calibration of the sensitivity constant C.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    DenseCsv,
    SparseCoo,
}

impl From<Format> for InputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::DenseCsv => InputFormat::DenseCsv,
            Format::SparseCoo => InputFormat::SparseCoo,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    TwoPoint,
    Spiked,
}

impl From<Kind> for SyntheticKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::TwoPoint => SyntheticKind::TwoPoint,
            Kind::Spiked => SyntheticKind::Spiked,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "dense-csv")]
    pub format: Format,
    /// Scale rows outside the unit ball onto the sphere instead of rejecting them.
    #[arg(long)]
    pub rescale: bool,
}

#[derive(Debug, Args)]
pub struct PrivacyArgs {
    #[arg(long)]
    pub eps_p: f64,
    /// Required unless --pure.
    #[arg(long)]
    pub delta_p: Option<f64>,
    /// Pure ε-DP with Cauchy noise.
    #[arg(long)]
    pub pure: bool,
    #[arg(long = "constant-c", default_value_t = DEFAULT_C)]
    pub c_sens: f64,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[command(flatten)]
    pub privacy: PrivacyArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub seed: u64,
    /// Also print the full mechanism trace. NOT PRIVATE: exposes the
    /// non-private eigenvectors and the noise.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[command(flatten)]
    pub privacy: PrivacyArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Solver start vector; the eigengap does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// The neighboring dataset, same format as --input.
    #[arg(long)]
    pub neighbor: PathBuf,
    #[command(flatten)]
    pub privacy: PrivacyArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 60)]
    pub bins: usize,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: f64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dim: usize,
    /// Population eigengap.
    #[arg(long)]
    pub gap: f64,
    #[arg(long, value_enum, default_value = "two-point")]
    pub kind: Kind,
    #[arg(long)]
    pub eps_p: f64,
    /// Used by the APPROX curve.
    #[arg(long)]
    pub delta_p: f64,
    #[arg(long)]
    pub eps_g: f64,
    #[arg(long = "constant-c", default_value_t = DEFAULT_C)]
    pub c_sens: f64,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long)]
    pub seed: u64,
    /// Also write the curve as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub seed: u64,
    /// Candidate additions per instance.
    #[arg(long, default_value_t = CALIBRATION_BUDGET)]
    pub budget: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}
