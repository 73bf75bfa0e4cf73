// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Empirical verification harness: synthetic data, eigengap checks,
//! brute-force sensitivity, privacy-loss estimation and utility sweeps.

pub mod brute;
pub mod gap;
pub mod privacy;
pub mod synth;
pub mod utility;

pub use brute::{
    brute_force_local_sensitivity, calibrate_constant, calibration_corpus, hard_pair, random_sparse,
    CalibrationInstance, CalibrationReport, LocalSensitivityEstimate, WorstNeighbor, BRUTE_FORCE_MAX_DIM,
    CALIBRATION_BUDGET, CALIBRATION_MARGIN, CALIBRATION_MIN_SCALED_GAP, CALIBRATION_SEED,
};
pub use gap::{
    bernstein_sample_size, empirical_gap_concentration, neighbor_gap_check, scaled_gap_of, GapCheckRecord,
    GapConcentration, BERNSTEIN_CONSTANT,
};
pub use privacy::{
    estimate_privacy_loss, privacy_audit, within_one_edit, AuditReport, AuditSettings, AuditStatistic, BinSpec,
    LossEstimate, DEFAULT_SLACK, MIN_BIN_OCCUPANCY,
};
pub use synth::{synth_generate, SyntheticKind, SyntheticSpec};
pub use utility::{
    input_perturbation_baseline, sample_complexity_sweep, utility_experiment, SweepBudget, SweepReport,
    UtilityReport, SUCCESS_PROBABILITY,
};
