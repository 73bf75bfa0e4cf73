// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Differentially private principal component analysis by output
//! perturbation calibrated to a smooth upper bound on local sensitivity.
//!
//! ```
//! use dppca::{dp_pca, Dataset, PrivacyParams, SolverOptions};
//! use dppca::seed::{trial_rng, MECHANISM_SALT};
//!
//! let data = Dataset::from_rows(vec![vec![1.0, 0.0]; 5000]).unwrap();
//! let p = PrivacyParams::approx(1.0, 1e-3, 1.0, 2).unwrap();
//! let mut rng = trial_rng(7, MECHANISM_SALT, 0);
//! let rec = dp_pca(&data, 1, &p, &SolverOptions::with_seed(7), &mut rng).unwrap();
//! assert!(rec.direction()[0].abs() > 0.9);
//! ```

mod error;

pub mod audit;
pub mod data;
pub mod linalg;
pub mod mechanism;
pub mod pca;
pub mod report;
pub mod seed;
pub mod sensitivity;

pub use data::{Dataset, InputFormat, ScalePolicy};
pub use error::{Error, Result};
pub use mechanism::{dp_pca, dp_pca_with, MechanismRecord, NoisePolicy};
pub use pca::{dense_eig_oracle, solve_pca, PcaSolution, SolverOptions};
pub use report::{to_canonical_json, SCHEMA_VERSION};
pub use sensitivity::{
    required_sample_size, smooth_upper_bound, Mode, PrivacyParams, SensitivityProfile, DEFAULT_C,
};
