// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic seed splitting for Monte-Carlo trials.
//!
//! Trial `i` of an experiment with master seed `s` uses ChaCha8 seeded with
//! `s ^ salt` on stream `i`. Results therefore do not depend on how trials are
//! scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Salt for per-trial mechanism generators.
pub const MECHANISM_SALT: u64 = 0x6d65_6368_616e_6973;
/// Salt for per-trial solver start vectors.
pub const SOLVER_SALT: u64 = 0x736f_6c76_6572_2121;
/// Salt for per-trial synthetic datasets.
pub const DATA_SALT: u64 = 0x6461_7461_7365_7421;

pub fn trial_rng(master: u64, salt: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ salt);
    rng.set_stream(trial);
    rng
}

pub fn trial_seed(master: u64, salt: u64, trial: u64) -> u64 {
    trial_rng(master, salt, trial).next_u64()
}

/// Maps `f` over `0..count`, in parallel when the `parallel` feature is on.
/// Output order always follows the index.
pub(crate) fn map_trials<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count as u64).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count as u64).map(f).collect()
    }
}
