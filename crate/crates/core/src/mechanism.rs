// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Output perturbation.
//!
//! One release runs: solve → smooth bound from `(n, GAP)` → random sign (or
//! k×k Haar rotation) on the right → Gaussian or Cauchy noise scaled by
//! `U(S)` → re-orthonormalization.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::haar_orthogonal;
use crate::pca::{solve_pca, PcaSolution, SolverOptions};
use crate::sensitivity::{smooth_upper_bound, Mode, PrivacyParams, SensitivityProfile};

/// Below this smallest singular value the noisy matrix counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// How the mechanism draws its noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoisePolicy {
    /// Noise calibrated to the smooth sensitivity.
    #[default]
    Calibrated,
    /// No noise at all. Destroys privacy; exists for noiseless-limit tests.
    #[cfg(any(test, feature = "noise-override"))]
    Off,
}

/// Full trace of one release.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismRecord {
    /// Pre-noise solver output.
    pub solution: PcaSolution,
    /// k×k orthogonal matrix applied on the right (`±1` for k = 1).
    pub sym: DMatrix<f64>,
    pub noise_scale: f64,
    /// d×k noise matrix, already scaled.
    pub noise: DMatrix<f64>,
    pub u_bar: DMatrix<f64>,
    /// The private output.
    pub u_tilde: DMatrix<f64>,
    pub profile: SensitivityProfile,
    /// True when the first noise draw left `Ū + E` rank deficient.
    pub resampled: bool,
}

impl MechanismRecord {
    /// Leading private direction.
    pub fn direction(&self) -> Vec<f64> {
        self.u_tilde.column(0).iter().copied().collect()
    }
}

/// `Ū = Û · Q` with `Q` a uniform sign (k = 1) or Haar k×k orthogonal matrix.
pub fn symmetrize<R: Rng + ?Sized>(
    sol: &PcaSolution,
    rng: &mut R,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let sym = if sol.k == 1 {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        DMatrix::from_element(1, 1, s)
    } else {
        haar_orthogonal(sol.k, rng)
    };
    (sol.u_hat() * &sym, sym)
}

/// Multiplier applied to the raw noise: `5 U √(2 ln(2/δ)) / ε` (Gaussian) or
/// `6 U / ε` (Cauchy).
pub fn noise_scale(profile: &SensitivityProfile, p: &PrivacyParams) -> f64 {
    match p.mode() {
        Mode::Approx => {
            5.0 * profile.smooth_bound * (2.0 * (2.0 / p.delta_p()).ln()).sqrt() / p.eps_p()
        }
        Mode::Pure => 6.0 * profile.smooth_bound / p.eps_p(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    pub scale: f64,
    pub matrix: DMatrix<f64>,
}

fn check_mode(profile: &SensitivityProfile, p: &PrivacyParams, expected: Mode) -> Result<()> {
    for actual in [profile.mode, p.mode()] {
        if actual != expected {
            return Err(Error::ModeMismatch {
                expected: expected.name(),
                actual: actual.name(),
            });
        }
    }
    Ok(())
}

/// d×k matrix of i.i.d. standard normals times the APPROX scale.
pub fn gaussian_noise<R: Rng + ?Sized>(
    profile: &SensitivityProfile,
    p: &PrivacyParams,
    k: usize,
    rng: &mut R,
) -> Result<NoiseDraw> {
    check_mode(profile, p, Mode::Approx)?;
    let scale = noise_scale(profile, p);
    let matrix = DMatrix::from_fn(p.dim(), k, |_, _| {
        scale * rng.sample::<f64, _>(StandardNormal)
    });
    Ok(NoiseDraw { scale, matrix })
}

/// Standard Cauchy draw by inverse CDF, `tan(π(V − ½))` with `V ∈ (0, 1)`.
pub fn standard_cauchy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return (PI * (v - 0.5)).tan();
        }
    }
}

/// d×k matrix of i.i.d. standard Cauchy draws times the PURE scale.
pub fn cauchy_noise<R: Rng + ?Sized>(
    profile: &SensitivityProfile,
    p: &PrivacyParams,
    k: usize,
    rng: &mut R,
) -> Result<NoiseDraw> {
    check_mode(profile, p, Mode::Pure)?;
    let scale = noise_scale(profile, p);
    let matrix = DMatrix::from_fn(p.dim(), k, |_, _| scale * standard_cauchy(rng));
    Ok(NoiseDraw { scale, matrix })
}

/// Q factor of the thin QR decomposition with `diag(R) > 0`; for a single
/// column this is plain normalization.
pub fn orthonormalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (d, k) = m.shape();
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!(
            "cannot orthonormalize a {d} x {k} matrix"
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::RankDeficient(f64::NAN));
    }
    if k == 1 {
        let norm = m.norm();
        if !(norm > RANK_TOLERANCE) {
            return Err(Error::RankDeficient(norm));
        }
        return Ok(m / norm);
    }
    let sigma_min = m
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(sigma_min > RANK_TOLERANCE) {
        return Err(Error::RankDeficient(sigma_min));
    }
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// Differentially private top-k subspace of `data`.
pub fn dp_pca<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    p: &PrivacyParams,
    opts: &SolverOptions,
    rng: &mut R,
) -> Result<MechanismRecord> {
    dp_pca_with(data, k, p, opts, rng, NoisePolicy::Calibrated)
}

/// [`dp_pca`] with an explicit noise policy.
pub fn dp_pca_with<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    p: &PrivacyParams,
    opts: &SolverOptions,
    rng: &mut R,
    policy: NoisePolicy,
) -> Result<MechanismRecord> {
    if p.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            actual: p.dim(),
        });
    }
    let solution = solve_pca(data, k, opts)?;
    let profile = smooth_upper_bound(data.len(), solution.gap, p);
    privatize(solution, profile, p, rng, policy)
}

/// Everything after the solver. The data enters only through `profile`,
/// which is a function of `(n, GAP)`.
pub fn privatize<R: Rng + ?Sized>(
    solution: PcaSolution,
    profile: SensitivityProfile,
    p: &PrivacyParams,
    rng: &mut R,
    policy: NoisePolicy,
) -> Result<MechanismRecord> {
    let k = solution.k;
    let (u_bar, sym) = symmetrize(&solution, rng);
    let draw = |rng: &mut R| -> Result<NoiseDraw> {
        match policy {
            NoisePolicy::Calibrated => match p.mode() {
                Mode::Approx => gaussian_noise(&profile, p, k, rng),
                Mode::Pure => cauchy_noise(&profile, p, k, rng),
            },
            #[cfg(any(test, feature = "noise-override"))]
            NoisePolicy::Off => Ok(NoiseDraw {
                scale: 0.0,
                matrix: DMatrix::zeros(p.dim(), k),
            }),
        }
    };

    let mut noise = draw(rng)?;
    let mut resampled = false;
    let u_tilde = match orthonormalize(&(&u_bar + &noise.matrix)) {
        Ok(q) => q,
        Err(Error::RankDeficient(_)) => {
            resampled = true;
            noise = draw(rng)?;
            orthonormalize(&(&u_bar + &noise.matrix))?
        }
        Err(e) => return Err(e),
    };
    Ok(MechanismRecord {
        solution,
        sym,
        noise_scale: noise.scale,
        noise: noise.matrix,
        u_bar,
        u_tilde,
        profile,
        resampled,
    })
}
