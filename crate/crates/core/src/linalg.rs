// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense helpers shared by the solver, the mechanism and the audit.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// `max |(UᵀU − I)_ij|`.
pub fn orthonormality_defect(u: &DMatrix<f64>) -> f64 {
    let gram = u.transpose() * u;
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Columns as plain vectors, for serialization.
pub fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

/// Distance between the classes `{U R}` and `{V R}` over k×k orthogonal `R`.
///
/// For `k = 1` this is `min(‖u − v‖, ‖u + v‖)`. In general it solves the
/// orthogonal Procrustes problem: `‖U‖² + ‖V‖² − 2‖VᵀU‖_*`.
pub fn class_distance(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    assert_eq!(u.shape(), v.shape(), "class_distance shape mismatch");
    if u.ncols() == 1 {
        let minus = (u - v).norm();
        let plus = (u + v).norm();
        return minus.min(plus);
    }
    let cross = v.transpose() * u;
    let nuclear: f64 = cross.singular_values().iter().sum();
    (u.norm_squared() + v.norm_squared() - 2.0 * nuclear)
        .max(0.0)
        .sqrt()
}

/// Vector form of [`class_distance`] for `k = 1`.
pub fn sign_class_distance(u: &[f64], v: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    minus.min(plus).sqrt()
}

/// Haar-distributed k×k orthogonal matrix: Q factor of a Gaussian matrix with
/// the sign convention `diag(R) > 0`.
pub fn haar_orthogonal<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        if (0..k).any(|i| r[(i, i)] == 0.0) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..k {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        return q;
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<DVector<f64>>>(),
    );
    (values, vectors)
}
