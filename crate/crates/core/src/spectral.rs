//! Orthogonal-column normalization of a configuration and the quantities that
//! live in that frame: the eigenvalues `λ_k` of `X^T X`, the centroid `x̄`,
//! and the per-point sums `α_i = Σ_j (b_ij + b_ij²)`.
//!
//! In the normalized frame the biquadratic energy is
//! `½ Σ λ_k² + |x̄|² + n²/2 − 2n` and the equilibrium equations decouple into
//! `(α_i − λ_k) x_ik = x̄_k`.

use serde::{Deserialize, Serialize};

use crate::config::{Configuration, GramMatrix};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Default threshold below which a centroid component counts as zero.
pub const DEFAULT_CASE_TOL: f64 = 1e-8;
/// Width of the guard band above the case threshold, as a factor.
pub const AMBIGUITY_FACTOR: f64 = 10.0;
/// `α_i` closer than this to `λ_k` is a pole of `Σ 1/(α_i − λ_k)`.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    /// Eigenvalues of `X^T X`, descending.
    pub lambdas: Vec<f64>,
    /// `Σ p_i` in the normalized frame.
    pub centroid: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Row-major orthogonal `U` with `Y = X U`.
    pub rotation: Vec<f64>,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    /// Biquadratic energy from the spectral identity.
    pub fn energy(&self) -> f64 {
        spectral_energy(&self.lambdas, &self.centroid, self.n())
    }

    /// `max λ − min λ`.
    pub fn lambda_spread(&self) -> f64 {
        let max = self.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn centroid_norm(&self) -> f64 {
        crate::config::norm(&self.centroid)
    }
}

/// Number of vanishing centroid components in the normalized frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseLabel {
    pub zero_count: usize,
    pub tol: f64,
}

/// Rotates the configuration so that `X^T X` is diagonal.
pub fn normalize(config: &Configuration) -> (Configuration, SpectralData) {
    let (n, m) = (config.n(), config.m());
    let x = config.coords();
    let mut xtx = vec![0.0; m * m];
    for k in 0..m {
        for l in k..m {
            let s: f64 = (0..n).map(|i| x[i * m + k] * x[i * m + l]).sum();
            xtx[k * m + l] = s;
            xtx[l * m + k] = s;
        }
    }
    let (lambdas, rotation) = symmetric_eigen(&xtx, m);
    let normalized = config.rotate(&rotation);
    let centroid = normalized.centroid();
    let alphas = alphas(&normalized.gram());
    let lambdas = lambdas.into_iter().map(|l| l.max(0.0)).collect();
    (
        normalized,
        SpectralData {
            lambdas,
            centroid,
            alphas,
            rotation,
        },
    )
}

/// `½ Σ λ_k² + |x̄|² + n²/2 − 2n`.
pub fn spectral_energy(lambdas: &[f64], centroid: &[f64], n: usize) -> f64 {
    let n = n as f64;
    0.5 * lambdas.iter().map(|l| l * l).sum::<f64>()
        + centroid.iter().map(|c| c * c).sum::<f64>()
        + 0.5 * n * n
        - 2.0 * n
}

/// `α_i = Σ_j (b_ij + b_ij²)`, including the `j = i` term (which contributes 2).
pub fn alphas(g: &GramMatrix) -> Vec<f64> {
    (0..g.n())
        .map(|i| g.row(i).iter().map(|b| b + b * b).sum())
        .collect()
}

/// Counts centroid components with `|x̄_k| < tol`.
///
/// Fails with [`Error::AmbiguousZero`] when a component falls in
/// `[tol, 10 tol)`, where the count would depend on the exact threshold.
pub fn classify_case(sd: &SpectralData, tol: f64) -> Result<CaseLabel> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("case tolerance must be positive, got {tol}")));
    }
    let upper = AMBIGUITY_FACTOR * tol;
    let mut zero_count = 0;
    for (component, &value) in sd.centroid.iter().enumerate() {
        let a = value.abs();
        if a < tol {
            zero_count += 1;
        } else if a < upper {
            return Err(Error::AmbiguousZero {
                component,
                value,
                tol,
                upper,
            });
        }
    }
    Ok(CaseLabel { zero_count, tol })
}

/// Signed residual `Σ_i 1/(α_i − λ) − 1` of the per-component constraint
/// that holds whenever `x̄_k ≠ 0` at a critical configuration.
pub fn crit7_residual(alphas: &[f64], lambda: f64) -> Result<f64> {
    let mut sum = 0.0;
    for (index, &a) in alphas.iter().enumerate() {
        let d = a - lambda;
        if d.abs() <= POLE_TOL {
            return Err(Error::PoleCollision { index, lambda });
        }
        sum += 1.0 / d;
    }
    Ok(sum - 1.0)
}
