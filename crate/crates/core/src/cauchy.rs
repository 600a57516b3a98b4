//! Numerical experiments on the Cauchy-type matrix
//!
//! ```text
//! a_ik = 1 / (α_i − λ_k)²   for k ≤ m
//! a_ik = α_i^(k−m−1)        for k > m
//! ```
//!
//! built from distinct `α_i` and distinct roots `λ_k` of
//! `g(λ) = Σ_i 1/(α_i − λ) − 1`. Such a matrix is always nonsingular, which
//! means the all-ones vector is never a combination of its first `m` columns.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::linalg::{column_norms, complex_det, least_squares_residual, orthonormal_columns};
use crate::spectral::normalize;

/// Minimum separation between any two parameters of an instance.
pub const SEPARATION: f64 = 1e-8;
/// Maximum `|g(λ_k)|` for a stored instance.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Maximum `|g(λ)|` accepted from root polishing.
pub const POLISH_TOL: f64 = 1e-8;
/// Nonsingularity threshold for the scaled determinant.
pub const SCALED_DET_FLOOR: f64 = 1e-12;

const ABERTH_ITERS: usize = 500;
const POLISH_ITERS: usize = 100;

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `g(λ) = Σ 1/(α_i − λ) − 1`.
pub fn g(alphas: &[Complex64], lambda: Complex64) -> Complex64 {
    alphas.iter().map(|a| (a - lambda).inv()).sum::<Complex64>() - c64(1.0)
}

/// Newton step `P/P'` for `P(λ) = Π(α_j − λ) g(λ)`.
///
/// With `S1 = Σ 1/(α−λ)` and `S2 = Σ 1/(α−λ)²`, `P'/P = S2/(S1 − 1) − S1`,
/// so the product never has to be expanded.
fn newton_ratio(alphas: &[Complex64], lambda: Complex64) -> Complex64 {
    let mut s1 = c64(0.0);
    let mut s2 = c64(0.0);
    for a in alphas {
        let w = (a - lambda).inv();
        s1 += w;
        s2 += w * w;
    }
    let gv = s1 - c64(1.0);
    gv / (s2 - s1 * gv)
}

/// All `n` roots of `g` (with multiplicity), i.e. the roots of the degree-`n`
/// polynomial `Σ_i Π_{j≠i}(α_j − λ) − Π_j(α_j − λ)`.
///
/// Roots are found simultaneously by Aberth iteration from a deterministic
/// circle of radius `1 + max|α|`, then polished with Newton's method on `g`.
pub fn lambda_candidates(alphas: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = alphas.len();
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one alpha".into()));
    }
    check_distinct(alphas, "alphas")?;
    let radius = 1.0 + alphas.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let centre = alphas.iter().sum::<Complex64>() / n as f64;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| centre + Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();

    for _ in 0..ABERTH_ITERS {
        let mut biggest = 0.0f64;
        for k in 0..n {
            let ratio = newton_ratio(alphas, z[k]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (c64(1.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                biggest = biggest.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if biggest < 1e-15 {
            break;
        }
    }

    z.into_iter().map(|root| polish(alphas, root)).collect()
}

fn polish(alphas: &[Complex64], mut lambda: Complex64) -> Result<Complex64> {
    let mut best = (g(alphas, lambda).norm(), lambda);
    for _ in 0..POLISH_ITERS {
        let step = newton_ratio(alphas, lambda);
        if !step.is_finite() {
            break;
        }
        lambda -= step;
        let r = g(alphas, lambda).norm();
        if r < best.0 {
            best = (r, lambda);
        }
        if step.norm() <= 1e-16 * (1.0 + lambda.norm()) {
            break;
        }
    }
    if best.0 <= POLISH_TOL {
        Ok(best.1)
    } else {
        Err(Error::RootFindingFailure {
            residual: best.0,
            iterations: POLISH_ITERS,
        })
    }
}

fn check_distinct(values: &[Complex64], what: &str) -> Result<()> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if (values[i] - values[j]).norm() < SEPARATION {
                return Err(Error::InadmissibleSelection(format!(
                    "{what} {i} and {j} are closer than {SEPARATION:e}"
                )));
            }
        }
    }
    Ok(())
}

/// Admissible parameters: distinct `α`, distinct `λ` solving `g(λ) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyInstance {
    alphas: Vec<Complex64>,
    lambdas: Vec<Complex64>,
}

impl CauchyInstance {
    /// Validates and wraps an explicit parameter set.
    pub fn new(alphas: Vec<Complex64>, lambdas: Vec<Complex64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() > alphas.len() {
            return Err(Error::InadmissibleSelection(format!(
                "need 1 <= m <= n, got m={} n={}",
                lambdas.len(),
                alphas.len()
            )));
        }
        check_distinct(&alphas, "alphas")?;
        check_distinct(&lambdas, "lambdas")?;
        for (k, l) in lambdas.iter().enumerate() {
            for (i, a) in alphas.iter().enumerate() {
                if (a - l).norm() < SEPARATION {
                    return Err(Error::InadmissibleSelection(format!("lambda {k} collides with alpha {i}")));
                }
            }
            let r = g(&alphas, *l).norm();
            if r > CONSTRAINT_TOL {
                return Err(Error::InadmissibleSelection(format!("|g(lambda {k})| = {r:e}")));
            }
        }
        Ok(CauchyInstance { alphas, lambdas })
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_real(&self) -> bool {
        self.alphas.iter().chain(&self.lambdas).all(|z| z.im == 0.0)
    }

    /// Largest `|g(λ_k)|`.
    pub fn constraint_residual(&self) -> f64 {
        self.lambdas
            .iter()
            .map(|l| g(&self.alphas, *l).norm())
            .fold(0.0, f64::max)
    }

    /// Row-major `n x n` Cauchy-type matrix.
    pub fn matrix(&self) -> Vec<Complex64> {
        let (n, m) = (self.n(), self.m());
        let mut a = Vec::with_capacity(n * n);
        for alpha in &self.alphas {
            for lambda in &self.lambdas {
                a.push((alpha - lambda).powi(-2));
            }
            for k in m..n {
                a.push(alpha.powi((k - m) as i32));
            }
        }
        a
    }
}

/// Picks the candidate roots at `selection` (indices into
/// [`lambda_candidates`] sorted by real part, then imaginary part).
pub fn build_instance(alphas: &[Complex64], m: usize, selection: &[usize]) -> Result<CauchyInstance> {
    if selection.len() != m {
        return Err(Error::InadmissibleSelection(format!(
            "selection has {} indices, expected {m}",
            selection.len()
        )));
    }
    let candidates = sorted_candidates(alphas)?;
    for (a, &i) in selection.iter().enumerate() {
        if i >= candidates.len() {
            return Err(Error::InadmissibleSelection(format!("index {i} out of range")));
        }
        if selection[..a].contains(&i) {
            return Err(Error::InadmissibleSelection(format!("index {i} repeated")));
        }
    }
    let lambdas = selection.iter().map(|&i| candidates[i]).collect();
    CauchyInstance::new(alphas.to_vec(), lambdas)
}

/// [`lambda_candidates`] in a deterministic order; roots of a real-coefficient
/// problem whose imaginary part is at rounding level are snapped to the axis.
pub fn sorted_candidates(alphas: &[Complex64]) -> Result<Vec<Complex64>> {
    let real = alphas.iter().all(|a| a.im == 0.0);
    let mut roots = lambda_candidates(alphas)?;
    if real {
        for r in roots.iter_mut() {
            if r.im.abs() <= 1e-9 * (1.0 + r.re.abs()) {
                *r = polish_real(alphas, r.re);
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

fn polish_real(alphas: &[Complex64], mut x: f64) -> Complex64 {
    for _ in 0..20 {
        let step = newton_ratio(alphas, c64(x)).re;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    c64(x)
}

/// Result of the nonsingularity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetCheck {
    pub det: Complex64,
    /// `|det A| / Π_k |A e_k|`, in `[0, 1]` by Hadamard's inequality.
    pub scaled_magnitude: f64,
}

pub fn det_check(inst: &CauchyInstance) -> DetCheck {
    matrix_det_check(&inst.matrix(), inst.n())
}

pub(crate) fn matrix_det_check(a: &[Complex64], n: usize) -> DetCheck {
    let det = complex_det(a, n);
    let scale: f64 = column_norms(a, n, n).iter().product();
    let scaled_magnitude = if scale > 0.0 { det.norm() / scale } else { 0.0 };
    DetCheck { det, scaled_magnitude }
}

/// Scaled volume spanned by the first `m + 1` columns (the `m` rational
/// columns and the column of ones): `Π_k R_kk / Π_k |a_k|` from a QR
/// factorization. Positive iff those columns are independent.
pub fn leading_columns_score(inst: &CauchyInstance) -> f64 {
    let (n, m) = (inst.n(), inst.m());
    let cols = (m + 1).min(n);
    let full = inst.matrix();
    let sub: Vec<Complex64> = (0..n).flat_map(|i| full[i * n..i * n + cols].to_vec()).collect();
    let (_, diag) = orthonormal_columns(&sub, n, cols);
    let norms = column_norms(&sub, n, cols);
    diag.iter().zip(&norms).map(|(d, c)| d / c).product()
}

/// `min_c |Σ_k c_k/(α_i − λ_k)² − 1|_2` over all `c`. Strictly positive
/// whenever `m < n`.
pub fn corollary_infeasibility(inst: &CauchyInstance) -> f64 {
    let (n, m) = (inst.n(), inst.m());
    let a: Vec<Complex64> = inst
        .alphas
        .iter()
        .flat_map(|alpha| inst.lambdas.iter().map(move |l| (alpha - l).powi(-2)))
        .collect();
    least_squares_residual(&a, n, m, &vec![c64(1.0); n])
}

/// How a seeded experiment draws its `α` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaDraw {
    Real,
    Complex,
}

/// Box from which `α` components are drawn uniformly.
pub const ALPHA_BOX: f64 = 2.0;
/// Minimum pairwise spacing of drawn `α`; closer draws are redrawn.
pub const ALPHA_SPACING: f64 = 0.05;

/// Draws `n` separated `α` values.
pub fn draw_alphas<R: Rng + ?Sized>(rng: &mut R, n: usize, kind: AlphaDraw) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    while out.len() < n {
        let re = rng.random_range(-ALPHA_BOX..ALPHA_BOX);
        let im = match kind {
            AlphaDraw::Real => 0.0,
            AlphaDraw::Complex => rng.random_range(-ALPHA_BOX..ALPHA_BOX),
        };
        let z = Complex64::new(re, im);
        if out.iter().all(|a| (a - z).norm() >= ALPHA_SPACING) {
            out.push(z);
        }
    }
    out
}

/// One row of a seeded experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub kind: AlphaDraw,
    /// `None` when the draw produced no admissible instance.
    pub scaled_magnitude: Option<f64>,
    pub corollary_residual: Option<f64>,
    pub leading_columns: Option<f64>,
}

/// Instance for `seed`: draws `α`, selects the first `m` candidate roots.
pub fn seeded_instance(seed: u64, n: usize, m: usize, kind: AlphaDraw) -> Result<CauchyInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas = draw_alphas(&mut rng, n, kind);
    let selection: Vec<usize> = (0..m).collect();
    build_instance(&alphas, m, &selection)
}

/// Runs `count` seeded instances, alternating real and complex draws.
/// Output is ordered by seed regardless of scheduling.
pub fn run_experiment(base_seed: u64, count: usize, n: usize, m: usize) -> Vec<InstanceRecord> {
    (0..count as u64)
        .into_par_iter()
        .map(|k| experiment_record(base_seed, k, n, m))
        .collect()
}

fn experiment_record(base_seed: u64, k: u64, n: usize, m: usize) -> InstanceRecord {
    let seed = base_seed.wrapping_mul(1_000_003).wrapping_add(k);
    let kind = if k % 2 == 0 { AlphaDraw::Real } else { AlphaDraw::Complex };
    let inst = seeded_instance(seed, n, m, kind).ok();
    InstanceRecord {
        seed,
        n,
        m,
        kind,
        scaled_magnitude: inst.as_ref().map(|i| det_check(i).scaled_magnitude),
        corollary_residual: inst.as_ref().filter(|_| m < n).map(corollary_infeasibility),
        leading_columns: inst.as_ref().map(leading_columns_score),
    }
}

/// Like [`run_experiment`] but keeps drawing until `count` admissible
/// instances are collected. Returns those records and the number of
/// inadmissible draws skipped on the way.
pub fn run_admissible(base_seed: u64, count: usize, n: usize, m: usize) -> (Vec<InstanceRecord>, usize) {
    let mut records = Vec::with_capacity(count);
    let mut skipped = 0;
    let mut offset = 0u64;
    while records.len() < count {
        let need = count - records.len();
        let batch: Vec<InstanceRecord> = (offset..offset + need as u64)
            .into_par_iter()
            .map(|k| experiment_record(base_seed, k, n, m))
            .collect();
        offset += need as u64;
        for r in batch {
            if r.scaled_magnitude.is_some() {
                records.push(r);
            } else {
                skipped += 1;
            }
        }
        if skipped > 100 * count.max(1) {
            break;
        }
    }
    (records, skipped)
}

/// Largest relative deviation between the LU determinant of a classical
/// Cauchy matrix `1/(x_i − y_j)` and its product formula
/// `Π_{i<j} (x_j − x_i)(y_i − y_j) / Π_{i,j} (x_i − y_j)`, over `count`
/// seeded draws with sizes 2..=6.
pub fn classical_cauchy_deviation(seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..count {
        let n = 2 + k % 5;
        let xy = draw_alphas(&mut rng, 2 * n, AlphaDraw::Complex);
        let (x, y) = xy.split_at(n);
        let a: Vec<Complex64> = x.iter().flat_map(|xi| y.iter().map(move |yj| (xi - yj).inv())).collect();
        let mut num = c64(1.0);
        for i in 0..n {
            for j in i + 1..n {
                num *= (x[j] - x[i]) * (y[i] - y[j]);
            }
        }
        let den: Complex64 = x.iter().flat_map(|xi| y.iter().map(move |yj| xi - yj)).product();
        let want = num / den;
        let got = complex_det(&a, n);
        worst = worst.max((got - want).norm() / want.norm());
    }
    worst
}

/// The obstruction a configuration with no vanishing centroid component
/// would have to overcome: if it were critical, `c_k = x̄_k²` would solve
/// the infeasible system above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidObstruction {
    /// Largest `|Σ_i 1/(α_i − λ_k) − 1|`.
    pub constraint_residual: f64,
    /// `|Σ_k x̄_k²/(α_i − λ_k)² − 1|_2`.
    pub centroid_residual: f64,
    /// Least-squares residual over all `c`, if the spectral data form an
    /// admissible instance.
    pub corollary_residual: Option<f64>,
}

pub fn centroid_obstruction(config: &Configuration) -> CentroidObstruction {
    let (_, sd) = normalize(config);
    let alphas: Vec<Complex64> = sd.alphas.iter().map(|&a| c64(a)).collect();
    let lambdas: Vec<Complex64> = sd.lambdas.iter().map(|&l| c64(l)).collect();
    let constraint_residual = lambdas.iter().map(|l| g(&alphas, *l).norm()).fold(0.0, f64::max);
    let centroid_residual = alphas
        .iter()
        .map(|a| {
            let s: f64 = lambdas
                .iter()
                .zip(&sd.centroid)
                .map(|(l, x)| x * x / (a - l).norm_sqr())
                .sum();
            (s - 1.0).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let corollary_residual = CauchyInstance::new(alphas, lambdas)
        .ok()
        .filter(|inst| inst.m() < inst.n())
        .map(|inst| corollary_infeasibility(&inst));
    CentroidObstruction {
        constraint_residual,
        centroid_residual,
        corollary_residual,
    }
}
