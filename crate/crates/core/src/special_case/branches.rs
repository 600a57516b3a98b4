//! Solutions of the reduced system: the symmetric branch `x = y`, `t = 1`,
//! the `r = 0` slice, and the numerical side of the asymmetric branch.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roots::{asymmetric_certificate, fp_height_cubic, real_roots, symmetric_factors, PolynomialCert};
use super::transform::{asymmetric_system, system_residuals, transform, SystemResiduals};
use super::{gradient_sc, RootEnclosure, SpecialCaseState};
use crate::config::{fp, tbp, Configuration};
use crate::error::{Error, Result};

/// Multiset distance used to name a reconstructed configuration.
const LABEL_TOL: f64 = 1e-8;
/// Residual of `e20` accepted when picking `x` for a given `r`.
const BRANCH_TOL: f64 = 1e-9;
/// Converged when the largest residual of the asymmetric system is below this.
pub const ASYMMETRIC_TOL: f64 = 1e-10;
/// Solutions with `|r|` and `|x − y|` both above this count as asymmetric.
pub const QUALIFYING_GAP: f64 = 1e-6;
const ASYMMETRIC_BOX: f64 = 3.0;

fn fp_height_enclosure() -> RootEnclosure {
    static CELL: OnceLock<RootEnclosure> = OnceLock::new();
    *CELL.get_or_init(|| {
        let roots = real_roots(&fp_height_cubic()).expect("fixed cubic");
        assert_eq!(roots.len(), 1, "6r^3 + 3r + 1 has exactly one real root");
        roots[0]
    })
}

/// `r*`, the real root of `6r³ + 3r + 1`, at which the symmetric branch
/// produces the non-TBP critical configuration.
pub fn fp_height() -> f64 {
    fp_height_enclosure().midpoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchLabel {
    Tbp,
    Fp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetricSolution {
    pub r: f64,
    pub enclosure: RootEnclosure,
    pub x: f64,
    pub label: BranchLabel,
    pub state: SpecialCaseState,
    pub energy: f64,
    /// Residuals of the full system at `(x, x, 1, r)`.
    pub residuals: SystemResiduals,
    /// Largest `|∂E|` component of the reconstructed state.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorRoots {
    pub factor: PolynomialCert,
    pub roots: Vec<RootEnclosure>,
    pub discriminant: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetricBranch {
    pub factors: Vec<FactorRoots>,
    /// Nontrivial solutions, ordered by `r`.
    pub solutions: Vec<SymmetricSolution>,
}

impl SymmetricBranch {
    /// Real roots of the whole product, excluding the trivial `r = 0`.
    pub fn nonzero_roots(&self) -> Vec<RootEnclosure> {
        let mut out: Vec<RootEnclosure> = self
            .factors
            .iter()
            .flat_map(|f| f.roots.iter().copied())
            .filter(|e| !(e.lo <= 0.0 && e.hi >= 0.0))
            .collect();
        out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        out
    }
}

/// `(3x² + 2r²) − (x³ + 2r²x + 4x + 4r)`: the `t`-equation on `x = y`, `t = 1`.
pub(crate) fn symmetric_first(x: f64, r: f64) -> f64 {
    3.0 * x * x + 2.0 * r * r - (x * x * x + 2.0 * r * r * x + 4.0 * x + 4.0 * r)
}

/// `(rx² + 2x + 8r³ + 3r) − 2rx`: the radial equation on the same slice.
pub(crate) fn symmetric_second(x: f64, r: f64) -> f64 {
    r * x * x + 2.0 * x + 8.0 * r.powi(3) + 3.0 * r - 2.0 * r * x
}

/// Ring angles for `x = y`, `t = 1`: the roots of `(z − 1)(z² + (1 − x)z + 1)`.
pub(crate) fn symmetric_state(x: f64, r: f64) -> Result<SpecialCaseState> {
    let c = (x - 1.0) / 2.0;
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("x = {x} gives ring points off the unit circle")));
    }
    let phi = c.acos();
    SpecialCaseState::new([0.0, phi, -phi], r)
}

fn label_of(config: &Configuration, r: f64) -> Option<BranchLabel> {
    let m = config.gram().multiset();
    if m.linf_distance(&tbp().gram().multiset()) <= LABEL_TOL {
        return Some(BranchLabel::Tbp);
    }
    let f = fp(r).ok()?;
    (m.linf_distance(&f.gram().multiset()) <= LABEL_TOL).then_some(BranchLabel::Fp)
}

/// Picks the root of the radial quadratic `r x² + (2 − 2r) x + 8r³ + 3r`
/// that also satisfies the `t`-equation.
fn branch_x(r: f64) -> Option<f64> {
    let (a, b, c) = (r, 2.0 - 2.0 * r, 8.0 * r.powi(3) + 3.0 * r);
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let candidates = [q / a, c / q];
    candidates
        .into_iter()
        .filter(|x| x.is_finite() && (-1.0..=3.0).contains(x))
        .min_by(|p, q| symmetric_first(*p, r).abs().total_cmp(&symmetric_first(*q, r).abs()))
        .filter(|x| symmetric_first(*x, r).abs() <= BRANCH_TOL && symmetric_second(*x, r).abs() <= BRANCH_TOL)
}

/// Solves `x = y`, `t = 1` through the resultant
/// `r (1 + 2r)(1 + 2r + 2r²)(8 − 9r + 6r²)(1 + 3r + 6r³)`. The trivial root
/// `r = 0` is left to [`solve_zero_slice`].
pub fn solve_symmetric_branch() -> Result<SymmetricBranch> {
    let mut factors = Vec::new();
    let mut solutions = Vec::new();
    for factor in symmetric_factors() {
        let roots = real_roots(&factor)?;
        for e in &roots {
            if e.lo <= 0.0 && e.hi >= 0.0 {
                continue;
            }
            let r = e.midpoint();
            let x = branch_x(r).ok_or_else(|| {
                Error::InvalidParameter(format!("no admissible x on the symmetric branch at r = {r}"))
            })?;
            let state = symmetric_state(x, r)?;
            let config = super::embed(&state);
            let label = label_of(&config, r).ok_or_else(|| {
                Error::InvalidParameter(format!("symmetric solution at r = {r} matches no known configuration"))
            })?;
            let residuals =
                system_residuals(Complex64::new(x, 0.0), Complex64::new(x, 0.0), Complex64::new(1.0, 0.0), r)?;
            let gradient_norm = gradient_sc(&state).iter().map(|g| g.abs()).fold(0.0, f64::max);
            solutions.push(SymmetricSolution {
                r,
                enclosure: *e,
                x,
                label,
                state,
                energy: super::energy_sc(&state),
                residuals,
                gradient_norm,
            });
        }
        let discriminant = factor.quadratic_discriminant();
        factors.push(FactorRoots {
            factor,
            roots,
            discriminant,
        });
    }
    solutions.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(SymmetricBranch { factors, solutions })
}

/// Ring equations with the pair at the poles:
/// `Σ_j (cos θ_ij + 1) sin θ_ij` for `i = 2, 3` with `θ_1 = 0`.
fn ring_equations(th: [f64; 2]) -> [f64; 2] {
    let s = SpecialCaseState::new([0.0, th[0], th[1]], 0.0).expect("finite angles");
    let g = gradient_sc(&s);
    [g[1], g[2]]
}

fn circular_gaps(thetas: &[f64; 3]) -> [f64; 3] {
    let mut t = thetas.map(|v| v.rem_euclid(TAU));
    t.sort_by(f64::total_cmp);
    let mut gaps = [t[1] - t[0], t[2] - t[1], TAU + t[0] - t[2]];
    gaps.sort_by(f64::total_cmp);
    gaps
}

/// Critical states with `r = 0` and three distinct ring points, up to
/// rotation and reflection of the ring. Newton's method from a grid of
/// starts on the two independent ring equations.
pub fn solve_zero_slice() -> Vec<SpecialCaseState> {
    const GRID: usize = 24;
    let mut found: Vec<([f64; 3], SpecialCaseState)> = Vec::new();
    for a in 0..GRID {
        for b in 0..GRID {
            let mut th = [TAU * (a as f64 + 0.5) / GRID as f64, TAU * (b as f64 + 0.25) / GRID as f64];
            let mut converged = false;
            for _ in 0..100 {
                let f = ring_equations(th);
                if f[0].abs().max(f[1].abs()) <= 1e-13 {
                    converged = true;
                    break;
                }
                let h = 1e-7;
                let mut jac = [[0.0; 2]; 2];
                for k in 0..2 {
                    let mut p = th;
                    let mut q = th;
                    p[k] += h;
                    q[k] -= h;
                    let (fp, fq) = (ring_equations(p), ring_equations(q));
                    jac[0][k] = (fp[0] - fq[0]) / (2.0 * h);
                    jac[1][k] = (fp[1] - fq[1]) / (2.0 * h);
                }
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                if det.abs() < 1e-14 {
                    break;
                }
                let dx = (jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
                let dy = (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
                let step = dx.abs().max(dy.abs());
                let damp = if step > 0.5 { 0.5 / step } else { 1.0 };
                th = [th[0] - damp * dx, th[1] - damp * dy];
            }
            if !converged {
                continue;
            }
            let thetas = [0.0, th[0], th[1]];
            let gaps = circular_gaps(&thetas);
            // distinct points: no zero gap
            if gaps[0] < 1e-6 {
                continue;
            }
            // the pole pair's own equation
            let s = SpecialCaseState::new(thetas, 0.0).expect("finite");
            if gradient_sc(&s)[3].abs() > 1e-10 {
                continue;
            }
            if found.iter().all(|(g, _)| g.iter().zip(&gaps).any(|(u, v)| (u - v).abs() > 1e-6)) {
                found.push((gaps, s));
            }
        }
    }
    found.into_iter().map(|(_, s)| s).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergedSolution {
    pub start: usize,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl ConvergedSolution {
    pub fn is_asymmetric(&self) -> bool {
        self.r.abs() > QUALIFYING_GAP && (self.x - self.y).abs() > QUALIFYING_GAP
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymmetricReport {
    pub certificate: PolynomialCert,
    pub coefficients_positive: bool,
    pub even: bool,
    /// Real roots of the certificate after dividing out `r⁴`.
    pub deflated_real_roots: usize,
    pub starts: usize,
    pub seed: u64,
    pub converged: Vec<ConvergedSolution>,
    /// Converged solutions with `|r| > 1e-6` and `|x − y| > 1e-6`.
    pub qualifying: Vec<ConvergedSolution>,
}

impl AsymmetricReport {
    pub fn certificate_holds(&self) -> bool {
        self.coefficients_positive && self.even && self.deflated_real_roots == 0
    }

    pub fn passed(&self) -> bool {
        self.certificate_holds() && self.qualifying.is_empty()
    }

    /// Largest `|r|` among converged solutions.
    pub fn max_converged_r(&self) -> f64 {
        self.converged.iter().map(|c| c.r.abs()).fold(0.0, f64::max)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|a| a.abs()).fold(0.0, f64::max)
}

/// Levenberg–Marquardt on the four real equations in `(x, y, r)`, stopping
/// early when an iterate leaves the box.
fn damped_newton(start: usize, mut p: [f64; 3]) -> Option<ConvergedSolution> {
    const MAX_ITERS: usize = 400;
    let eval = |p: &[f64; 3]| asymmetric_system(p[0], p[1], p[2]);
    let mut f = eval(&p);
    let mut cost: f64 = f.iter().map(|v| v * v).sum();
    let mut mu = 1e-3;
    for it in 0..MAX_ITERS {
        let res = max_abs(&f);
        if res == 0.0 {
            return Some(ConvergedSolution { start, x: p[0], y: p[1], r: p[2], residual: res, iterations: it });
        }
        let mut jac = [[0.0; 3]; 4];
        for k in 0..3 {
            let h = 1e-7 * (1.0 + p[k].abs());
            let mut a = p;
            let mut b = p;
            a[k] += h;
            b[k] -= h;
            let (fa, fb) = (eval(&a), eval(&b));
            for i in 0..4 {
                jac[i][k] = (fa[i] - fb[i]) / (2.0 * h);
            }
        }
        let mut jtj = [[0.0; 3]; 3];
        let mut jtf = [0.0; 3];
        for i in 0..4 {
            for a in 0..3 {
                jtf[a] += jac[i][a] * f[i];
                for b in 0..3 {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += mu * jtj[a][a].max(f64::MIN_POSITIVE);
            }
            let Some(step) = solve3(m, jtf) else {
                mu *= 10.0;
                continue;
            };
            let trial = [p[0] - step[0], p[1] - step[1], p[2] - step[2]];
            let ft = eval(&trial);
            let ct: f64 = ft.iter().map(|v| v * v).sum();
            if ct < cost {
                let moved = max_abs(&step);
                p = trial;
                f = ft;
                cost = ct;
                mu = (mu * 0.3).max(1e-15);
                accepted = true;
                if moved <= 1e-16 * (1.0 + max_abs(&p)) {
                    let res = max_abs(&f);
                    return (res <= ASYMMETRIC_TOL).then_some(ConvergedSolution {
                        start,
                        x: p[0],
                        y: p[1],
                        r: p[2],
                        residual: res,
                        iterations: it + 1,
                    });
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            break;
        }
        if p[0].abs() > ASYMMETRIC_BOX + 0.5 || p[1].abs() > ASYMMETRIC_BOX + 0.5 || p[2].abs() > 1.0 {
            return None;
        }
    }
    let res = max_abs(&f);
    (res <= ASYMMETRIC_TOL).then_some(ConvergedSolution {
        start,
        x: p[0],
        y: p[1],
        r: p[2],
        residual: res,
        iterations: MAX_ITERS,
    })
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if !d.is_normal() {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = b[i];
        }
        *slot = det(&mk) / d;
    }
    Some(out)
}

/// Checks the degree-26 certificate and runs a seeded multistart on the
/// real asymmetric system over `|x|, |y| ≤ 3`, `|r| ≤ 1`.
pub fn asymmetric_branch_certificate(starts: usize, seed: u64) -> Result<AsymmetricReport> {
    asymmetric_branch_report(asymmetric_certificate(), starts, seed)
}

/// Same as [`asymmetric_branch_certificate`] with a caller-supplied
/// polynomial in place of the transcribed one.
pub fn asymmetric_branch_report(certificate: PolynomialCert, starts: usize, seed: u64) -> Result<AsymmetricReport> {
    let low = certificate.coefficients.iter().take_while(|&&c| c == 0).count();
    let deflated = certificate.deflate(low)?;
    let deflated_real_roots = real_roots(&deflated)?.len();
    let mut converged: Vec<ConvergedSolution> = (0..starts)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let p = [
                rng.random_range(-ASYMMETRIC_BOX..=ASYMMETRIC_BOX),
                rng.random_range(-ASYMMETRIC_BOX..=ASYMMETRIC_BOX),
                rng.random_range(-1.0..=1.0),
            ];
            damped_newton(k, p)
        })
        .collect();
    converged.sort_by_key(|c| c.start);
    let qualifying = converged.iter().copied().filter(ConvergedSolution::is_asymmetric).collect();
    Ok(AsymmetricReport {
        coefficients_positive: certificate.nonzero_coefficients_positive(),
        even: certificate.is_even(),
        certificate,
        deflated_real_roots,
        starts,
        seed,
        converged,
        qualifying,
    })
}

/// Residuals of the transformed system at an on-shell state, or `None` when
/// a denominator falls inside the guard band.
pub fn state_system_residuals(s: &SpecialCaseState) -> Result<Option<SystemResiduals>> {
    let v = transform(&s.z())?;
    match system_residuals(v.x, v.y, v.t, s.r()) {
        Ok(res) => Ok(Some(res)),
        Err(Error::DenominatorVanish(_)) => Ok(None),
        Err(e) => Err(e),
    }
}
