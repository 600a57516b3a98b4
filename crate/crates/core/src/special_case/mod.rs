//! Configurations with three points on a great circle and two points
//! mirror-symmetric across it:
//!
//! ```text
//! p_i = (cos θ_i, sin θ_i, 0),   i = 1..3
//! p_4, p_5 = (r, 0, ±sqrt(1 − r²))
//! ```
//!
//! Every nontrivial critical configuration of five points reduces to this
//! form. This module evaluates the energy and its critical-point equations in
//! the angle, complex (`z_j = e^{iθ_j}`) and power-sum (`x, y, t`) variables,
//! solves the symmetric branch exactly, and certifies that the asymmetric
//! branch has no real solutions.

mod branches;
pub mod roots;
mod transform;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};

pub use branches::{
    asymmetric_branch_certificate, asymmetric_branch_report, fp_height, solve_symmetric_branch,
    solve_zero_slice, state_system_residuals, AsymmetricReport, BranchLabel, ConvergedSolution,
    FactorRoots, SymmetricBranch, SymmetricSolution, ASYMMETRIC_TOL, QUALIFYING_GAP,
};
pub use roots::{real_roots, PolynomialCert, RootEnclosure};
pub use transform::{system_residuals, transform, SystemResiduals, TransformedVars};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialCaseState {
    thetas: [f64; 3],
    r: f64,
}

impl SpecialCaseState {
    /// Angles are reduced to `[0, 2π)`; `|r| < 1` is required.
    pub fn new(thetas: [f64; 3], r: f64) -> Result<Self> {
        if !(r.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("special case needs |r| < 1, got {r}")));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("angles must be finite".into()));
        }
        Ok(SpecialCaseState {
            thetas: thetas.map(|t| t.rem_euclid(TAU)),
            r,
        })
    }

    pub fn thetas(&self) -> [f64; 3] {
        self.thetas
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `z_j = e^{iθ_j}`.
    pub fn z(&self) -> [Complex64; 3] {
        self.thetas.map(|t| Complex64::from_polar(1.0, t))
    }

    /// `(−θ, −r)`-style sign flip: `z → −z`, `r → −r`.
    pub fn negated(&self) -> SpecialCaseState {
        SpecialCaseState::new(self.thetas.map(|t| t + std::f64::consts::PI), -self.r)
            .expect("|r| unchanged")
    }
}

/// The five points of the state.
pub fn embed(s: &SpecialCaseState) -> Configuration {
    let h = (1.0 - s.r * s.r).sqrt();
    let mut rows: Vec<Vec<f64>> = s.thetas.iter().map(|t| vec![t.cos(), t.sin(), 0.0]).collect();
    rows.push(vec![s.r, 0.0, h]);
    rows.push(vec![s.r, 0.0, -h]);
    Configuration::new(rows).expect("unit rows")
}

/// `Σ_{i<j≤3} (cos θ_ij + 1)² + 2 Σ_i (r cos θ_i + 1)² + 4 r⁴`.
pub fn energy_sc(s: &SpecialCaseState) -> f64 {
    let [a, b, c] = s.thetas;
    let ring: f64 = [a - b, a - c, b - c].iter().map(|d| (d.cos() + 1.0).powi(2)).sum();
    let apex: f64 = s.thetas.iter().map(|t| (s.r * t.cos() + 1.0).powi(2)).sum();
    ring + 2.0 * apex + 4.0 * s.r.powi(4)
}

/// Left sides of the critical-point equations in the normalization where
///
/// ```text
/// G_i = Σ_j (cos θ_ij + 1) sin θ_ij + 2 (r cos θ_i + 1) r sin θ_i   (i = 1..3)
/// G_r = Σ_j (r cos θ_j + 1) cos θ_j + 4 r³
/// ```
///
/// These relate to the true partials by `∂E/∂θ_i = −2 G_i` and
/// `∂E/∂r = 4 G_r` (see [`energy_gradient_sc`]).
pub fn gradient_sc(s: &SpecialCaseState) -> [f64; 4] {
    let r = s.r;
    let th = s.thetas;
    let mut out = [0.0; 4];
    for i in 0..3 {
        let ring: f64 = (0..3)
            .map(|j| {
                let d = th[i] - th[j];
                (d.cos() + 1.0) * d.sin()
            })
            .sum();
        out[i] = ring + 2.0 * (r * th[i].cos() + 1.0) * r * th[i].sin();
    }
    out[3] = th.iter().map(|t| (r * t.cos() + 1.0) * t.cos()).sum::<f64>() + 4.0 * r.powi(3);
    out
}

/// `(∂E/∂θ_1, ∂E/∂θ_2, ∂E/∂θ_3, ∂E/∂r)`.
pub fn energy_gradient_sc(s: &SpecialCaseState) -> [f64; 4] {
    let g = gradient_sc(s);
    [-2.0 * g[0], -2.0 * g[1], -2.0 * g[2], 4.0 * g[3]]
}

/// Ratio between the complex angle equation and [`gradient_sc`]:
/// `angle_residual_i = 4i · G_i` for unit-modulus `z`.
pub const ANGLE_EQUATION_SCALE: Complex64 = Complex64::new(0.0, 4.0);
/// Ratio between the complex `r` equation and [`gradient_sc`]:
/// `r_residual = 4 · G_r`.
pub const R_EQUATION_SCALE: f64 = 4.0;

/// Complex-variable residuals at arbitrary (not necessarily unit) `z`:
///
/// ```text
/// Σ_j (z_i²/z_j² − z_j²/z_i²) + 2 Σ_j (z_i/z_j − z_j/z_i)
///     + 2r² (z_i² − z_i⁻²) + 4r (z_i − z_i⁻¹)                 (i = 1..3)
/// r Σ_j (z_j² + z_j⁻²) + 2 Σ_j (z_j + z_j⁻¹) + 16 r³ + 6 r
/// ```
pub fn complex_residuals_z(z: &[Complex64; 3], r: f64) -> ([Complex64; 3], Complex64) {
    let mut angle = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        let zi = z[i];
        let mut acc = Complex64::new(0.0, 0.0);
        for zj in z {
            let q = zi / zj;
            acc += q * q - q.inv() * q.inv() + 2.0 * (q - q.inv());
        }
        let zi2 = zi * zi;
        acc += 2.0 * r * r * (zi2 - zi2.inv()) + 4.0 * r * (zi - zi.inv());
        angle[i] = acc;
    }
    let radial = z
        .iter()
        .map(|zj| r * (zj * zj + (zj * zj).inv()) + 2.0 * (zj + zj.inv()))
        .sum::<Complex64>()
        + 16.0 * r.powi(3)
        + 6.0 * r;
    (angle, radial)
}

/// On-shell complex residuals; the radial one is real there.
pub fn complex_residuals(s: &SpecialCaseState) -> ([Complex64; 3], f64) {
    let (angle, radial) = complex_residuals_z(&s.z(), s.r);
    (angle, radial.re)
}

/// Sum identity for `r ≠ 0` at a critical state: `r s₂ + 2 s₁ + 8r³ + 3r`
/// (and the same with negative powers). Returns both residuals.
pub fn power_sum_identity(z: &[Complex64; 3], r: f64) -> (Complex64, Complex64) {
    let s1: Complex64 = z.iter().sum();
    let s2: Complex64 = z.iter().map(|v| v * v).sum();
    let sm1: Complex64 = z.iter().map(|v| v.inv()).sum();
    let sm2: Complex64 = z.iter().map(|v| (v * v).inv()).sum();
    let rhs = 8.0 * r.powi(3) + 3.0 * r;
    (r * s2 + 2.0 * s1 + rhs, r * sm2 + 2.0 * sm1 + rhs)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::config::{energy, tbp, InnerProductMultiset};
    use crate::equilibrium::residual_general;
    use crate::potential::Potential;

    fn random_state(rng: &mut ChaCha8Rng) -> SpecialCaseState {
        let th = [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)];
        SpecialCaseState::new(th, rng.random_range(-0.95..0.95)).unwrap()
    }

    fn tbp_state() -> SpecialCaseState {
        SpecialCaseState::new([0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0], 0.0).unwrap()
    }

    #[test]
    fn embed_zero_height_is_tbp() {
        let c = embed(&tbp_state());
        let d = c.gram().multiset().linf_distance(&tbp().gram().multiset());
        assert!(d < 1e-15);
        assert!((energy_sc(&tbp_state()) - 6.75).abs() < 1e-14);
    }

    #[test]
    fn embed_mirror_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = embed(&random_state(&mut rng));
        let (p, q) = (c.point(3), c.point(4));
        assert_eq!(p[0], q[0]);
        assert_eq!(p[2], -q[2]);
    }

    #[test]
    fn fp_shaped_state() {
        let r: f64 = -0.2863;
        let th2 = r.acos();
        let s = SpecialCaseState::new([0.0, th2, -th2], r).unwrap();
        let mut want = vec![r; 4];
        want.extend([r * r; 4]);
        want.extend([2.0 * r * r - 1.0; 2]);
        let d = embed(&s).gram().multiset().linf_distance(&InnerProductMultiset::from_values(want));
        assert!(d < 1e-14);
    }

    #[test]
    fn degenerate_state_energy() {
        let s = SpecialCaseState::new([0.7; 3], 0.0).unwrap();
        assert!((energy_sc(&s) - 18.0).abs() < 1e-13);
    }

    #[test]
    fn energy_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let s = random_state(&mut rng);
            let direct = energy(&embed(&s), &Potential::biquadratic()).unwrap();
            assert!((direct - energy_sc(&s)).abs() <= 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = 1e-5;
        for _ in 0..100 {
            let s = random_state(&mut rng);
            let an = energy_gradient_sc(&s);
            let scale = an.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
            for k in 0..4 {
                let shift = |d: f64| {
                    let mut th = s.thetas();
                    let mut r = s.r();
                    if k < 3 {
                        th[k] += d;
                    } else {
                        r += d;
                    }
                    energy_sc(&SpecialCaseState::new(th, r).unwrap())
                };
                let fd = (shift(h) - shift(-h)) / (2.0 * h);
                assert!((fd - an[k]).abs() <= 1e-6 * scale, "k={k}: {fd} vs {}", an[k]);
            }
        }
    }

    #[test]
    fn gradient_matches_tangential_residual() {
        // chain rule: ∂E/∂θ_i = F_i · dp_i/dθ_i and
        // ∂E/∂r = Σ_{apex} F_a · dp_a/dr, with F the tangential gradient
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let s = random_state(&mut rng);
            let c = embed(&s);
            let f = residual_general(&c, &Potential::biquadratic()).unwrap().residual_vectors;
            let an = energy_gradient_sc(&s);
            for i in 0..3 {
                let t = s.thetas()[i];
                let d = -t.sin() * f[i][0] + t.cos() * f[i][1];
                assert!((d - an[i]).abs() < 1e-9);
            }
            let r = s.r();
            let h = (1.0 - r * r).sqrt();
            let dr = f[3][0] - r / h * f[3][2] + f[4][0] + r / h * f[4][2];
            assert!((dr - an[3]).abs() < 1e-9);
        }
    }

    #[test]
    fn tbp_state_gradient_vanishes() {
        assert!(gradient_sc(&tbp_state()).iter().all(|g| g.abs() <= 1e-12));
        let (angle, radial) = complex_residuals(&tbp_state());
        assert!(angle.iter().all(|a| a.norm() <= 1e-12));
        assert!(radial.abs() <= 1e-12);
    }

    #[test]
    fn complex_equations_scale_fixed_at_one_state_hold_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let s0 = random_state(&mut rng);
        let (angle0, radial0) = complex_residuals(&s0);
        let g0 = gradient_sc(&s0);
        let angle_scale = angle0[0] / g0[0];
        let radial_scale = radial0 / g0[3];
        assert!((angle_scale - ANGLE_EQUATION_SCALE).norm() < 1e-10);
        assert!((radial_scale - R_EQUATION_SCALE).abs() < 1e-10);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            let (angle, radial) = complex_residuals(&s);
            let g = gradient_sc(&s);
            for i in 0..3 {
                assert!((angle[i] - ANGLE_EQUATION_SCALE * g[i]).norm() < 1e-10);
            }
            assert!((radial - R_EQUATION_SCALE * g[3]).abs() < 1e-10);
        }
    }

    #[test]
    fn sign_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let s = random_state(&mut rng);
            let n = s.negated();
            let (a, ra) = complex_residuals(&s);
            let (b, rb) = complex_residuals(&n);
            for i in 0..3 {
                assert!((a[i] - b[i]).norm() < 1e-12);
            }
            assert!((ra + rb).abs() < 1e-12);
            assert!((energy_sc(&s) - energy_sc(&n)).abs() < 1e-12);
        }
    }

    #[test]
    fn state_validation() {
        assert!(SpecialCaseState::new([0.0; 3], 1.0).is_err());
        assert!(SpecialCaseState::new([f64::NAN, 0.0, 0.0], 0.0).is_err());
        let s = SpecialCaseState::new([-1.0, 7.0, TAU], 0.2).unwrap();
        assert!(s.thetas().iter().all(|t| (0.0..TAU).contains(t)));
    }
}
