//! Equilibrium residuals for configurations on the sphere.
//!
//! A configuration is critical for `E_h` iff for every point
//! `Σ_j h'(b_ij) (p_j − b_ij p_i) = 0`, i.e. the net force on each point is
//! normal to the sphere. The residual vectors below are exactly those left
//! sides (no rescaling), so every tolerance here is absolute.

use serde::{Deserialize, Serialize};

use crate::config::{coincide, dot, energy, Configuration};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::spectral::SpectralData;

/// Max-norm threshold certifying a critical point.
pub const CRITICAL_TOL: f64 = 1e-8;
/// Off-diagonal `X^T X` beyond this means the frame is not normalized.
pub const NORMALIZED_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    /// Tangential force on each point.
    pub residual_vectors: Vec<Vec<f64>>,
    /// Largest Euclidean norm among the residual vectors.
    pub max_norm: f64,
    /// Lagrange multipliers `μ_i = ½ Σ_{j≠i} h'(b_ij) b_ij`.
    pub multipliers: Vec<f64>,
}

impl EquilibriumReport {
    fn from_parts(residual_vectors: Vec<Vec<f64>>, multipliers: Vec<f64>) -> Self {
        let max_norm = residual_vectors
            .iter()
            .map(|v| crate::config::norm(v))
            .fold(0.0, f64::max);
        EquilibriumReport {
            residual_vectors,
            max_norm,
            multipliers,
        }
    }

    pub fn is_critical(&self) -> bool {
        self.max_norm <= CRITICAL_TOL
    }
}

/// `Σ_{j≠i} h'(b_ij)(p_j − b_ij p_i)` for every point, which is also the
/// tangential gradient of `E_h` at `p_i`.
pub fn residual_general(config: &Configuration, pot: &Potential) -> Result<EquilibriumReport> {
    let (n, m) = (config.n(), config.m());
    let singular = pot.derivative_singular_at_coincidence();
    let mut residuals = vec![vec![0.0; m]; n];
    let mut multipliers = vec![0.0; n];
    for i in 0..n {
        let pi = config.point(i);
        for j in 0..n {
            if j == i {
                continue;
            }
            let pj = config.point(j);
            if singular && coincide(pi, pj) {
                return Err(Error::DegeneratePair(i.min(j), i.max(j)));
            }
            let b = dot(pi, pj);
            let w = pot.dh(b);
            multipliers[i] += 0.5 * w * b;
            for k in 0..m {
                residuals[i][k] += w * (pj[k] - b * pi[k]);
            }
        }
    }
    Ok(EquilibriumReport::from_parts(residuals, multipliers))
}

/// `Σ_j (b_ij + 1)(p_j − b_ij p_i)`: the biquadratic case with the factor
/// 2 of `h'(t) = 2(t + 1)` dropped.
pub fn residual_biquadratic(config: &Configuration) -> EquilibriumReport {
    residual_biquadratic_with_diagonal(config, false)
}

/// As [`residual_biquadratic`], optionally keeping the `j = i` summand (which
/// vanishes identically).
pub fn residual_biquadratic_with_diagonal(
    config: &Configuration,
    include_diagonal: bool,
) -> EquilibriumReport {
    let (n, m) = (config.n(), config.m());
    let mut residuals = vec![vec![0.0; m]; n];
    let mut multipliers = vec![0.0; n];
    for i in 0..n {
        let pi = config.point(i);
        for j in 0..n {
            let pj = config.point(j);
            let b = if i == j { 1.0 } else { dot(pi, pj) };
            if i == j && !include_diagonal {
                continue;
            }
            if i != j {
                multipliers[i] += (b + 1.0) * b;
            }
            for k in 0..m {
                residuals[i][k] += (b + 1.0) * (pj[k] - b * pi[k]);
            }
        }
    }
    EquilibriumReport::from_parts(residuals, multipliers)
}

/// Entrywise `(α_i − λ_k) x_ik − x̄_k` in the normalized frame, row-major
/// `n x m`.
///
/// This equals minus the biquadratic residual of the same configuration.
pub fn crit5_residual(normalized: &Configuration, sd: &SpectralData) -> Result<Vec<f64>> {
    let (n, m) = (normalized.n(), normalized.m());
    if sd.m() != m || sd.n() != n {
        return Err(Error::InvalidParameter(format!(
            "spectral data is for n={}, m={} but configuration has n={n}, m={m}",
            sd.n(),
            sd.m()
        )));
    }
    let mut off_diagonal = 0.0f64;
    for k in 0..m {
        for l in k + 1..m {
            let s: f64 = normalized.points().map(|p| p[k] * p[l]).sum();
            off_diagonal = off_diagonal.max(s.abs());
        }
    }
    if off_diagonal > NORMALIZED_TOL {
        return Err(Error::NotNormalized { off_diagonal });
    }
    let mut out = Vec::with_capacity(n * m);
    for (i, p) in normalized.points().enumerate() {
        for k in 0..m {
            out.push((sd.alphas[i] - sd.lambdas[k]) * p[k] - sd.centroid[k]);
        }
    }
    Ok(out)
}

/// Orthonormal basis of the tangent space at `p` (unit vector in `R^m`).
pub(crate) fn tangent_basis(p: &[f64]) -> Vec<Vec<f64>> {
    let m = p.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m.saturating_sub(1));
    for e in 0..m {
        if basis.len() + 1 == m {
            break;
        }
        let mut v = vec![0.0; m];
        v[e] = 1.0;
        for _ in 0..2 {
            let d = dot(&v, p);
            v.iter_mut().zip(p).for_each(|(x, y)| *x -= d * y);
            for b in &basis {
                let d = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nv = crate::config::norm(&v);
        if nv > 0.5 {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        }
    }
    basis
}

/// Max relative deviation between the analytic tangential gradient and
/// central finite differences of the energy along every tangent direction.
///
/// Points are perturbed as `normalize(p_i + ε v)`. The deviation is measured
/// against the largest analytic directional derivative, or absolutely when
/// the gradient is essentially zero.
pub fn gradient_fd_check(config: &Configuration, pot: &Potential, step: f64) -> Result<f64> {
    fd_deviation(config, pot, step, |c| residual_general(c, pot))
}

pub(crate) fn fd_deviation<F>(
    config: &Configuration,
    pot: &Potential,
    step: f64,
    analytic: F,
) -> Result<f64>
where
    F: Fn(&Configuration) -> Result<EquilibriumReport>,
{
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::InvalidParameter(format!("finite-difference step {step} outside [1e-7, 1e-3]")));
    }
    let report = analytic(config)?;
    let (n, m) = (config.n(), config.m());
    let mut worst_abs = 0.0f64;
    let mut largest = 0.0f64;
    for i in 0..n {
        let p = config.point(i).to_vec();
        for v in tangent_basis(&p) {
            let shifted = |sign: f64| -> Result<f64> {
                let mut coords = config.coords().to_vec();
                for k in 0..m {
                    coords[i * m + k] = p[k] + sign * step * v[k];
                }
                energy(&Configuration::from_directions(n, m, coords), pot)
            };
            let fd = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * step);
            let an = dot(&report.residual_vectors[i], &v);
            worst_abs = worst_abs.max((fd - an).abs());
            largest = largest.max(an.abs());
        }
    }
    Ok(if largest > 1e-8 { worst_abs / largest } else { worst_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{fp, random_config, tbp, tetrahedron};
    use crate::spectral::normalize;

    #[test]
    fn tbp_is_critical() {
        let rep = residual_general(&tbp(), &Potential::biquadratic()).unwrap();
        assert!(rep.max_norm <= 1e-12, "{}", rep.max_norm);
        assert!(residual_biquadratic(&tbp()).max_norm <= 1e-12);
    }

    #[test]
    fn tetrahedron_is_critical() {
        assert!(residual_biquadratic(&tetrahedron()).max_norm <= 1e-12);
    }

    #[test]
    fn arbitrary_fp_height_is_not_critical() {
        let rep = residual_general(&fp(0.3).unwrap(), &Potential::biquadratic()).unwrap();
        assert!(rep.max_norm > 1e-2);
    }

    #[test]
    fn general_is_twice_biquadratic() {
        for seed in 0..20 {
            let c = random_config(5, 3, seed);
            let g = residual_general(&c, &Potential::biquadratic()).unwrap();
            let b = residual_biquadratic(&c);
            for (gv, bv) in g.residual_vectors.iter().zip(&b.residual_vectors) {
                for (x, y) in gv.iter().zip(bv) {
                    assert!((x - 2.0 * y).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn residuals_are_tangent() {
        let pots = [Potential::biquadratic(), Potential::Log, Potential::InversePower { a: 1.0 }];
        for seed in 0..20 {
            let c = random_config(5, 3, seed);
            for pot in &pots {
                let rep = residual_general(&c, pot).unwrap();
                for (v, p) in rep.residual_vectors.iter().zip(c.points()) {
                    assert!(dot(v, p).abs() <= 1e-10 * crate::config::norm(v) + 1e-14);
                }
            }
        }
    }

    #[test]
    fn diagonal_term_is_zero() {
        for seed in 0..20 {
            let c = random_config(5, 3, seed);
            let a = residual_biquadratic_with_diagonal(&c, false);
            let b = residual_biquadratic_with_diagonal(&c, true);
            for (x, y) in a.residual_vectors.iter().flatten().zip(b.residual_vectors.iter().flatten()) {
                assert!((x - y).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn multipliers_match_normal_component() {
        // at a critical point Σ_{j≠i} h'(b_ij) p_j = 2 μ_i p_i
        let c = tbp();
        let pot = Potential::biquadratic();
        let rep = residual_general(&c, &pot).unwrap();
        for i in 0..c.n() {
            let mut force = vec![0.0; 3];
            for j in (0..c.n()).filter(|&j| j != i) {
                let w = pot.dh(dot(c.point(i), c.point(j)));
                force.iter_mut().zip(c.point(j)).for_each(|(f, x)| *f += w * x);
            }
            for (f, x) in force.iter().zip(c.point(i)) {
                assert!((f - 2.0 * rep.multipliers[i] * x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn crit5_equals_negated_rotated_biquadratic() {
        for seed in 0..20 {
            let c = random_config(5, 3, seed);
            let (y, sd) = normalize(&c);
            let eq6 = crit5_residual(&y, &sd).unwrap();
            let eq5 = residual_biquadratic(&y);
            for (i, row) in eq5.residual_vectors.iter().enumerate() {
                for k in 0..3 {
                    assert!((eq6[i * 3 + k] + row[k]).abs() <= 1e-12);
                }
            }
            assert!(eq6.iter().any(|v| v.abs() > 1e-2));
        }
    }

    #[test]
    fn crit5_tbp_and_not_normalized() {
        let (y, sd) = normalize(&tbp());
        assert!(crit5_residual(&y, &sd).unwrap().iter().all(|v| v.abs() <= 1e-10));
        let c = random_config(5, 3, 4);
        let (_, sd) = normalize(&c);
        assert!(matches!(crit5_residual(&c, &sd), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn fd_check_random_and_tbp() {
        let pot = Potential::biquadratic();
        for seed in 0..10 {
            let d = gradient_fd_check(&random_config(5, 3, seed), &pot, 1e-5).unwrap();
            assert!(d <= 1e-6, "seed {seed}: {d}");
        }
        assert!(gradient_fd_check(&tbp(), &pot, 1e-5).unwrap() <= 1e-8);
    }

    #[test]
    fn fd_check_detects_sign_error() {
        let pot = Potential::biquadratic();
        let c = random_config(5, 3, 1);
        let d = fd_deviation(&c, &pot, 1e-5, |c| {
            let mut rep = residual_general(c, &pot)?;
            rep.residual_vectors.iter_mut().flatten().for_each(|x| *x = -*x);
            Ok(rep)
        })
        .unwrap();
        assert!((d - 2.0).abs() < 1e-5, "{d}");
    }

    #[test]
    fn fd_check_other_potentials() {
        for pot in [Potential::Log, Potential::InversePower { a: 1.0 }, Potential::NegativePower { a: 1.0 }] {
            let d = gradient_fd_check(&random_config(5, 3, 21), &pot, 1e-5).unwrap();
            assert!(d <= 1e-6, "{pot:?}: {d}");
        }
    }

    #[test]
    fn fd_step_validated() {
        assert!(gradient_fd_check(&tbp(), &Potential::biquadratic(), 1.0).is_err());
    }

    #[test]
    fn singular_derivative_rejects_coincidence() {
        let c = Configuration::new(vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(residual_general(&c, &Potential::Log), Err(Error::DegeneratePair(0, 1))));
        assert!(residual_general(&c, &Potential::biquadratic()).is_ok());
    }
}
