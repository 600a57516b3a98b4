//! Power-sum variables `x = s₁`, `y = s₋₁`, `t = σ₃` of the three ring points
//! and the polynomial system they satisfy at critical states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominators smaller than this are treated as vanishing.
pub const DENOMINATOR_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformedVars {
    /// `s₁ = Σ z_j = σ₁`.
    pub x: Complex64,
    /// `s₋₁ = Σ 1/z_j`.
    pub y: Complex64,
    /// `σ₃ = z₁ z₂ z₃`.
    pub t: Complex64,
    /// `s₂ = x² − 2yt`.
    pub s2: Complex64,
    /// `s₋₂ = y² − 2x/t`.
    pub s_minus2: Complex64,
    /// `σ₂ = yt`.
    pub sigma2: Complex64,
}

impl TransformedVars {
    pub fn sigma1(&self) -> Complex64 {
        self.x
    }

    pub fn sigma3(&self) -> Complex64 {
        self.t
    }

    /// Coefficients `(A, B, C, D)` of `A z² + B z + C z⁻¹ + D z⁻²`, the
    /// angle equation of each ring point written in powers of that point.
    pub fn coefficients(&self, r: f64) -> [Complex64; 4] {
        let r2 = r * r;
        [
            self.s_minus2 + 2.0 * r2,
            2.0 * self.y + 4.0 * r,
            -2.0 * self.x - 4.0 * r,
            -self.s2 - 2.0 * r2,
        ]
    }

    /// `A z⁴ + B z³ + C z + D`.
    pub fn quartic(&self, r: f64, z: Complex64) -> Complex64 {
        let [a, b, c, d] = self.coefficients(r);
        ((a * z + b) * z * z + c) * z + d
    }
}

/// Power sums and elementary symmetric functions of `z`, using the Vieta
/// relations to express everything through `x`, `y`, `t`.
pub fn transform(z: &[Complex64; 3]) -> Result<TransformedVars> {
    if z.iter().any(|v| v.norm() < f64::MIN_POSITIVE) {
        return Err(Error::ZeroProduct);
    }
    let x: Complex64 = z.iter().sum();
    let y: Complex64 = z.iter().map(|v| v.inv()).sum();
    let t = z[0] * z[1] * z[2];
    if t.norm() < f64::MIN_POSITIVE {
        return Err(Error::ZeroProduct);
    }
    Ok(TransformedVars {
        x,
        y,
        t,
        s2: x * x - 2.0 * y * t,
        s_minus2: y * y - 2.0 * x / t,
        sigma2: y * t,
    })
}

/// Residuals of the `(x, y, t, r)` system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemResiduals {
    /// `t (xy² + 2r²x + 4y + 4r) − (3x² + 2r²)`
    pub t_first: Complex64,
    /// `t (3y² + 2r²) − (x²y + 2r²y + 4x + 4r)`
    pub t_second: Complex64,
    /// `t² y(y² + 2r²) − x(x² + 2r²)`
    pub t_squared: Complex64,
    /// `t` eliminated between the first two.
    pub eliminated_t: Complex64,
    /// `t` eliminated between the product of the first two and the square;
    /// antisymmetric in `x ↔ y`.
    pub antisymmetric: Complex64,
    /// The radial equation in the new variables.
    pub centroid_balance: Complex64,
    /// Same with `x ↔ y`.
    pub centroid_balance_swapped: Complex64,
    /// `antisymmetric / (2 r (x − y))`; meaningful only off the diagonal.
    pub reduced_asymmetric: Complex64,
}

impl SystemResiduals {
    /// Largest magnitude among every residual that applies on the symmetric
    /// branch (all except `reduced_asymmetric`).
    pub fn max_symmetric(&self) -> f64 {
        [
            self.t_first,
            self.t_second,
            self.t_squared,
            self.eliminated_t,
            self.antisymmetric,
            self.centroid_balance,
            self.centroid_balance_swapped,
        ]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
    }
}

pub(crate) fn num_first(x: Complex64, r: f64) -> Complex64 {
    3.0 * x * x + 2.0 * r * r
}

pub(crate) fn den_first(x: Complex64, y: Complex64, r: f64) -> Complex64 {
    x * y * y + 2.0 * r * r * x + 4.0 * y + 4.0 * r
}

pub(crate) fn num_second(x: Complex64, y: Complex64, r: f64) -> Complex64 {
    x * x * y + 2.0 * r * r * y + 4.0 * x + 4.0 * r
}

pub(crate) fn cubic_term(x: Complex64, r: f64) -> Complex64 {
    x * (x * x + 2.0 * r * r)
}

pub(crate) fn eliminated_t(x: Complex64, y: Complex64, r: f64) -> Complex64 {
    num_first(x, r) * num_first(y, r) - num_second(x, y, r) * den_first(x, y, r)
}

pub(crate) fn antisymmetric(x: Complex64, y: Complex64, r: f64) -> Complex64 {
    cubic_term(x, r) * num_first(y, r) * den_first(x, y, r)
        - cubic_term(y, r) * num_first(x, r) * num_second(x, y, r)
}

pub(crate) fn centroid_balance(x: Complex64, y: Complex64, r: f64) -> Complex64 {
    num_first(x, r) * (r * y * y + 2.0 * y + 8.0 * r.powi(3) + 3.0 * r)
        - 2.0 * r * x * den_first(x, y, r)
}

pub(crate) fn reduced_asymmetric(x: Complex64, y: Complex64, r: f64) -> Complex64 {
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r2 * r2;
    let r5 = r4 * r;
    let (x2, y2) = (x * x, y * y);
    8.0 * r4 + 4.0 * r5 * x + 4.0 * r2 * x2 + 2.0 * r3 * x2 * x + 4.0 * r5 * y
        - 8.0 * r2 * x * y
        - 8.0 * r * x2 * y
        + 2.0 * r3 * x2 * y
        + 4.0 * r2 * y2
        - 8.0 * r * x * y2
        + 2.0 * r3 * x * y2
        + 6.0 * x2 * y2
        + r * x2 * x * y2
        + 2.0 * r3 * y2 * y
        + r * x2 * y2 * y
}

/// Evaluates the system at `(x, y, t, r)`. Fails when one of the three
/// `t`-denominators is within [`DENOMINATOR_GUARD`] of zero.
pub fn system_residuals(x: Complex64, y: Complex64, t: Complex64, r: f64) -> Result<SystemResiduals> {
    let d1 = den_first(x, y, r);
    let d2 = num_first(y, r);
    let d3 = cubic_term(y, r);
    if d1.norm() < DENOMINATOR_GUARD {
        return Err(Error::DenominatorVanish("xy^2 + 2r^2x + 4y + 4r"));
    }
    if d2.norm() < DENOMINATOR_GUARD {
        return Err(Error::DenominatorVanish("3y^2 + 2r^2"));
    }
    if d3.norm() < DENOMINATOR_GUARD {
        return Err(Error::DenominatorVanish("y(y^2 + 2r^2)"));
    }
    Ok(SystemResiduals {
        t_first: t * d1 - num_first(x, r),
        t_second: t * d2 - num_second(x, y, r),
        t_squared: t * t * d3 - cubic_term(x, r),
        eliminated_t: eliminated_t(x, y, r),
        antisymmetric: antisymmetric(x, y, r),
        centroid_balance: centroid_balance(x, y, r),
        centroid_balance_swapped: centroid_balance(y, x, r),
        reduced_asymmetric: reduced_asymmetric(x, y, r),
    })
}

/// The four real equations whose common real zeros off the diagonal
/// `x = y` make up the asymmetric branch.
pub(crate) fn asymmetric_system(x: f64, y: f64, r: f64) -> [f64; 4] {
    let (x, y) = (Complex64::new(x, 0.0), Complex64::new(y, 0.0));
    [
        eliminated_t(x, y, r).re,
        centroid_balance(x, y, r).re,
        centroid_balance(y, x, r).re,
        reduced_asymmetric(x, y, r).re,
    ]
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::special_case::{complex_residuals_z, SpecialCaseState};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_z(rng: &mut ChaCha8Rng) -> [Complex64; 3] {
        [0; 3].map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
    }

    #[test]
    fn simple_transforms() {
        let i = Complex64::i();
        let v = transform(&[c(1.0), i, -i]).unwrap();
        assert!((v.x - c(1.0)).norm() < 1e-15);
        assert!((v.y - c(1.0)).norm() < 1e-15);
        assert!((v.t - c(1.0)).norm() < 1e-15);

        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let v = transform(&[c(1.0), w, w * w]).unwrap();
        assert!(v.x.norm() < 1e-15 && v.y.norm() < 1e-15);
        assert!((v.t - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_product_rejected() {
        assert!(matches!(transform(&[c(0.0), c(1.0), c(2.0)]), Err(Error::ZeroProduct)));
    }

    #[test]
    fn unit_modulus_conjugacy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let z = [0; 3].map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..6.3)));
            let v = transform(&z).unwrap();
            assert!((v.y - v.x.conj()).norm() < 1e-14);
            assert!((v.t.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn vieta_relations_off_shell() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let z = random_z(&mut rng);
            let v = transform(&z).unwrap();
            let s2: Complex64 = z.iter().map(|a| a * a).sum();
            let sm2: Complex64 = z.iter().map(|a| (a * a).inv()).sum();
            let sigma2 = z[0] * z[1] + z[0] * z[2] + z[1] * z[2];
            let scale = 1.0 + s2.norm() + sm2.norm() + sigma2.norm();
            assert!((v.s2 - s2).norm() < 1e-12 * scale);
            assert!((v.s_minus2 - sm2).norm() < 1e-12 * scale);
            assert!((v.sigma2 - sigma2).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn angle_equation_is_laurent_polynomial_in_its_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z = random_z(&mut rng);
            let r = rng.random_range(-0.9..0.9);
            let v = transform(&z).unwrap();
            let [a, b, cc, d] = v.coefficients(r);
            let (angle, _) = complex_residuals_z(&z, r);
            for i in 0..3 {
                let zi = z[i];
                let laurent = a * zi * zi + b * zi + cc / zi + d / (zi * zi);
                let scale = 1.0 + laurent.norm() + angle[i].norm();
                assert!((laurent - angle[i]).norm() < 1e-10 * scale);
                // z⁴-multiplied form
                assert!((v.quartic(r, zi) - zi * zi * angle[i]).norm() < 1e-10 * scale * (1.0 + zi.norm_sqr()));
            }
        }
    }

    #[test]
    fn coefficients_never_all_vanish_on_shell() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let s = SpecialCaseState::new([0; 3].map(|_| rng.random_range(0.0..6.3)), rng.random_range(-0.99..0.99))
                .unwrap();
            let v = transform(&s.z()).unwrap();
            let biggest = v.coefficients(s.r()).iter().map(|q| q.norm()).fold(0.0, f64::max);
            assert!(biggest > 1e-6);
        }
    }

    #[test]
    fn eliminations_are_consistent_identities() {
        // the two eliminants are combinations of the t-expressions, and the
        // reduced equation is the antisymmetric one divided by 2r(x − y)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let y = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let r = rng.random_range(-0.99..0.99);
            let lhs = antisymmetric(x, y, r);
            let rhs = 2.0 * r * (x - y) * reduced_asymmetric(x, y, r);
            assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
            let a = antisymmetric(y, x, r);
            assert!((a + lhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn known_symmetric_solution() {
        let res = system_residuals(c(1.0), c(1.0), c(1.0), -0.5).unwrap();
        assert!(res.max_symmetric() <= 1e-12);
        assert_eq!(res.centroid_balance, c(0.0));
    }

    #[test]
    fn sign_flip_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let x = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let y = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let t = Complex64::from_polar(1.0, rng.random_range(0.0..6.3));
            let r = rng.random_range(-0.99..0.99);
            let a = system_residuals(x, y, t, r).unwrap();
            let b = system_residuals(-x, -y, -t, -r).unwrap();
            // each residual is homogeneous of fixed parity under the flip
            for (u, v) in [
                (a.t_first, b.t_first),
                (a.t_second, b.t_second),
                (a.t_squared, b.t_squared),
                (a.eliminated_t, b.eliminated_t),
                (a.antisymmetric, b.antisymmetric),
                (a.centroid_balance, b.centroid_balance),
                (a.reduced_asymmetric, b.reduced_asymmetric),
            ] {
                assert!((u.norm() - v.norm()).abs() <= 1e-12 * (1.0 + u.norm()));
            }
        }
    }

    #[test]
    fn denominator_guard() {
        // y = 0, r = 0 makes 3y² + 2r² vanish
        let err = system_residuals(c(1.0), c(0.0), c(1.0), 0.0).unwrap_err();
        assert!(matches!(err, Error::DenominatorVanish(_)));
    }
}
