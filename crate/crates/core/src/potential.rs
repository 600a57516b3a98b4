//! Pairwise potentials written in the inner-product variable `t = p·q`.
//!
//! A distance potential `f(r)` becomes `h(t) = f(sqrt(2 - 2t))`, since
//! `|p - q|^2 = 2 - 2t` for unit vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `h(t) = (t + a)^2` with `a >= 1`; the biquadratic family.
    BiquadraticShift { a: f64 },
    /// `f(r) = -log r`.
    Log,
    /// `f(r) = r^-a`, `a > 0`.
    InversePower { a: f64 },
    /// `f(r) = -r^a`, `0 < a <= 2`.
    NegativePower { a: f64 },
}

impl Default for Potential {
    fn default() -> Self {
        Potential::BiquadraticShift { a: 1.0 }
    }
}

impl Potential {
    /// The canonical potential `h(t) = (t + 1)^2`.
    pub const fn biquadratic() -> Self {
        Potential::BiquadraticShift { a: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Potential::BiquadraticShift { a } => a >= 1.0,
            Potential::Log => true,
            Potential::InversePower { a } => a > 0.0,
            Potential::NegativePower { a } => a > 0.0 && a <= 2.0,
        };
        if ok && self.exponent().is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?} outside its admissible range")))
        }
    }

    fn exponent(&self) -> f64 {
        match *self {
            Potential::BiquadraticShift { a }
            | Potential::InversePower { a }
            | Potential::NegativePower { a } => a,
            Potential::Log => 0.0,
        }
    }

    /// Energy of one pair with inner product `t`.
    pub fn h(&self, t: f64) -> f64 {
        let sq = (2.0 - 2.0 * t).max(0.0);
        match *self {
            Potential::BiquadraticShift { a } => (t + a) * (t + a),
            Potential::Log => -0.5 * sq.ln(),
            Potential::InversePower { a } => sq.powf(-0.5 * a),
            Potential::NegativePower { a } => -sq.powf(0.5 * a),
        }
    }

    /// Derivative `dh/dt`.
    pub fn dh(&self, t: f64) -> f64 {
        let sq = (2.0 - 2.0 * t).max(0.0);
        match *self {
            Potential::BiquadraticShift { a } => 2.0 * (t + a),
            Potential::Log => 1.0 / sq,
            Potential::InversePower { a } => a * sq.powf(-0.5 * a - 1.0),
            Potential::NegativePower { a } => a * sq.powf(0.5 * a - 1.0),
        }
    }

    /// Whether `h` itself blows up at coincident points.
    pub fn singular_at_coincidence(&self) -> bool {
        matches!(self, Potential::Log | Potential::InversePower { .. })
    }

    /// Whether `h'` blows up at coincident points.
    pub fn derivative_singular_at_coincidence(&self) -> bool {
        match *self {
            Potential::BiquadraticShift { .. } => false,
            Potential::NegativePower { a } => a < 2.0,
            Potential::Log | Potential::InversePower { .. } => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn biquadratic_values() {
        let p = Potential::biquadratic();
        assert_eq!(p.h(-1.0), 0.0);
        assert_eq!(p.h(0.0), 1.0);
        assert_eq!(p.dh(-0.5), 1.0);
    }

    #[test]
    fn biquadratic_increasing_for_admissible_shift() {
        for a in [1.0, 1.5, 3.0] {
            let p = Potential::BiquadraticShift { a };
            let mut prev = p.h(-1.0);
            for k in 1..=200 {
                let t = -1.0 + k as f64 / 100.0;
                let v = p.h(t);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn distance_potentials_match_their_definitions() {
        // t = 0 means r = sqrt(2)
        let r = 2f64.sqrt();
        assert!((Potential::Log.h(0.0) + r.ln()).abs() < 1e-15);
        assert!((Potential::InversePower { a: 1.0 }.h(0.0) - 1.0 / r).abs() < 1e-15);
        assert!((Potential::NegativePower { a: 1.0 }.h(0.0) + r).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let pots = [
            Potential::BiquadraticShift { a: 1.7 },
            Potential::Log,
            Potential::InversePower { a: 1.3 },
            Potential::NegativePower { a: 0.7 },
        ];
        for p in pots {
            for t in [-0.9, -0.3, 0.2, 0.6] {
                let e = 1e-6;
                let fd = (p.h(t + e) - p.h(t - e)) / (2.0 * e);
                assert!((fd - p.dh(t)).abs() < 1e-7 * (1.0 + fd.abs()), "{p:?} at {t}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(Potential::BiquadraticShift { a: 0.5 }.validate().is_err());
        assert!(Potential::InversePower { a: 0.0 }.validate().is_err());
        assert!(Potential::NegativePower { a: 2.5 }.validate().is_err());
        assert!(Potential::NegativePower { a: 2.0 }.validate().is_ok());
    }
}
