//! Exact-integer certificate polynomials and real-root isolation by Sturm
//! sequences over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree accepted by [`real_roots`].
pub const MAX_DEGREE: usize = 30;
/// Target enclosure width.
pub const ENCLOSURE_WIDTH: f64 = 1e-14;

/// Integer polynomial, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialCert {
    pub coefficients: Vec<i64>,
    pub tag: String,
}

impl PolynomialCert {
    pub fn new(tag: impl Into<String>, coefficients: Vec<i64>) -> Self {
        PolynomialCert {
            coefficients,
            tag: tag.into(),
        }
    }

    /// Degree of the stored coefficient list (the leading entry may be zero).
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
    }

    pub fn mul(&self, other: &PolynomialCert) -> PolynomialCert {
        let mut out = vec![0i64; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolynomialCert::new(format!("({})*({})", self.tag, other.tag), out)
    }

    /// Divides by `x^k`, requiring the low coefficients to vanish.
    pub fn deflate(&self, k: usize) -> Result<PolynomialCert> {
        if self.coefficients.iter().take(k).any(|&c| c != 0) {
            return Err(Error::InvalidParameter(format!("{} is not divisible by x^{k}", self.tag)));
        }
        Ok(PolynomialCert::new(
            format!("{}/x^{k}", self.tag),
            self.coefficients[k.min(self.coefficients.len())..].to_vec(),
        ))
    }

    /// Every nonzero coefficient is positive.
    pub fn nonzero_coefficients_positive(&self) -> bool {
        self.coefficients.iter().all(|&c| c >= 0) && self.coefficients.iter().any(|&c| c > 0)
    }

    /// Only even powers carry nonzero coefficients.
    pub fn is_even(&self) -> bool {
        self.coefficients.iter().skip(1).step_by(2).all(|&c| c == 0)
    }

    /// Discriminant `b² − 4ac` of a quadratic.
    pub fn quadratic_discriminant(&self) -> Option<i64> {
        match self.coefficients[..] {
            [c, b, a] if a != 0 => Some(b * b - 4 * a * c),
            _ => None,
        }
    }
}

/// An isolating interval `[lo, hi]` for one real root. Endpoints are the
/// nearest doubles to exact rational endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootEnclosure {
    pub lo: f64,
    pub hi: f64,
}

impl RootEnclosure {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

type Poly = Vec<BigRational>;

fn to_rational(coefficients: &[i64]) -> Poly {
    let mut p: Poly = coefficients
        .iter()
        .map(|&c| BigRational::from_integer(BigInt::from(c)))
        .collect();
    trim(&mut p);
    p
}

fn trim(p: &mut Poly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn derivative(p: &Poly) -> Poly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
        .collect()
}

/// Polynomial remainder of `a` by nonzero `b`.
fn rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b.last().expect("nonzero divisor");
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let factor = r.last().expect("nonempty") / lead;
        for (k, c) in b.iter().enumerate() {
            let t = &factor * c;
            r[shift + k] -= t;
        }
        r.pop();
        trim(&mut r);
    }
    r
}

fn quotient(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    if r.len() <= db {
        return vec![];
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    let lead = b.last().expect("nonzero divisor");
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let factor = r.last().expect("nonempty") / lead;
        for (k, c) in b.iter().enumerate() {
            let t = &factor * c;
            r[shift + k] -= t;
        }
        q[shift] = factor;
        r.pop();
    }
    q
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn eval(p: &Poly, x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn sturm_sequence(p: &Poly) -> Vec<Poly> {
    let mut seq = vec![p.clone(), derivative(p)];
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            break;
        }
        let r: Poly = rem(&seq[n - 2], &seq[n - 1]).into_iter().map(|c| -c).collect();
        if r.is_empty() {
            break;
        }
        seq.push(r);
    }
    seq
}

fn sign_changes(seq: &[Poly], x: &BigRational) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for p in seq {
        let v = eval(p, x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

fn prepare(p: &PolynomialCert) -> Result<Poly> {
    if p.coefficients.last().is_none_or(|&c| c == 0) {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    if p.degree() > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!("degree {} exceeds {MAX_DEGREE}", p.degree())));
    }
    let poly = to_rational(&p.coefficients);
    let d = derivative(&poly);
    if d.is_empty() {
        return Ok(poly);
    }
    let g = gcd(&poly, &d);
    Ok(if g.len() > 1 { quotient(&poly, &g) } else { poly })
}

/// Bound on the magnitude of every root: `1 + max |a_k / a_n|`.
fn root_bound(p: &Poly) -> BigRational {
    let lead = p.last().expect("nonzero").abs();
    let max = p.iter().map(|c| c.abs() / &lead).max().unwrap_or_else(BigRational::zero);
    max + BigRational::one()
}

/// Number of distinct real roots.
pub fn count_real_roots(p: &PolynomialCert) -> Result<usize> {
    let sf = prepare(p)?;
    if sf.len() <= 1 {
        return Ok(0);
    }
    let seq = sturm_sequence(&sf);
    let b = root_bound(&sf);
    Ok(sign_changes(&seq, &-b.clone()) - sign_changes(&seq, &b))
}

/// Isolates every distinct real root and refines each enclosure to width at
/// most [`ENCLOSURE_WIDTH`]. Roots are returned in increasing order.
pub fn real_roots(p: &PolynomialCert) -> Result<Vec<RootEnclosure>> {
    let sf = prepare(p)?;
    if sf.len() <= 1 {
        return Ok(vec![]);
    }
    let seq = sturm_sequence(&sf);
    let b = root_bound(&sf);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    // refine on a rational grid slightly finer than the target so the f64
    // endpoints still satisfy the width bound after rounding
    let target = BigRational::new(BigInt::from(1), BigInt::from(256_000_000_000_000u64));

    // (lo, hi] intervals with their root counts
    let mut stack = vec![(-b.clone(), b.clone())];
    let mut out = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let count = sign_changes(&seq, &lo) - sign_changes(&seq, &hi);
        if count == 0 {
            continue;
        }
        if count > 1 {
            let mid = (&lo + &hi) * &half;
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
            continue;
        }
        let (mut lo, mut hi) = (lo, hi);
        while &hi - &lo > target {
            let mid = (&lo + &hi) * &half;
            if eval(&sf, &mid).is_zero() {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if sign_changes(&seq, &lo) - sign_changes(&seq, &mid) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(RootEnclosure {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    Ok(out)
}

/// The even degree-26 polynomial in `r` that results from eliminating `x`
/// and `y` on the asymmetric branch `x ≠ y`.
pub fn asymmetric_certificate() -> PolynomialCert {
    let mut c = vec![0i64; 27];
    let printed = [
        (4, 7_744_275),
        (6, 80_139_015),
        (8, 351_783_930),
        (10, 861_239_064),
        (12, 1_282_072_196),
        (14, 1_176_047_932),
        (16, 632_113_944),
        (18, 172_153_584),
        (20, 18_541_440),
        (22, 3_882_816),
        (24, 777_600),
        (26, 186_624),
    ];
    for (power, coefficient) in printed {
        c[power] = coefficient;
    }
    PolynomialCert::new("asymmetric branch resultant", c)
}

/// Factors of the resultant in `r` on the symmetric branch `x = y`, `t = 1`.
pub fn symmetric_factors() -> Vec<PolynomialCert> {
    vec![
        PolynomialCert::new("r", vec![0, 1]),
        PolynomialCert::new("1+2r", vec![1, 2]),
        PolynomialCert::new("1+2r+2r^2", vec![1, 2, 2]),
        PolynomialCert::new("8-9r+6r^2", vec![8, -9, 6]),
        PolynomialCert::new("1+3r+6r^3", vec![1, 3, 0, 6]),
    ]
}

/// `6r³ + 3r + 1`.
pub fn fp_height_cubic() -> PolynomialCert {
    PolynomialCert::new("6r^3+3r+1", vec![1, 3, 0, 6])
}

/// `3x³ − 9x² + 15x − 5`.
pub fn fp_sum_cubic() -> PolynomialCert {
    PolynomialCert::new("3x^3-9x^2+15x-5", vec![-5, 15, -9, 3])
}
