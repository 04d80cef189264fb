//! Scalar types.
//!
//! All exact computations run over the Gaussian rationals `Q(i)`, represented
//! as `Complex<BigRational>`. The polynomial and matrix code is generic over
//! [`Scalar`], so the same routines also run over plain rationals and over
//! `f64`/`Complex<f64>` for the floating-point kernel comparison.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A field element usable by the generic polynomial and linear-algebra code.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Field conjugation; the identity on real fields.
    fn conj(&self) -> Self;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// `true` when arithmetic is exact, so zero tests are meaningful.
    fn is_exact() -> bool {
        true
    }

    /// Zero test with a tolerance for inexact types.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

/// Gaussian rational `a + b i` with `a, b` arbitrary-precision rationals.
pub type Qi = Complex<BigRational>;

/// Plain arbitrary-precision rational.
pub type Rational = BigRational;

impl Scalar for Qi {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_integer(n.into()), BigRational::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }
}

impl Scalar for BigRational {
    fn conj(&self) -> Self {
        self.clone()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }
}

const FLOAT_EPS: f64 = 1e-300;

impl Scalar for f64 {
    fn conj(&self) -> Self {
        *self
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn is_exact() -> bool {
        false
    }
    fn is_negligible(&self) -> bool {
        self.abs() < FLOAT_EPS
    }
}

impl Scalar for Complex<f64> {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn from_i64(n: i64) -> Self {
        Complex::new(n as f64, 0.0)
    }
    fn is_exact() -> bool {
        false
    }
    fn is_negligible(&self) -> bool {
        self.norm() < FLOAT_EPS
    }
}

/// Rational `n/d` as a [`BigRational`].
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Integer as a [`BigRational`].
pub fn rint(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Real Gaussian rational `n/d`.
pub fn qi(n: i64, d: i64) -> Qi {
    Complex::new(rat(n, d), BigRational::zero())
}

/// Gaussian rational from its two parts.
pub fn qi_parts(re: BigRational, im: BigRational) -> Qi {
    Complex::new(re, im)
}

/// The imaginary unit.
pub fn qi_i() -> Qi {
    Complex::new(BigRational::zero(), BigRational::one())
}

pub fn qi_from_rational(r: BigRational) -> Qi {
    Complex::new(r, BigRational::zero())
}

/// The rational value of a Gaussian rational with zero imaginary part.
pub fn qi_real(z: &Qi) -> Option<BigRational> {
    if z.im.is_zero() {
        Some(z.re.clone())
    } else {
        None
    }
}

pub fn qi_to_c64(z: &Qi) -> Complex<f64> {
    Complex::new(rat_to_f64(&z.re), rat_to_f64(&z.im))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down huge operands before dividing.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text form: `a`, `a/b`, `a/b+c/di`, `c/di`.
pub fn format_qi(z: &Qi) -> String {
    match (z.re.is_zero(), z.im.is_zero()) {
        (_, true) => fmt_rational(&z.re),
        (true, false) => format!("{}i", fmt_rational(&z.im)),
        (false, false) => {
            let sign = if z.im.is_negative() { "-" } else { "+" };
            format!("{}{}{}i", fmt_rational(&z.re), sign, fmt_rational(&z.im.abs()))
        }
    }
}

pub fn format_rational(r: &BigRational) -> String {
    fmt_rational(r)
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

/// Inverse of [`format_qi`].
pub fn parse_qi(s: &str) -> Result<Qi> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return Ok(qi_from_rational(parse_rational(s)?));
    };
    // Split at the last sign that is not the leading one.
    let split = body
        .char_indices()
        .skip(1)
        .filter(|(_, c)| *c == '+' || *c == '-')
        .map(|(k, _)| k)
        .last();
    match split {
        Some(k) => {
            let re = parse_rational(&body[..k])?;
            let im = parse_rational(&body[k..].trim_start_matches('+'))?;
            Ok(Complex::new(re, im))
        }
        None => Ok(Complex::new(BigRational::zero(), parse_rational(body)?)),
    }
}

/// Least common multiple of the denominators of both parts.
pub fn qi_denominator(z: &Qi) -> BigInt {
    num_integer::Integer::lcm(z.re.denom(), z.im.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_round_trips() {
        for z in [
            qi(0, 1),
            qi(-3, 4),
            qi_parts(rat(1, 2), rat(-5, 3)),
            qi_parts(rint(0), rat(7, 2)),
            qi_parts(rint(-2), rint(1)),
        ] {
            assert_eq!(parse_qi(&format_qi(&z)).unwrap(), z);
        }
        assert_eq!(format_qi(&qi_parts(rat(1, 2), rint(-1))), "1/2-1i");
        assert!(parse_qi("1/0").is_err());
    }

    #[test]
    fn conjugation_is_involutive_automorphism() {
        let a = qi_parts(rat(2, 3), rat(-1, 5));
        let b = qi_parts(rat(-7, 2), rat(4, 1));
        assert_eq!(Scalar::conj(&Scalar::conj(&a)), a);
        assert_eq!(Scalar::conj(&(a.clone() * b.clone())), Scalar::conj(&a) * Scalar::conj(&b));
        assert_eq!(Scalar::conj(&(a.clone() + b.clone())), Scalar::conj(&a) + Scalar::conj(&b));
    }
}
