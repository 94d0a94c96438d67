//! Coefficient fields used by the polynomial and series containers.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Exact rational number backed by arbitrary-precision integers.
pub type Rational = BigRational;

/// Gaussian rationals, the exact field for branch arithmetic with α₀ ∈ ℚ(i).
pub type ComplexRational = Complex<Rational>;

/// A field usable as polynomial or series coefficients.
pub trait Scalar:
    Clone + PartialEq + Debug + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// The smallest complex field containing `Self`.
    type Complexified: Scalar<Complexified = Self::Complexified>;

    /// Exact fields compare to zero literally; floating fields use tolerances.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;
    fn to_c64(&self) -> Complex64;
    fn conj(&self) -> Self;
    fn complexify(&self) -> Self::Complexified;
    fn imag_unit() -> Self::Complexified;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Scalar for Rational {
    type Complexified = ComplexRational;
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn complexify(&self) -> ComplexRational {
        Complex::new(self.clone(), Rational::zero())
    }
    fn imag_unit() -> ComplexRational {
        Complex::new(Rational::zero(), Rational::one())
    }
    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
}

impl Scalar for f64 {
    type Complexified = Complex64;
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn conj(&self) -> Self {
        *self
    }
    fn complexify(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn imag_unit() -> Complex64 {
        Complex64::i()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for ComplexRational {
    type Complexified = ComplexRational;
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        Complex::new(r.clone(), Rational::zero())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn complexify(&self) -> ComplexRational {
        self.clone()
    }
    fn imag_unit() -> ComplexRational {
        Complex::new(Rational::zero(), Rational::one())
    }
}

impl Scalar for Complex64 {
    type Complexified = Complex64;
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn complexify(&self) -> Complex64 {
        *self
    }
    fn imag_unit() -> Complex64 {
        Complex64::i()
    }
}

/// Nearest double to an exact rational (saturating to ±∞ on overflow).
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Shorthand constructor `n/d`.
///
/// # Panics
/// Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact binary expansion of a finite double.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Continued-fraction recognition of `x` as `h/k` with `k ≤ max_den`.
///
/// Returns the first convergent within `tol·max(1, |x|)` of `x`.
pub fn recognize_rational(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let scale = x.abs().max(1.0);
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den as i128 {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol * scale {
            return Some(Rational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = rest - a;
        if frac.abs() < 1e-300 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recognizes_simple_fractions() {
        assert_eq!(recognize_rational(1.0 / 3.0, 64, 1e-10), Some(rat(1, 3)));
        assert_eq!(recognize_rational(-4.0, 64, 1e-10), Some(rat(-4, 1)));
        assert_eq!(recognize_rational(-22.0 / 7.0, 64, 1e-10), Some(rat(-22, 7)));
        assert_eq!(recognize_rational(std::f64::consts::PI, 64, 1e-10), None);
        assert_eq!(recognize_rational(2f64.sqrt(), 64, 1e-10), None);
    }

    #[test]
    fn rational_round_trip() {
        assert_eq!(rational_to_f64(&rat(1, 4)), 0.25);
        assert_eq!(rational_from_f64(0.25), Some(rat(1, 4)));
    }
}
