//! Dense univariate polynomials over a field.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::scalar::Scalar;

/// `Σ c_k t^k`, coefficients ascending, trailing zeros trimmed.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct UniPoly<C> {
    coeffs: Vec<C>,
}

impl<C: Scalar> UniPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        UniPoly { coeffs: vec![C::one()] }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn eval(&self, t: &C) -> C {
        self.coeffs.iter().rev().fold(C::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    pub fn eval_c64(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c.to_c64())
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.to_c64()).collect()
    }

    pub fn derivative(&self) -> Self {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * C::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn scale(&self, s: &C) -> Self {
        UniPoly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lc) => self.scale(&(C::one() / lc.clone())),
            None => self.clone(),
        }
    }

    /// Euclidean division.
    ///
    /// # Panics
    /// Panics when `d` is zero.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lc = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![C::zero(); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let t = rem[k].clone() / lc.clone();
            if t.is_zero() {
                continue;
            }
            for (i, c) in d.coeffs.iter().enumerate() {
                rem[k - dd + i] = rem[k - dd + i].clone() - t.clone() * c.clone();
            }
            quot[k - dd] = t;
        }
        rem.truncate(dd);
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    /// Monic greatest common divisor (exact fields).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun square-free decomposition: `self = c · Π f_i^i`, returned as `(f_i, i)` with
    /// non-constant monic `f_i`. Characteristic zero.
    pub fn squarefree(&self) -> Vec<(Self, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let d = self.derivative();
        let a = self.gcd(&d);
        let mut b = self.div_rem(&a).0;
        let c = d.div_rem(&a).0;
        let mut dd = &c - &b.derivative();
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let g = b.gcd(&dd);
            b = b.div_rem(&g).0;
            let cc = dd.div_rem(&g).0;
            dd = &cc - &b.derivative();
            if g.degree().unwrap_or(0) > 0 {
                out.push((g.monic(), i));
            }
            i += 1;
        }
        out
    }
}

impl<C: Scalar> Add for &UniPoly<C> {
    type Output = UniPoly<C>;
    fn add(self, rhs: &UniPoly<C>) -> UniPoly<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<C: Scalar> Sub for &UniPoly<C> {
    type Output = UniPoly<C>;
    fn sub(self, rhs: &UniPoly<C>) -> UniPoly<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<C: Scalar> Mul for &UniPoly<C> {
    type Output = UniPoly<C>;
    fn mul(self, rhs: &UniPoly<C>) -> UniPoly<C> {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        UniPoly::new(out)
    }
}

impl<C: Scalar> Neg for &UniPoly<C> {
    type Output = UniPoly<C>;
    fn neg(self) -> UniPoly<C> {
        UniPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, Rational};

    fn poly(c: &[i64]) -> UniPoly<Rational> {
        UniPoly::new(c.iter().map(|&n| rat(n, 1)).collect())
    }

    #[test]
    fn division_and_gcd() {
        let a = poly(&[-1, 0, 1]); // t² − 1
        let b = poly(&[1, 1]); // t + 1
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, poly(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(a.gcd(&poly(&[1, 2, 1])), b);
    }

    #[test]
    fn yun_decomposition() {
        // (t − 1)(t + 2)³ t²
        let f = &(&poly(&[-1, 1]) * &poly(&[2, 1]).pow_for_test(3)) * &poly(&[0, 0, 1]);
        let sf = f.squarefree();
        assert_eq!(sf, vec![(poly(&[-1, 1]), 1), (poly(&[0, 1]), 2), (poly(&[2, 1]), 3)]);
    }

    impl UniPoly<Rational> {
        fn pow_for_test(&self, n: u32) -> Self {
            (0..n).fold(poly(&[1]), |acc, _| &acc * self)
        }
    }
}
