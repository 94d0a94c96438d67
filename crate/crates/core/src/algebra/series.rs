//! Truncated Puiseux series `Σ_{k≤M} a_k t^{k/n}` with explicit validity order.

use num_integer::Integer;
use thiserror::Error;

use super::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("division by a series whose known coefficients all vanish")]
    ZeroDivisor,
    #[error("quotient has negative powers (numerator valuation {num} < divisor valuation {den})")]
    NegativePowers { num: usize, den: usize },
    #[error("composition needs an inner series without constant term")]
    InnerConstantTerm,
    #[error("series variables `{0}` and `{1}` differ")]
    VariableMismatch(char, char),
    #[error("no coefficients remain after the operation")]
    OrderExhausted,
}

/// Series in `t^{1/n}` known modulo `t^{(order+1)/n}`.
///
/// Every binary operation returns the largest order at which the result is
/// determined by the operands' known coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<C> {
    variable: char,
    denom: u32,
    coeffs: Vec<C>,
}

impl<C: Scalar> TruncatedSeries<C> {
    /// Coefficients `a_0..=a_order`; `order = coeffs.len() − 1`.
    pub fn new(variable: char, denom: u32, coeffs: Vec<C>) -> Self {
        assert!(denom >= 1, "series denominator must be positive");
        assert!(!coeffs.is_empty(), "a series needs at least one known coefficient");
        TruncatedSeries { variable, denom, coeffs }
    }

    /// The power series variable `t` itself, known to `order`.
    pub fn variable_series(variable: char, order: usize) -> Self {
        let mut c = vec![C::zero(); order + 1];
        if order >= 1 {
            c[1] = C::one();
        }
        Self::new(variable, 1, c)
    }

    pub fn constant(variable: char, c: C, order: usize) -> Self {
        let mut v = vec![C::zero(); order + 1];
        v[0] = c;
        Self::new(variable, 1, v)
    }

    pub fn variable(&self) -> char {
        self.variable
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    /// Index of the first nonzero known coefficient, or `order + 1`.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(self.coeffs.len())
    }

    /// Re-expresses the series over the finer denominator `n` (a multiple of the current one).
    pub fn refine(&self, n: u32) -> Self {
        assert!(n % self.denom == 0, "refinement must be a multiple of the denominator");
        let f = (n / self.denom) as usize;
        let order = (self.order() + 1) * f - 1;
        let mut c = vec![C::zero(); order + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            c[k * f] = a.clone();
        }
        Self::new(self.variable, n, c)
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self), SeriesError> {
        if self.variable != other.variable {
            return Err(SeriesError::VariableMismatch(self.variable, other.variable));
        }
        let l = self.denom.lcm(&other.denom);
        Ok((self.refine(l), other.refine(l)))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(order + 1);
        Self::new(self.variable, self.denom, c)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        let (a, b) = self.aligned(other)?;
        let order = a.order().min(b.order());
        let c = (0..=order).map(|k| a.coeff(k) + b.coeff(k)).collect();
        Ok(Self::new(a.variable, a.denom, c))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.variable, self.denom, self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::new(self.variable, self.denom, self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Product, known through `min(O_a + v_b, O_b + v_a)`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        let (a, b) = self.aligned(other)?;
        let order = (a.order() + b.valuation()).min(b.order() + a.valuation());
        let mut c = vec![C::zero(); order + 1];
        for (i, x) in a.coeffs.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.coeffs.iter().enumerate() {
                if i + j > order {
                    break;
                }
                c[i + j] = c[i + j].clone() + x.clone() * y.clone();
            }
        }
        Ok(Self::new(a.variable, a.denom, c))
    }

    pub fn pow(&self, n: u32) -> Result<Self, SeriesError> {
        if n == 0 {
            return Ok(Self::new(self.variable, self.denom, {
                let mut c = vec![C::zero(); self.order() + 1];
                c[0] = C::one();
                c
            }));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Quotient `self / other`; the divisor's first nonzero term sets the shift.
    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        let (a, b) = self.aligned(other)?;
        let vb = b.valuation();
        if vb > b.order() {
            return Err(SeriesError::ZeroDivisor);
        }
        let va = a.valuation();
        if va < vb && va <= a.order() {
            return Err(SeriesError::NegativePowers { num: va, den: vb });
        }
        let oa = a.order().checked_sub(vb).ok_or(SeriesError::OrderExhausted)?;
        let order = oa.min(b.order() - vb + va.min(a.order() + 1) - vb);
        let lead = b.coeffs[vb].clone();
        let mut q: Vec<C> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut s = a.coeff(k + vb);
            for (j, qj) in q.iter().enumerate() {
                s = s - qj.clone() * b.coeff(vb + k - j);
            }
            q.push(s / lead.clone());
        }
        Ok(Self::new(a.variable, a.denom, q))
    }

    /// `self(inner(s))`; the result lives in the inner series' variable.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        if !inner.coeff(0).is_zero() {
            return Err(SeriesError::InnerConstantTerm);
        }
        assert!(self.denom == 1, "outer series of a composition must be a power series");
        let vb = inner.valuation().max(1);
        let unknown_from = (self.order() + 1) * vb - 1;
        let kmin = (1..=self.order()).find(|&k| !self.coeffs[k].is_zero());
        let order = match kmin {
            Some(k) => (inner.order() + (k - 1) * vb).min(unknown_from),
            None => unknown_from,
        };
        let mut acc = vec![C::zero(); order + 1];
        acc[0] = self.coeff(0);
        let inner_t = inner.truncate(inner.order().min(order));
        let mut power = inner_t.clone();
        for k in 1..=self.order() {
            if k * vb > order {
                break;
            }
            let ak = &self.coeffs[k];
            if !ak.is_zero() {
                for (i, c) in power.coeffs.iter().enumerate().take(order + 1) {
                    acc[i] = acc[i].clone() + ak.clone() * c.clone();
                }
            }
            power = power.mul(&inner_t)?;
            if power.order() > order {
                power = power.truncate(order);
            }
        }
        Ok(Self::new(inner.variable, inner.denom, acc))
    }

    /// Derivative with respect to the series variable `t = x^{1/n}`.
    pub fn differentiate(&self) -> Result<Self, SeriesError> {
        if self.order() == 0 {
            return Err(SeriesError::OrderExhausted);
        }
        let c = (1..=self.order()).map(|k| self.coeffs[k].clone() * C::from_i64(k as i64)).collect();
        Ok(Self::new(self.variable, self.denom, c))
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> TruncatedSeries<D> {
        TruncatedSeries::new(self.variable, self.denom, self.coeffs.iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, Rational};

    fn s(c: &[i64]) -> TruncatedSeries<Rational> {
        TruncatedSeries::new('t', 1, c.iter().map(|&v| rat(v, 1)).collect())
    }

    #[test]
    fn shifted_division() {
        let q = s(&[0, 0, 1, 1]).div(&s(&[0, 0, 1, 0])).unwrap();
        assert_eq!(q, s(&[1, 1]));
    }

    #[test]
    fn compose_with_identity() {
        let a = s(&[3, 1, -2, 5]);
        let id = TruncatedSeries::variable_series('t', 10);
        assert_eq!(a.compose(&id).unwrap(), a);
    }

    #[test]
    fn mixed_denominators() {
        let a = TruncatedSeries::new('t', 2, vec![rat(1, 1), rat(1, 1)]);
        let b = s(&[0, 1]);
        let c = a.mul(&b).unwrap();
        assert_eq!(c.denom(), 2);
        assert_eq!(c.coeffs(), &[rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 1)]);
    }

    #[test]
    fn division_errors() {
        assert_eq!(s(&[1, 1]).div(&s(&[0, 0])), Err(SeriesError::ZeroDivisor));
        assert!(matches!(s(&[1, 1, 0]).div(&s(&[0, 1, 0])), Err(SeriesError::NegativePowers { .. })));
    }

    #[test]
    fn derivative() {
        assert_eq!(s(&[1, 2, 3]).differentiate().unwrap(), s(&[2, 6]));
    }
}
