//! Sparse bivariate polynomials.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::scalar::{Rational, Scalar};
use super::unipoly::UniPoly;

/// Polynomial `Σ c_ij x^i y^j` with no stored zero coefficients.
#[derive(Clone, PartialEq, Default)]
pub struct BiPoly<C> {
    terms: BTreeMap<(u32, u32), C>,
}

impl<C: Scalar> BiPoly<C> {
    pub fn zero() -> Self {
        BiPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, C::one())
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, C::one())
    }

    pub fn monomial(i: u32, j: u32, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    /// Sums the given terms, dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), C)>) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((i, j)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &C)> + '_ {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> C {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn degree_y(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn degree_x(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    /// Weighted degree `p·i + q·j` of a monomial.
    pub fn weighted(p: u32, q: u32, i: u32, j: u32) -> u64 {
        p as u64 * i as u64 + q as u64 * j as u64
    }

    /// Minimal weighted degree over the support.
    pub fn weighted_order(&self, p: u32, q: u32) -> Option<u64> {
        self.terms.keys().map(|&(i, j)| Self::weighted(p, q, i, j)).min()
    }

    /// Homogeneous components keyed by weighted degree.
    pub fn graded(&self, p: u32, q: u32) -> BTreeMap<u64, BiPoly<C>> {
        let mut out: BTreeMap<u64, BiPoly<C>> = BTreeMap::new();
        for (&(i, j), c) in &self.terms {
            out.entry(Self::weighted(p, q, i, j))
                .or_insert_with(Self::zero)
                .terms
                .insert((i, j), c.clone());
        }
        out
    }

    /// The component of weighted degree exactly `d`.
    pub fn component(&self, p: u32, q: u32, d: u64) -> BiPoly<C> {
        self.filter(|i, j| Self::weighted(p, q, i, j) == d)
    }

    /// Drops terms of weighted degree above `d`.
    pub fn truncate_weighted(&self, p: u32, q: u32, d: u64) -> BiPoly<C> {
        self.filter(|i, j| Self::weighted(p, q, i, j) <= d)
    }

    pub fn filter(&self, keep: impl Fn(u32, u32) -> bool) -> BiPoly<C> {
        BiPoly {
            terms: self
                .terms
                .iter()
                .filter(|(&(i, j), _)| keep(i, j))
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> BiPoly<D> {
        BiPoly::from_terms(self.terms.iter().map(|(&k, c)| (k, f(c))))
    }

    pub fn scale(&self, s: &C) -> BiPoly<C> {
        self.map_coeffs(|c| c.clone() * s.clone())
    }

    /// Drops coefficients with `|c| ≤ tol`.
    pub fn prune(&self, tol: f64) -> BiPoly<C> {
        BiPoly {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.magnitude() > tol)
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn dx(&self) -> BiPoly<C> {
        BiPoly::from_terms(
            self.terms
                .iter()
                .filter(|(&(i, _), _)| i > 0)
                .map(|(&(i, j), c)| ((i - 1, j), c.clone() * C::from_i64(i as i64))),
        )
    }

    pub fn dy(&self) -> BiPoly<C> {
        BiPoly::from_terms(
            self.terms
                .iter()
                .filter(|(&(_, j), _)| j > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c.clone() * C::from_i64(j as i64))),
        )
    }

    /// Lie derivative `P·∂ₓF + Q·∂ᵧF`.
    pub fn lie_derivative(&self, p: &BiPoly<C>, q: &BiPoly<C>) -> BiPoly<C> {
        &(p * &self.dx()) + &(q * &self.dy())
    }

    pub fn pow(&self, n: u32) -> BiPoly<C> {
        let mut acc = BiPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluation at complex arguments.
    pub fn eval_c64(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut s = Complex64::zero();
        for (&(i, j), c) in &self.terms {
            s += c.to_c64() * x.powu(i) * y.powu(j);
        }
        s
    }

    /// Evaluation at real arguments (real part for complex coefficients).
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let mut s = 0.0;
        for (&(i, j), c) in &self.terms {
            s += c.to_c64().re * x.powi(i as i32) * y.powi(j as i32);
        }
        s
    }

    /// Exact evaluation.
    pub fn eval(&self, x: &C, y: &C) -> C {
        let mut s = C::zero();
        for (&(i, j), c) in &self.terms {
            s = s + c.clone() * pow_scalar(x, i) * pow_scalar(y, j);
        }
        s
    }

    /// `P(1, η)` as a univariate polynomial in η.
    pub fn at_x_one(&self) -> UniPoly<C> {
        let mut coeffs = vec![C::zero(); self.degree_y().map_or(0, |d| d as usize + 1)];
        for (&(_, j), c) in &self.terms {
            coeffs[j as usize] = coeffs[j as usize].clone() + c.clone();
        }
        UniPoly::new(coeffs)
    }

    /// Multivariate division by `d` in lex order with `y > x`.
    ///
    /// Terms whose leading monomial is not divisible by that of `d` move to the
    /// remainder. `negligible` decides when a leftover coefficient is zero.
    pub fn div_rem(&self, d: &BiPoly<C>, negligible: impl Fn(&C) -> bool) -> (BiPoly<C>, BiPoly<C>) {
        let lead_key = |p: &BiPoly<C>| p.terms.keys().max_by_key(|&&(i, j)| (j, i)).copied();
        let (di, dj) = lead_key(d).expect("division by the zero polynomial");
        let dc = d.coeff(di, dj);
        let mut rest = self.clone();
        let mut quot = BiPoly::zero();
        let mut rem = BiPoly::zero();
        while let Some((i, j)) = lead_key(&rest) {
            let c = rest.terms.remove(&(i, j)).expect("present");
            if negligible(&c) {
                continue;
            }
            if i >= di && j >= dj {
                let t = c / dc.clone();
                quot.add_term(i - di, j - dj, t.clone());
                for (&(a, b), e) in d.terms.iter().filter(|(&k, _)| k != (di, dj)) {
                    let (ni, nj) = (a + i - di, b + j - dj);
                    let v = rest.coeff(ni, nj) - t.clone() * e.clone();
                    if v.is_zero() {
                        rest.terms.remove(&(ni, nj));
                    } else {
                        rest.terms.insert((ni, nj), v);
                    }
                }
            } else {
                rem.add_term(i, j, c);
            }
        }
        (quot, rem)
    }

    /// Exact quotient, `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &BiPoly<C>) -> Option<BiPoly<C>> {
        let (q, r) = self.div_rem(d, |c| c.is_zero());
        r.is_zero().then_some(q)
    }

    /// Coefficients as polynomials in x, indexed by the power of y.
    pub fn as_poly_in_y(&self) -> Vec<UniPoly<C>> {
        let Some(dy) = self.degree_y() else { return Vec::new() };
        let mut rows: Vec<Vec<C>> = vec![Vec::new(); dy as usize + 1];
        for (&(i, j), c) in &self.terms {
            let row = &mut rows[j as usize];
            if row.len() <= i as usize {
                row.resize(i as usize + 1, C::zero());
            }
            row[i as usize] = c.clone();
        }
        rows.into_iter().map(UniPoly::new).collect()
    }

    pub fn from_poly_in_y(rows: &[UniPoly<C>]) -> BiPoly<C> {
        BiPoly::from_terms(rows.iter().enumerate().flat_map(|(j, row)| {
            row.coeffs().iter().enumerate().map(move |(i, c)| ((i as u32, j as u32), c.clone()))
        }))
    }
}

fn pow_scalar<C: Scalar>(x: &C, n: u32) -> C {
    let mut acc = C::one();
    for _ in 0..n {
        acc = acc * x.clone();
    }
    acc
}

impl BiPoly<Rational> {
    pub fn to_f64(&self) -> BiPoly<f64> {
        self.map_coeffs(|c| c.to_c64().re)
    }
}

impl<C: Scalar> Add for &BiPoly<C> {
    type Output = BiPoly<C>;
    fn add(self, rhs: &BiPoly<C>) -> BiPoly<C> {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl<C: Scalar> Sub for &BiPoly<C> {
    type Output = BiPoly<C>;
    fn sub(self, rhs: &BiPoly<C>) -> BiPoly<C> {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }
}

impl<C: Scalar> Mul for &BiPoly<C> {
    type Output = BiPoly<C>;
    fn mul(self, rhs: &BiPoly<C>) -> BiPoly<C> {
        let mut out = BiPoly::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &rhs.terms {
                out.add_term(i + k, j + l, a.clone() * b.clone());
            }
        }
        out
    }
}

impl<C: Scalar> Neg for &BiPoly<C> {
    type Output = BiPoly<C>;
    fn neg(self) -> BiPoly<C> {
        self.map_coeffs(|c| -c.clone())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Scalar> $tr for BiPoly<C> {
            type Output = BiPoly<C>;
            fn $m(self, rhs: BiPoly<C>) -> BiPoly<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Scalar + fmt::Display> fmt::Display for BiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(i, j), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => write!(f, "*x")?,
                _ => write!(f, "*x^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "*y")?,
                _ => write!(f, "*y^{j}")?,
            }
        }
        Ok(())
    }
}

impl<C: fmt::Debug> fmt::Debug for BiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Greatest common divisor in ℚ[x, y], normalized to a monic leading coefficient.
pub fn bivariate_gcd(a: &BiPoly<Rational>, b: &BiPoly<Rational>) -> BiPoly<Rational> {
    if a.is_zero() {
        return monic_lex(b);
    }
    if b.is_zero() {
        return monic_lex(a);
    }
    let ra = a.as_poly_in_y();
    let rb = b.as_poly_in_y();
    let (ca, pa) = content_primitive(&ra);
    let (cb, pb) = content_primitive(&rb);
    let content = ca.gcd(&cb);
    let (mut f, mut g) = if pa.len() >= pb.len() { (pa, pb) } else { (pb, pa) };
    while !(g.len() == 1 && g[0].is_zero()) && !g.is_empty() {
        let r = pseudo_remainder(&f, &g);
        f = g;
        g = if r.is_empty() { Vec::new() } else { content_primitive(&r).1 };
    }
    let prim = if f.len() <= 1 {
        vec![UniPoly::new(vec![Rational::one()])]
    } else {
        f
    };
    let prim: Vec<UniPoly<Rational>> = prim.iter().map(|row| row * &content).collect();
    monic_lex(&BiPoly::from_poly_in_y(&prim))
}

fn monic_lex(p: &BiPoly<Rational>) -> BiPoly<Rational> {
    match p.terms.iter().max_by_key(|(&(i, j), _)| (j, i)) {
        Some((_, lc)) => {
            let inv = Rational::one() / lc.clone();
            p.scale(&inv)
        }
        None => p.clone(),
    }
}

fn trim_rows(rows: &mut Vec<UniPoly<Rational>>) {
    while rows.last().is_some_and(|r| r.is_zero()) {
        rows.pop();
    }
}

fn content_primitive(rows: &[UniPoly<Rational>]) -> (UniPoly<Rational>, Vec<UniPoly<Rational>>) {
    let mut content = UniPoly::zero();
    for r in rows {
        content = content.gcd(r);
    }
    if content.is_zero() {
        return (UniPoly::new(vec![Rational::one()]), rows.to_vec());
    }
    let mut prim: Vec<UniPoly<Rational>> = rows
        .iter()
        .map(|r| r.div_rem(&content).0)
        .collect();
    trim_rows(&mut prim);
    (content, prim)
}

fn pseudo_remainder(f: &[UniPoly<Rational>], g: &[UniPoly<Rational>]) -> Vec<UniPoly<Rational>> {
    let mut r: Vec<UniPoly<Rational>> = f.to_vec();
    trim_rows(&mut r);
    let dg = g.len() - 1;
    let lg = g[dg].clone();
    while r.len() > dg && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - dg;
        let mut next: Vec<UniPoly<Rational>> = r.iter().map(|c| c * &lg).collect();
        for (k, gk) in g.iter().enumerate() {
            next[k + shift] = &next[k + shift] - &(gk * &lr);
        }
        trim_rows(&mut next);
        r = next;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn q(n: i64) -> Rational {
        rat(n, 1)
    }

    #[test]
    fn arithmetic_and_derivatives() {
        let x = BiPoly::<Rational>::x();
        let y = BiPoly::<Rational>::y();
        let f = &(&x * &x) + &(&y * &y);
        assert_eq!(f.dx(), x.scale(&q(2)));
        assert_eq!(f.lie_derivative(&(-&y), &x), BiPoly::zero());
        assert_eq!((&f - &f), BiPoly::zero());
        assert_eq!(f.pow(2).coeff(2, 2), q(2));
    }

    #[test]
    fn exact_division() {
        let x = BiPoly::<Rational>::x();
        let y = BiPoly::<Rational>::y();
        let a = &(&x * &x) + &y;
        let b = &(&x * &y) - &x.pow(3);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        assert_eq!((&prod + &BiPoly::one()).div_exact(&a), None);
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let x = BiPoly::<Rational>::x();
        let y = BiPoly::<Rational>::y();
        let common = &(&x * &x) + &(&y * &y);
        let a = &common * &(&x + &y.scale(&q(2)));
        let b = &common * &(&x.pow(3) - &y);
        assert_eq!(bivariate_gcd(&a, &b), common);
        let c = &x + &y;
        assert_eq!(bivariate_gcd(&a, &(&c * &x)), BiPoly::one());
        assert_eq!(bivariate_gcd(&x.pow(2), &(&x * &y)), x);
    }

    #[test]
    fn graded_components() {
        let f = BiPoly::from_terms([((0, 2), q(1)), ((4, 0), rat(1, 2)), ((3, 1), q(5))]);
        let g = f.graded(1, 2);
        assert_eq!(g.len(), 2);
        assert_eq!(g[&4].len(), 2);
        assert_eq!(g[&5], BiPoly::monomial(3, 1, q(5)));
    }
}
