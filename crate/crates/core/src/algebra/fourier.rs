//! Trigonometric polynomials `Σ_{|k|≤N} c_k e^{ikφ}` and their zeros on the circle.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use super::bipoly::BiPoly;
use super::roots::{bisect, polynomial_roots};
use super::scalar::Scalar;
use super::unipoly::UniPoly;

/// Fourier polynomial with complex coefficients `c_{-N..=N}`.
#[derive(Clone, PartialEq, Debug)]
pub struct FourierPoly<C> {
    half_width: usize,
    coeffs: Vec<C>,
}

impl<C: Scalar> FourierPoly<C> {
    pub fn zero() -> Self {
        FourierPoly { half_width: 0, coeffs: vec![C::zero()] }
    }

    pub fn constant(c: C) -> Self {
        FourierPoly { half_width: 0, coeffs: vec![c] }
    }

    /// Builds from `(k, c_k)` pairs, summing duplicates.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, C)>) -> Self {
        let pairs: Vec<(i64, C)> = pairs.into_iter().collect();
        let n = pairs.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut coeffs = vec![C::zero(); 2 * n + 1];
        for (k, c) in pairs {
            let idx = (k + n as i64) as usize;
            coeffs[idx] = coeffs[idx].clone() + c;
        }
        FourierPoly { half_width: n, coeffs }.trimmed()
    }

    /// `e^{iφ}` raised to `k`.
    pub fn exp_ik(k: i64) -> Self {
        Self::from_pairs([(k, C::one())])
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Coefficient of `e^{ikφ}`.
    pub fn coeff(&self, k: i64) -> C {
        let n = self.half_width as i64;
        if k.abs() > n {
            C::zero()
        } else {
            self.coeffs[(k + n) as usize].clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `c_{-k} = conj(c_k)` for all k, i.e. the function is real-valued.
    pub fn is_real(&self) -> bool {
        let n = self.half_width as i64;
        (0..=n).all(|k| {
            let a = self.coeff(k);
            let b = self.coeff(-k).conj();
            if C::EXACT {
                a == b
            } else {
                (a - b).magnitude() <= 1e-12 * (1.0 + self.max_magnitude())
            }
        })
    }

    pub fn max_magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    fn trimmed(mut self) -> Self {
        while self.half_width > 0
            && self.coeffs[0].is_zero()
            && self.coeffs[self.coeffs.len() - 1].is_zero()
        {
            self.coeffs.pop();
            self.coeffs.remove(0);
            self.half_width -= 1;
        }
        self
    }

    pub fn scale(&self, s: &C) -> Self {
        FourierPoly {
            half_width: self.half_width,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
        .trimmed()
    }

    pub fn eval_c64(&self, phi: f64) -> Complex64 {
        let n = self.half_width as i64;
        let mut s = Complex64::new(0.0, 0.0);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let k = idx as i64 - n;
            s += c.to_c64() * Complex64::from_polar(1.0, k as f64 * phi);
        }
        s
    }

    /// Real part of the value at φ.
    pub fn eval(&self, phi: f64) -> f64 {
        self.eval_c64(phi).re
    }

    /// `z^N · f` as an ordinary polynomial in `z = e^{iφ}`; also returns `N`.
    pub fn to_z_poly(&self) -> (UniPoly<C>, usize) {
        (UniPoly::new(self.coeffs.clone()), self.half_width)
    }

    /// Cosine/sine coefficients `(a_k, b_k)` of the real part, `f = Σ a_k cos kφ + b_k sin kφ`.
    pub fn real_trig_coeffs(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.half_width as i64;
        let mut a = vec![0.0; n as usize + 1];
        let mut b = vec![0.0; n as usize + 1];
        a[0] = self.coeff(0).to_c64().re;
        for k in 1..=n {
            let cp = self.coeff(k).to_c64();
            let cm = self.coeff(-k).to_c64();
            a[k as usize] = (cp + cm).re;
            b[k as usize] = (-(cp - cm) * Complex64::i()).re;
        }
        (a, b)
    }

    /// Multiplies by `e^{ikφ}`.
    pub fn shift(&self, k: i64) -> Self {
        self * &Self::exp_ik(k)
    }
}

impl<C: Scalar> Add for &FourierPoly<C> {
    type Output = FourierPoly<C>;
    fn add(self, rhs: &FourierPoly<C>) -> FourierPoly<C> {
        let n = self.half_width.max(rhs.half_width) as i64;
        FourierPoly::from_pairs((-n..=n).map(|k| (k, self.coeff(k) + rhs.coeff(k))))
    }
}

impl<C: Scalar> Sub for &FourierPoly<C> {
    type Output = FourierPoly<C>;
    fn sub(self, rhs: &FourierPoly<C>) -> FourierPoly<C> {
        let n = self.half_width.max(rhs.half_width) as i64;
        FourierPoly::from_pairs((-n..=n).map(|k| (k, self.coeff(k) - rhs.coeff(k))))
    }
}

impl<C: Scalar> Mul for &FourierPoly<C> {
    type Output = FourierPoly<C>;
    fn mul(self, rhs: &FourierPoly<C>) -> FourierPoly<C> {
        let (n, m) = (self.half_width, rhs.half_width);
        let mut coeffs = vec![C::zero(); 2 * (n + m) + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        FourierPoly { half_width: n + m, coeffs }.trimmed()
    }
}

impl<C: Scalar> Neg for &FourierPoly<C> {
    type Output = FourierPoly<C>;
    fn neg(self) -> FourierPoly<C> {
        self.scale(&(-C::one()))
    }
}

/// Exact Fourier form of `P(cos φ, sin φ)`.
pub fn trig_substitute<C: Scalar>(p: &BiPoly<C>) -> FourierPoly<C::Complexified> {
    type F<D> = FourierPoly<D>;
    let half = C::Complexified::from_rational(&super::rat(1, 2));
    let i = C::imag_unit();
    // cos φ = (z + 1/z)/2, sin φ = (z − 1/z)/(2i)
    let cos: F<C::Complexified> = F::from_pairs([(1, half.clone()), (-1, half.clone())]);
    let minus_half_i = -(half.clone() * i);
    let sin: F<C::Complexified> = F::from_pairs([(1, minus_half_i.clone()), (-1, -minus_half_i)]);
    let (dx, dy) = (p.degree_x().unwrap_or(0), p.degree_y().unwrap_or(0));
    let cos_pows = powers(&cos, dx);
    let sin_pows = powers(&sin, dy);
    let mut acc = F::zero();
    for ((a, b), c) in p.terms() {
        let term = (&cos_pows[a as usize] * &sin_pows[b as usize]).scale(&c.complexify());
        acc = &acc + &term;
    }
    acc
}

fn powers<C: Scalar>(base: &FourierPoly<C>, n: u32) -> Vec<FourierPoly<C>> {
    let mut out = vec![FourierPoly::constant(C::one())];
    for k in 1..=n as usize {
        let next = &out[k - 1] * base;
        out.push(next);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleRootError {
    #[error("identically zero trigonometric polynomial has no isolated zeros")]
    IdenticallyZero,
}

/// A zero of a real trigonometric polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleRoot {
    /// Angle in `[0, 2π)`.
    pub angle: f64,
    pub multiplicity: usize,
    /// True when the multiplicity came from root clustering rather than exact factorization.
    pub heuristic: bool,
}

/// Real zeros of `f` on the circle.
///
/// Exact coefficients go through a square-free factorization of the z-polynomial,
/// so multiplicities are exact. Floating coefficients use root clustering.
pub fn circle_roots<C: Scalar>(f: &FourierPoly<C>, tol: f64) -> Result<Vec<CircleRoot>, CircleRootError> {
    if f.is_zero() {
        return Err(CircleRootError::IdenticallyZero);
    }
    let (zpoly, _) = f.to_z_poly();
    let mut found: Vec<CircleRoot> = Vec::new();
    if C::EXACT {
        for (factor, mult) in zpoly.squarefree() {
            for z in polynomial_roots(&factor.to_c64()) {
                if (z.norm() - 1.0).abs() <= tol {
                    found.push(CircleRoot { angle: normalize_angle(z.arg()), multiplicity: mult, heuristic: false });
                }
            }
        }
    } else {
        let roots: Vec<Complex64> = polynomial_roots(&zpoly.to_c64())
            .into_iter()
            .filter(|z| (z.norm() - 1.0).abs() <= tol.max(1e-6))
            .collect();
        let cluster = 1e-4;
        let mut used = vec![false; roots.len()];
        for k in 0..roots.len() {
            if used[k] {
                continue;
            }
            let members: Vec<usize> = (k..roots.len()).filter(|&j| !used[j] && (roots[j] - roots[k]).norm() < cluster).collect();
            let mean: Complex64 = members.iter().map(|&j| roots[j]).sum::<Complex64>() / members.len() as f64;
            for &j in &members {
                used[j] = true;
            }
            found.push(CircleRoot { angle: normalize_angle(mean.arg()), multiplicity: members.len(), heuristic: true });
        }
    }
    let real = |phi: f64| f.eval(phi);
    for root in found.iter_mut().filter(|r| r.multiplicity % 2 == 1) {
        let h = 1e-7;
        let (a, b) = (root.angle - h, root.angle + h);
        if (real(a) > 0.0) != (real(b) > 0.0) {
            root.angle = normalize_angle(bisect(real, a, b));
        }
    }
    found.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    Ok(found)
}

/// Maps an angle to `[0, 2π)`.
pub fn normalize_angle(phi: f64) -> f64 {
    let t = phi.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, ComplexRational, Rational};

    fn q(n: i64) -> Rational {
        rat(n, 1)
    }

    #[test]
    fn weighted_radius_form() {
        // x² + 3y² = 2 − cos 2φ
        let f = trig_substitute(&BiPoly::from_terms([((2, 0), q(1)), ((0, 2), q(3))]));
        assert_eq!(f.coeff(0), ComplexRational::new(q(2), q(0)));
        assert_eq!(f.coeff(2), ComplexRational::new(rat(-1, 2), q(0)));
        assert_eq!(f.coeff(-2), ComplexRational::new(rat(-1, 2), q(0)));
        assert!(f.is_real());
        assert!(circle_roots(&f, 1e-8).unwrap().is_empty());
    }

    #[test]
    fn x_is_cosine() {
        let f = trig_substitute(&BiPoly::<Rational>::x());
        assert_eq!(f.coeff(1), ComplexRational::new(rat(1, 2), q(0)));
        assert_eq!(f.coeff(-1), ComplexRational::new(rat(1, 2), q(0)));
        assert_eq!(f.half_width(), 1);
    }

    #[test]
    fn andreev_leading_g() {
        let f = trig_substitute(&BiPoly::from_terms([((4, 0), q(-1)), ((0, 2), q(-2))]));
        for k in 0..50 {
            let phi = 0.13 * k as f64;
            let want = -phi.cos().powi(4) - 2.0 * phi.sin().powi(2);
            assert!((f.eval(phi) - want).abs() < 1e-14);
        }
        assert!(circle_roots(&f, 1e-8).unwrap().is_empty());
    }

    #[test]
    fn double_roots_of_sin_squared_factor() {
        // sin²φ (sin²φ + 4cos²φ) = y⁴ + 4x²y²
        let f = trig_substitute(&BiPoly::from_terms([((0, 4), q(1)), ((2, 2), q(4))]));
        let roots = circle_roots(&f, 1e-8).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots[0].angle.abs() < 1e-9);
        assert!((roots[1].angle - PI).abs() < 1e-9);
        assert!(roots.iter().all(|r| r.multiplicity == 2 && !r.heuristic));
    }

    #[test]
    fn simple_roots_are_refined() {
        // cos φ − sin φ vanishes at π/4 and 5π/4
        let f = trig_substitute(&BiPoly::from_terms([((1, 0), q(1)), ((0, 1), q(-1))]));
        let roots = circle_roots(&f, 1e-8).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].angle - PI / 4.0).abs() < 1e-13);
        assert!((roots[1].angle - 5.0 * PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn float_path_flags_heuristic() {
        let f = trig_substitute(&BiPoly::from_terms([((0, 4), 1.0), ((2, 2), 4.0)]));
        let roots = circle_roots(&f, 1e-6).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(|r| r.multiplicity == 2 && r.heuristic));
    }

    #[test]
    fn zero_input_is_an_error() {
        let f: FourierPoly<ComplexRational> = FourierPoly::zero();
        assert_eq!(circle_roots(&f, 1e-8), Err(CircleRootError::IdenticallyZero));
    }
}
