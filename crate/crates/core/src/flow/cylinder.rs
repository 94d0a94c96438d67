//! Fast floating-point evaluation of the blown-up field on the cylinder.

use crate::algebra::{BiPoly, Rational, Scalar};
use crate::blowup::PolarSystem;
use crate::diagram::Weight;

/// Polynomial as a flat list of `(i, j, c)` for repeated evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Monomials(Vec<(i32, i32, f64)>);

impl Monomials {
    pub fn from_poly<C: Scalar>(p: &BiPoly<C>) -> Self {
        Monomials(p.terms().map(|((i, j), c)| (i as i32, j as i32, c.to_c64().re)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.0.iter().map(|&(i, j, c)| c * x.powi(i) * y.powi(j)).sum()
    }
}

#[derive(Debug, Clone)]
struct Graded {
    degree: i64,
    p: Monomials,
    q: Monomials,
}

/// `ρ' = Σ ρ^{j−r+1} F_j(φ)`, `φ' = Σ ρ^{j−r} G_j(φ)`, multiplied by a time sign.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub weight: Weight,
    pub r: i64,
    /// `±1`; `−1` reverses time so that φ increases near ρ = 0.
    pub sigma: f64,
    comps: Vec<Graded>,
}

impl Cylinder {
    pub fn new(ps: &PolarSystem) -> Self {
        Self::with_sign(ps, ps.time_sign())
    }

    pub fn with_sign(ps: &PolarSystem, sigma: f64) -> Self {
        let comps = ps
            .decomposition
            .components
            .iter()
            .map(|(&degree, c)| Graded { degree, p: Monomials::from_poly::<Rational>(&c.p), q: Monomials::from_poly::<Rational>(&c.q) })
            .collect();
        Cylinder { weight: ps.weight, r: ps.r, sigma, comps }
    }

    pub fn reversed(&self) -> Self {
        Cylinder { sigma: -self.sigma, ..self.clone() }
    }

    pub fn xy(&self, phi: f64, rho: f64) -> (f64, f64) {
        (rho.powi(self.weight.p as i32) * phi.cos(), rho.powi(self.weight.q as i32) * phi.sin())
    }

    pub fn d(&self, phi: f64) -> f64 {
        let (c, s) = (phi.cos(), phi.sin());
        self.weight.p as f64 * c * c + self.weight.q as f64 * s * s
    }

    /// Unsigned `(F_j(φ), G_j(φ))`; zero when the field has no component of degree `j`.
    pub fn fg(&self, j: i64, phi: f64) -> (f64, f64) {
        match self.comps.iter().find(|g| g.degree == j) {
            Some(g) => self.fg_of(g, phi.cos(), phi.sin()),
            None => (0.0, 0.0),
        }
    }

    fn fg_of(&self, g: &Graded, c: f64, s: f64) -> (f64, f64) {
        let pv = g.p.eval(c, s);
        let qv = g.q.eval(c, s);
        (pv * c + qv * s, self.weight.p as f64 * qv * c - self.weight.q as f64 * pv * s)
    }

    /// Signed `(R, Θ)` at `(φ, ρ)`.
    pub fn rhs(&self, phi: f64, rho: f64) -> (f64, f64) {
        let (c, s) = (phi.cos(), phi.sin());
        let (mut rr, mut th) = (0.0, 0.0);
        for g in &self.comps {
            let (f, gg) = self.fg_of(g, c, s);
            let k = (g.degree - self.r) as i32;
            let pk = rho.powi(k);
            rr += pk * rho * f;
            th += pk * gg;
        }
        (self.sigma * rr, self.sigma * th)
    }

    /// Highest weighted degree present in the field.
    pub fn max_degree(&self) -> i64 {
        self.comps.iter().map(|g| g.degree).max().unwrap_or(self.r)
    }
}
