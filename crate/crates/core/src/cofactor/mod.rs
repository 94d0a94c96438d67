//! Integral of the transformed cofactor `K̂ = D·K/(ρ^r Θ)` along one turn, its
//! expansion in `ρ₀`, and the sign tests built on it.

mod pv;
mod sign;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::quad::{gauss_kronrod, QuadError};
use crate::algebra::BiPoly;
use crate::blowup::PolarSystem;
use crate::branches::{Cofactor, CurveCandidate};
use crate::flow::{integrate_turn, BautinCoefficients, Cylinder, FlowError, FlowOptions, Monomials, Trajectory};

pub use pv::{pv_xi, richardson_odd, XiValue, PV_STEPS};
pub use sign::{sign_definite_test, LeadingFormRecord, Sign, SignVerdict, SignVerdictKind, SIGN_GRID};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CofactorError {
    #[error("Θ vanishes at (φ, ρ) = ({phi}, {rho})")]
    SingularPoint { phi: f64, rho: f64 },
    #[error("cofactor is identically zero")]
    ZeroCofactor,
    #[error("system is not in the Mo class")]
    NotMo,
    #[error("curve restricted to the section vanishes at ρ = {rho}")]
    VanishingCurve { rho: f64 },
    #[error("least-squares fit is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("principal value does not converge: {0:?}")]
    PvDivergent(Vec<(f64, f64)>),
    #[error("trajectory crosses Θ = 0 tangentially near φ = {0}; extrapolation unreliable")]
    TangentialCrossing(f64),
    #[error("orientation is mixed; the φ-domain integral needs a monotone angle")]
    MixedOrientation,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// `K̂(φ, ρ) = D(φ) K(ρ^p cos φ, ρ^q sin φ) / (ρ^r Θ(φ, ρ))` with the unsigned Θ.
pub fn khat(ps: &PolarSystem, k: &BiPoly<f64>, phi: f64, rho: f64) -> Result<f64, CofactorError> {
    let cyl = Cylinder::with_sign(ps, 1.0);
    khat_on(&cyl, &Monomials::from_poly(k), phi, rho)
}

fn khat_on(cyl: &Cylinder, k: &Monomials, phi: f64, rho: f64) -> Result<f64, CofactorError> {
    let theta = cyl.sigma * cyl.rhs(phi, rho).1;
    if theta == 0.0 {
        return Err(CofactorError::SingularPoint { phi, rho });
    }
    let (x, y) = cyl.xy(phi, rho);
    Ok(cyl.d(phi) * k.eval(x, y) / (rho.powi(cyl.r as i32) * theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegralMethod {
    /// `∫ σ D K/ρ^r dτ` accumulated with the flow.
    TimeDomain,
    /// `PV ∫₀^{2π} K̂(φ, ρ(φ)) dφ` with symmetric excision and Richardson extrapolation.
    PvPhiDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CofactorIntegralSample {
    pub rho0: f64,
    pub value: f64,
    pub method: IntegralMethod,
    /// Radius after the turn.
    pub rho1: f64,
    pub steps: usize,
    /// Extrapolation error of the PV path.
    pub error: Option<f64>,
    /// `log|F̂(0, Π(ρ₀))/F̂(0, ρ₀)|` when a curve was supplied.
    pub oracle: Option<f64>,
    pub discrepancy: Option<f64>,
    pub flagged: bool,
}

impl CofactorIntegralSample {
    /// Attaches the log-identity value and flags the sample if it disagrees by more than `tol`.
    pub fn with_oracle(mut self, curve: &CurveCandidate, p: u32, tol: f64) -> Result<Self, CofactorError> {
        let oracle = log_ratio(curve, p, self.rho0, self.rho1)?;
        let d = (self.value - oracle).abs();
        self.oracle = Some(oracle);
        self.discrepancy = Some(d);
        self.flagged = !(d <= tol);
        Ok(self)
    }
}

fn log_ratio(curve: &CurveCandidate, p: u32, rho0: f64, rho1: f64) -> Result<f64, CofactorError> {
    let f0 = curve.eval(rho0.powi(p as i32), 0.0);
    let f1 = curve.eval(rho1.powi(p as i32), 0.0);
    if f0 == 0.0 {
        return Err(CofactorError::VanishingCurve { rho: rho0 });
    }
    if f1 == 0.0 {
        return Err(CofactorError::VanishingCurve { rho: rho1 });
    }
    Ok((f1 / f0).abs().ln())
}

/// Integral of `K̂` over the turn of the orbit through `(0, ρ₀)`, in the direction of increasing φ.
pub fn integral_k(
    cyl: &Cylinder,
    k: &BiPoly<f64>,
    rho0: f64,
    method: IntegralMethod,
    omega: &[f64],
    opts: &FlowOptions,
) -> Result<CofactorIntegralSample, CofactorError> {
    let km = Monomials::from_poly(k);
    let mut o = *opts;
    o.section = 0.0;
    o.turns = 1;
    match method {
        IntegralMethod::TimeDomain => {
            let t = integrate_turn(cyl, rho0, std::slice::from_ref(&km), &o);
            t.to_result()?;
            Ok(sample(rho0, t.functionals[0], method, &t, None))
        }
        IntegralMethod::PvPhiDomain => {
            o.record = true;
            let t = integrate_turn(cyl, rho0, &[], &o);
            t.to_result()?;
            if t.winding < 0.0 {
                return Err(CofactorError::MixedOrientation);
            }
            let (value, error) = pv::trajectory_pv(cyl, &km, &t, omega)?;
            Ok(sample(rho0, value, method, &t, Some(error)))
        }
    }
}

fn sample(rho0: f64, value: f64, method: IntegralMethod, t: &Trajectory, error: Option<f64>) -> CofactorIntegralSample {
    CofactorIntegralSample { rho0, value, method, rho1: t.rho, steps: t.steps, error, oracle: None, discrepancy: None, flagged: false }
}

/// Discrepancy between the time-domain integral and the log identity
/// `∫K̂ = log|F̂(0, Π(ρ₀))/F̂(0, ρ₀)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogIdentity {
    pub rho0: f64,
    pub integral: f64,
    pub rho1: f64,
    pub log_ratio: f64,
    pub discrepancy: f64,
}

pub fn log_identity_check(
    cyl: &Cylinder,
    curve: &CurveCandidate,
    cofactor: &Cofactor,
    rho0: f64,
    opts: &FlowOptions,
) -> Result<LogIdentity, CofactorError> {
    let s = integral_k(cyl, &cofactor.k, rho0, IntegralMethod::TimeDomain, &[], opts)?;
    let lr = log_ratio(curve, cyl.weight.p, rho0, s.rho1)?;
    Ok(LogIdentity { rho0, integral: s.value, rho1: s.rho1, log_ratio: lr, discrepancy: (s.value - lr).abs() })
}

/// Coefficients of `∫K̂ = Σ_{i ≥ m} β_i ρ₀^i`, `m = r̄ − r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaExpansion {
    /// Exponent of the first fitted coefficient.
    pub start: u64,
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual of the chosen fit.
    pub residual: f64,
    /// Change of the leading coefficient against the next lower fit order.
    pub leading_stability: f64,
    /// Coefficients of `ρ₀^0..ρ₀^{m−1}` from a fit that includes them (expected ≈ 0).
    pub below_start: Vec<f64>,
    /// `(β_m, β_{m+1})` from the quadrature formulas.
    pub quadrature: Option<(f64, f64)>,
}

impl BetaExpansion {
    pub fn beta(&self, i: u64) -> Option<f64> {
        i.checked_sub(self.start).and_then(|k| self.coefficients.get(k as usize)).copied()
    }
}

/// Least squares of `Σ_{j<n} c_j t^{e0 + j}` with `t = ρ₀/scale`, returned in the unscaled basis.
fn monomial_fit(samples: &[(f64, f64)], e0: u64, n: usize) -> Result<(Vec<f64>, f64), CofactorError> {
    let scale = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let rows = samples.len();
    let a = nalgebra::DMatrix::from_fn(rows, n, |i, j| (samples[i].0 / scale).powi((e0 as usize + j) as i32));
    let b = nalgebra::DVector::from_iterator(rows, samples.iter().map(|s| s.1));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < 1e13) {
        return Err(CofactorError::IllConditioned(cond));
    }
    let c = svd.solve(&b, 0.0).expect("SVD solve with U and V");
    let res = (&a * &c - &b).norm() / (rows as f64).sqrt();
    Ok(((0..n).map(|j| c[j] / scale.powi((e0 as usize + j) as i32)).collect(), res))
}

/// Fits `Σ_{i=m}^{m+k} β_i ρ₀^i` to `(ρ₀, I(ρ₀))` samples. The number of terms is chosen as
/// the one whose leading coefficient moves least when a term is added.
pub fn beta_fit(samples: &[(f64, f64)], m: u64) -> Result<BetaExpansion, CofactorError> {
    if samples.len() < 6 {
        return Err(CofactorError::InsufficientSamples { needed: 6, got: samples.len() });
    }
    let max_terms = samples.len() - 2;
    let mut fits = Vec::new();
    for n in 1..=max_terms {
        match monomial_fit(samples, m, n) {
            Ok(f) => fits.push(f),
            Err(CofactorError::IllConditioned(_)) => break,
            Err(e) => return Err(e),
        }
    }
    if fits.is_empty() {
        return Err(CofactorError::IllConditioned(f64::INFINITY));
    }
    let mut best = fits.len() - 1;
    let mut stability = f64::INFINITY;
    for n in 1..fits.len() {
        let d = (fits[n].0[0] - fits[n - 1].0[0]).abs();
        if d < stability {
            stability = d;
            best = n;
        }
    }
    let (coefficients, residual) = fits.swap_remove(best);
    let below_start = if m > 0 {
        let n = (coefficients.len() + m as usize).min(samples.len() - 1);
        monomial_fit(samples, 0, n).map(|(c, _)| c[..m as usize].to_vec()).unwrap_or_default()
    } else {
        Vec::new()
    };
    Ok(BetaExpansion { start: m, coefficients, residual, leading_stability: stability, below_start, quadrature: None })
}

/// `(β_m, β_{m+1})`, `m = r̄ − r`, by quadrature of the first two terms of `K̂(φ, ρ(φ; ρ₀))`
/// in powers of `ρ₀`, with `ρ = a₁ρ₀ + a₂ρ₀² + …`.
pub fn beta_quadrature(ps: &PolarSystem, cofactor: &Cofactor, a: &BautinCoefficients) -> Result<(f64, f64), CofactorError> {
    if !ps.omega.is_empty() || ps.components[0].g.is_zero() {
        return Err(CofactorError::NotMo);
    }
    let r_bar = cofactor.r_bar.ok_or(CofactorError::ZeroCofactor)?;
    assert!(a.order >= 2, "beta_quadrature needs a₁ and a₂");
    let w = ps.weight;
    let m = r_bar as i64 - ps.r;
    let k0 = Monomials::from_poly(&cofactor.component(w, r_bar));
    let k1 = Monomials::from_poly(&cofactor.component(w, r_bar + 1));
    let cyl = Cylinder::with_sign(ps, 1.0);
    let integrand = |phi: f64| {
        let (c, s) = (phi.cos(), phi.sin());
        let (kb, kb1) = (k0.eval(c, s), k1.eval(c, s));
        let (g0, g1) = (cyl.fg(ps.r, phi).1, cyl.fg(ps.r + 1, phi).1);
        let (a1, a2) = (a.a(1, phi), a.a(2, phi));
        let d = cyl.d(phi);
        let lead = d * a1.powi(m as i32) * kb / g0;
        let mut next = d * a1.powi(m as i32 + 1) * (kb1 * g0 - kb * g1) / (g0 * g0);
        if m > 0 {
            next += d * m as f64 * a1.powi(m as i32 - 1) * a2 * kb / g0;
        }
        (lead, next)
    };
    let (mut b0, mut b1) = (0.0, 0.0);
    for (lo, hi) in a.pieces() {
        b0 += gauss_kronrod(|t| integrand(t).0, lo, hi)?.0;
        b1 += gauss_kronrod(|t| integrand(t).1, lo, hi)?.0;
    }
    Ok((b0, b1))
}

/// Angles of `Ω` in `[0, 2π)`, sorted and deduplicated.
pub(crate) fn lifted_angles(omega: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = omega.iter().map(|&a| crate::algebra::normalize_angle(a)).collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::algebra::rat;
    use crate::blowup::{polar_components, PolarOptions};
    use crate::diagram::{VectorField, Weight};

    fn linear(lam: (i64, i64)) -> PolarSystem {
        let l = rat(lam.0, lam.1);
        let x = VectorField::from_terms(&[(0, 1, rat(-1, 1)), (1, 0, l.clone())], &[(1, 0, rat(1, 1)), (0, 1, l)]).unwrap();
        polar_components(&x, Weight::new(1, 1).unwrap(), PolarOptions::default()).unwrap()
    }

    #[test]
    fn khat_of_linear_family_is_constant() {
        let ps = linear((1, 10));
        let k = BiPoly::constant(0.2);
        for (phi, rho) in [(0.0, 0.1), (1.3, 0.01), (4.0, 0.3)] {
            assert!((khat(&ps, &k, phi, rho).unwrap() - 0.2).abs() < 1e-15);
        }
        assert_eq!(khat(&ps, &BiPoly::zero(), 0.5, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn linear_integral_both_methods() {
        let ps = linear((1, 10));
        let cyl = Cylinder::new(&ps);
        let k = BiPoly::constant(0.2);
        let opts = FlowOptions::default();
        let t = integral_k(&cyl, &k, 0.1, IntegralMethod::TimeDomain, &[], &opts).unwrap();
        assert!((t.value - 0.4 * PI).abs() < 1e-10, "{}", t.value);
        let p = integral_k(&cyl, &k, 0.1, IntegralMethod::PvPhiDomain, &[], &opts).unwrap();
        assert!((p.value - 0.4 * PI).abs() < 1e-9, "{}", p.value);
    }

    #[test]
    fn fit_recovers_polynomial() {
        let grid: Vec<f64> = (0..8).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        let samples: Vec<(f64, f64)> = grid.iter().map(|&r| (r, 0.7 * r - 2.0 * r * r + 5.0 * r.powi(3))).collect();
        let b = beta_fit(&samples, 1).unwrap();
        assert!((b.beta(1).unwrap() - 0.7).abs() < 1e-9);
        assert!((b.beta(2).unwrap() + 2.0).abs() < 1e-7);
        assert!(b.below_start[0].abs() < 1e-9);
    }
}
