//! Invariant branches, determining polynomials, curve assembly and cofactors.

use std::collections::BTreeMap;

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{
    circle_roots, polynomial_roots, rational_from_f64, recognize_rational, trig_substitute, BiPoly, ComplexRational,
    Rational, Scalar, UniPoly,
};
use crate::diagram::{lower_left_hull, Component, VectorField, Weight};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BranchError {
    #[error("determining polynomial vanishes identically for weight {0}")]
    DegenerateDeterminingPolynomial(Weight),
    #[error("curve is identically zero")]
    ZeroCurve,
    #[error("weight {0} is not an edge weight of the curve's Newton polygon")]
    EdgeNotInCurve(Weight),
    #[error("linear step of the branch recursion is degenerate at order {order}")]
    DegenerateStep { order: usize },
    #[error("branch residual {residual:e} does not vanish through the truncation order")]
    ResidualTooLarge { residual: f64 },
    #[error("branch list is not closed under complex conjugation (missing conjugate of {0})")]
    NotConjugateClosed(Complex64),
    #[error("fractional powers of x survive in the product (coefficient {0:e})")]
    FractionalPowers(f64),
    #[error("branches with different weights cannot be multiplied")]
    MixedWeights,
    #[error("product has a non-real coefficient (imaginary part {0:e})")]
    NotReal(f64),
    #[error("F is not invariant: X(F) − K·F leaves remainder {0:e}")]
    NotInvariant(f64),
    #[error("leading form F_s vanishes along real directions (real linear factor)")]
    RealLinearFactor,
    #[error("empty branch list")]
    NoBranches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FromField,
    FromCurve,
}

/// Polynomial in η whose roots are the admissible leading coefficients α₀.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminingPolynomial {
    pub poly: UniPoly<Rational>,
    pub provenance: Provenance,
    pub weight: Weight,
    /// Leading degree r (field) or quasihomogeneous order s (curve).
    pub order: i64,
}

impl DeterminingPolynomial {
    /// Complex roots with exact multiplicities from a square-free decomposition.
    pub fn roots(&self) -> Vec<(Complex64, usize)> {
        let mut out = Vec::new();
        for (factor, mult) in self.poly.squarefree() {
            for z in polynomial_roots(&factor.to_c64()) {
                out.push((z, mult));
            }
        }
        out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        out
    }

    /// True when `self` and `other` differ by a nonzero constant factor.
    pub fn proportional_to(&self, other: &UniPoly<Rational>) -> bool {
        self.poly.monic() == other.monic()
    }
}

/// `𝒬(η) = (q/p)·η·P_{p+r}(1,η) − Q_{q+r}(1,η)`.
pub fn q_polynomial(lead: &Component, w: Weight, r: i64) -> Result<DeterminingPolynomial, BranchError> {
    let ratio = Rational::new(w.q.into(), w.p.into());
    let eta = UniPoly::new(vec![Rational::zero(), Rational::one()]);
    let poly = &(&eta * &lead.p.at_x_one()).scale(&ratio) - &lead.q.at_x_one();
    if poly.is_zero() {
        return Err(BranchError::DegenerateDeterminingPolynomial(w));
    }
    Ok(DeterminingPolynomial { poly, provenance: Provenance::FromField, weight: w, order: r })
}

/// `𝒫(η)` from `F_s(1, η) = η^{m₁}·𝒫(η)` on the edge of `𝐍(F)` with weight `w`.
pub fn p_polynomial_from_curve(f: &BiPoly<Rational>, w: Weight) -> Result<DeterminingPolynomial, BranchError> {
    if f.is_zero() {
        return Err(BranchError::ZeroCurve);
    }
    let support = f.terms().map(|(k, _)| k).collect();
    let (_, edges) = lower_left_hull(&support);
    let edge = edges.iter().find(|e| e.weight == w).ok_or(BranchError::EdgeNotInCurve(w))?;
    let s = edge.line_value as u64;
    let fs = f.component(w.p, w.q, s);
    let m1 = fs.terms().map(|((_, j), _)| j).min().unwrap_or(0) as usize;
    let full = fs.at_x_one();
    let poly = UniPoly::new(full.coeffs()[m1..].to_vec());
    Ok(DeterminingPolynomial { poly, provenance: Provenance::FromCurve, weight: w, order: s as i64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FuchsVerdict {
    /// The branch index equals p.
    IndexEqualsP,
    /// j* is a positive non-integer rational; the index is not settled by this test.
    GeneralTheoryNeeded,
    /// V(j) is constant.
    Degenerate,
}

/// Fuchs index data `V(j) = A·j + B` at a root α₀ of 𝒬.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuchsIndex {
    pub slope: Complex64,
    pub intercept: Complex64,
    pub index: Option<Complex64>,
    /// Rational value of j* when the continued-fraction test recognizes one.
    pub rational: Option<String>,
    pub verdict: FuchsVerdict,
    /// Description of the rationality heuristic used.
    pub heuristic: String,
}

pub const FUCHS_MAX_DENOMINATOR: u64 = 64;
pub const FUCHS_TOLERANCE: f64 = 1e-10;

/// `V(j) = P(1,α₀)·j + (q/p)(α₀·∂_ηP(1,α₀) + P(1,α₀)) − ∂_ηQ(1,α₀)`.
pub fn fuchs_index(lead: &Component, w: Weight, alpha0: Complex64) -> FuchsIndex {
    let pl = lead.p.at_x_one();
    let ql = lead.q.at_x_one();
    let pv = pl.eval_c64(alpha0);
    let pd = pl.derivative().eval_c64(alpha0);
    let qd = ql.derivative().eval_c64(alpha0);
    let ratio = w.q as f64 / w.p as f64;
    let slope = pv;
    let intercept = ratio * (alpha0 * pd + pv) - qd;
    let heuristic = format!(
        "continued fraction, denominator <= {FUCHS_MAX_DENOMINATOR}, tolerance {FUCHS_TOLERANCE:e}"
    );
    let scale = intercept.norm().max(1.0);
    if slope.norm() <= 1e-12 * scale {
        return FuchsIndex { slope, intercept, index: None, rational: None, verdict: FuchsVerdict::Degenerate, heuristic };
    }
    let j = -intercept / slope;
    let rational = if j.im.abs() <= FUCHS_TOLERANCE * j.norm().max(1.0) {
        recognize_rational(j.re, FUCHS_MAX_DENOMINATOR, FUCHS_TOLERANCE)
    } else {
        None
    };
    let verdict = match &rational {
        Some(r) if *r > Rational::zero() && !r.is_integer() => FuchsVerdict::GeneralTheoryNeeded,
        _ => FuchsVerdict::IndexEqualsP,
    };
    FuchsIndex { slope, intercept, index: Some(j), rational: rational.map(|r| r.to_string()), verdict, heuristic }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    Simple,
    FuchsClear,
    Undetermined,
}

/// Truncated Puiseux branch `y = Σ_{m≤M} α_m x^{(q+m)/p}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub weight: Weight,
    pub index: u32,
    pub coeffs: Vec<Complex64>,
    /// Exact coefficients when α₀ ∈ ℚ(i).
    #[serde(skip)]
    pub exact: Option<Vec<ComplexRational>>,
    pub admissibility: Admissibility,
    pub fuchs: FuchsIndex,
    /// Maximal |coefficient| of the branch equation residual through the truncation order.
    pub residual: f64,
    pub partner: Option<usize>,
}

impl Branch {
    pub fn alpha0(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Residual series `P(t^p, y)·y'(t) − p·t^{p−1}·Q(t^p, y)` through `t^n`.
fn branch_residual<C: Scalar>(p: &BiPoly<C>, q: &BiPoly<C>, w: Weight, y: &[C], n: usize) -> Vec<C> {
    let len = n + 1;
    let trunc = |v: &[C]| -> Vec<C> { v.iter().take(len).cloned().collect() };
    let mul = |a: &[C], b: &[C]| -> Vec<C> {
        let mut out = vec![C::zero(); len];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, z) in b.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                out[i + j] = out[i + j].clone() + x.clone() * z.clone();
            }
        }
        out
    };
    let ys = trunc(y);
    let dy: Vec<C> = (0..len).map(|k| y.get(k + 1).cloned().unwrap_or_else(C::zero) * C::from_i64(k as i64 + 1)).collect();
    let deg_y = p.degree_y().unwrap_or(0).max(q.degree_y().unwrap_or(0)) as usize;
    let mut ypow: Vec<Vec<C>> = vec![{
        let mut one = vec![C::zero(); len];
        one[0] = C::one();
        one
    }];
    for k in 1..=deg_y {
        let next = mul(&ypow[k - 1], &ys);
        ypow.push(next);
    }
    let subst = |poly: &BiPoly<C>, shift: usize| -> Vec<C> {
        let mut out = vec![C::zero(); len];
        for ((a, b), c) in poly.terms() {
            let off = w.p as usize * a as usize + shift;
            for (k, v) in ypow[b as usize].iter().enumerate() {
                if k + off >= len {
                    break;
                }
                out[k + off] = out[k + off].clone() + c.clone() * v.clone();
            }
        }
        out
    };
    let pt = subst(p, 0);
    let qt = subst(q, w.p as usize - 1);
    let lhs = mul(&pt, &dy);
    let pw = C::from_i64(w.p as i64);
    lhs.into_iter().zip(qt).map(|(a, b)| a - pw.clone() * b).collect()
}

fn solve_branch<C: Scalar>(
    x: &VectorField,
    lead: &Component,
    w: Weight,
    r: i64,
    alpha0: C,
    order: usize,
) -> Result<(Vec<C>, f64), BranchError> {
    let p: BiPoly<C> = x.p.map_coeffs(C::from_rational);
    let q: BiPoly<C> = x.q.map_coeffs(C::from_rational);
    let lp: UniPoly<C> = UniPoly::new(lead.p.at_x_one().coeffs().iter().map(C::from_rational).collect());
    let lq: UniPoly<C> = UniPoly::new(lead.q.at_x_one().coeffs().iter().map(C::from_rational).collect());
    let pv = lp.eval(&alpha0);
    let pd = lp.derivative().eval(&alpha0);
    let qd = lq.derivative().eval(&alpha0);
    let (pw, qw) = (C::from_i64(w.p as i64), C::from_i64(w.q as i64));
    // Linear coefficient of α_m in the residual at order e₀ + m.
    let base = qw.clone() * (alpha0.clone() * pd.clone() + pv.clone()) - pw * qd.clone();
    let scale = [pv.magnitude(), (alpha0.clone() * pd).magnitude(), qd.magnitude(), 1e-300]
        .into_iter()
        .fold(0.0, f64::max);
    let e0 = (w.p as i64 + w.q as i64 + r - 1) as usize;
    let qs = w.q as usize;
    let mut y = vec![C::zero(); qs + order + 1];
    y[qs] = alpha0;
    for m in 1..=order {
        let lin = base.clone() + C::from_i64(m as i64) * pv.clone();
        let degenerate = if C::EXACT { lin.is_zero() } else { lin.magnitude() <= 1e-10 * scale };
        if degenerate {
            return Err(BranchError::DegenerateStep { order: m });
        }
        let res = branch_residual(&p, &q, w, &y, e0 + m);
        y[qs + m] = -res[e0 + m].clone() / lin;
    }
    let res = branch_residual(&p, &q, w, &y, e0 + order);
    let residual = res.iter().map(|c| c.magnitude()).fold(0.0, f64::max);
    Ok((y[qs..].to_vec(), residual))
}

/// Gaussian-rational form of `z` when both parts are recognizably rational and
/// `exact_root` confirms it.
fn gaussian_rational(z: Complex64) -> Option<ComplexRational> {
    let re = recognize_rational(z.re, 10_000, 1e-12)?;
    let im = recognize_rational(z.im, 10_000, 1e-12)?;
    Some(Complex::new(re, im))
}

/// Newton–Puiseux coefficients `α₁..α_M` for the leading coefficient `α₀`.
///
/// Runs in exact Gaussian-rational arithmetic when α₀ ∈ ℚ(i) is an exact root of 𝒬.
pub fn extend_branch(x: &VectorField, lead: &Component, w: Weight, r: i64, alpha0: Complex64, order: usize) -> Result<Branch, BranchError> {
    let fuchs = fuchs_index(lead, w, alpha0);
    let qpoly = q_polynomial(lead, w, r)?;
    let exact_alpha = gaussian_rational(alpha0).filter(|a| {
        let qc: UniPoly<ComplexRational> = UniPoly::new(qpoly.poly.coeffs().iter().map(ComplexRational::from_rational).collect());
        qc.eval(a).is_zero()
    });
    let (coeffs, exact, residual) = match exact_alpha {
        Some(a) => {
            let (c, res) = solve_branch(x, lead, w, r, a, order)?;
            (c.iter().map(|v| v.to_c64()).collect(), Some(c), res)
        }
        None => {
            let (c, res) = solve_branch(x, lead, w, r, alpha0, order)?;
            (c, None, res)
        }
    };
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    if residual > 1e-8 * scale.powi(4) {
        return Err(BranchError::ResidualTooLarge { residual });
    }
    let simple = qpoly.roots().iter().any(|(z, m)| *m == 1 && (z - alpha0).norm() < 1e-8 * alpha0.norm().max(1.0));
    let admissibility = match (fuchs.verdict, simple) {
        (FuchsVerdict::IndexEqualsP, true) => Admissibility::Simple,
        (FuchsVerdict::IndexEqualsP, false) => Admissibility::FuchsClear,
        _ => Admissibility::Undetermined,
    };
    Ok(Branch { weight: w, index: w.p, coeffs, exact, admissibility, fuchs, residual, partner: None })
}

/// A real invariant curve `F = 0` (exact polynomial or truncated series) with its leading form.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveCandidate {
    pub weight: Weight,
    /// Quasihomogeneous order of the leading form.
    pub s: u64,
    /// F through weighted degree `valid_through` (all of F when exact).
    pub f: BiPoly<f64>,
    pub f_exact: Option<BiPoly<Rational>>,
    pub leading: BiPoly<f64>,
    pub valid_through: Option<u64>,
    /// Polynomial termination detected (coefficients vanish on ≥ 10 consecutive orders).
    pub polynomial: bool,
    pub leading_alphas: Vec<Complex64>,
}

impl CurveCandidate {
    pub fn from_exact(f: BiPoly<Rational>, w: Weight) -> Result<Self, BranchError> {
        let s = f.weighted_order(w.p, w.q).ok_or(BranchError::ZeroCurve)?;
        let ff = f.to_f64();
        Ok(CurveCandidate {
            weight: w,
            s,
            leading: ff.component(w.p, w.q, s),
            f: ff,
            f_exact: Some(f),
            valid_through: None,
            polynomial: true,
            leading_alphas: Vec::new(),
        })
    }

    /// `F(x, 0)` evaluated at `x`, the restriction used by the log-identity oracle.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.f.eval_f64(x, y)
    }

    /// Rejects leading forms with real zeros on the circle.
    pub fn check_leading_form(&self) -> Result<(), BranchError> {
        let fourier = trig_substitute(&self.leading);
        let scale = fourier.max_magnitude();
        let cleaned = crate::algebra::FourierPoly::from_pairs(
            (-(fourier.half_width() as i64)..=fourier.half_width() as i64)
                .map(|k| (k, fourier.coeff(k)))
                .map(|(k, c)| (k, if c.norm() <= 1e-12 * scale { Complex64::new(0.0, 0.0) } else { c })),
        );
        match circle_roots(&cleaned, 1e-6) {
            Ok(r) if r.is_empty() => Ok(()),
            _ => Err(BranchError::RealLinearFactor),
        }
    }
}

const FRACTION_TOL: f64 = 1e-8;

/// Expands `∏ (y − y_i(x))` over a conjugation-closed set of branches of one weight.
pub fn assemble_curve(branches: &[Branch]) -> Result<CurveCandidate, BranchError> {
    let first = branches.first().ok_or(BranchError::NoBranches)?;
    let w = first.weight;
    if branches.iter().any(|b| b.weight != w) {
        return Err(BranchError::MixedWeights);
    }
    let order = branches.iter().map(|b| b.order()).min().expect("nonempty");
    for b in branches {
        let target = b.alpha0().conj();
        let tol = 1e-8 * target.norm().max(1.0);
        if !branches.iter().any(|o| (o.alpha0() - target).norm() <= tol) {
            return Err(BranchError::NotConjugateClosed(b.alpha0()));
        }
    }
    let nb = branches.len();
    let (p, q) = (w.p as usize, w.q as usize);
    let s = (nb * q) as u64;
    let tmax = nb * q + order;
    // poly[j][e]: coefficient of y^j t^e.
    let mut poly: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0); 1]];
    poly[0].resize(tmax + 1, Complex64::new(0.0, 0.0));
    for b in branches {
        let mut series = vec![Complex64::new(0.0, 0.0); tmax + 1];
        for (m, c) in b.coeffs.iter().enumerate().take(order + 1) {
            series[q + m] = *c;
        }
        let mut next = vec![vec![Complex64::new(0.0, 0.0); tmax + 1]; poly.len() + 1];
        for (j, row) in poly.iter().enumerate() {
            for (e, c) in row.iter().enumerate() {
                if c.norm() == 0.0 {
                    continue;
                }
                next[j + 1][e] += c;
                for (k, sv) in series.iter().enumerate() {
                    if e + k > tmax {
                        break;
                    }
                    next[j][e + k] -= c * sv;
                }
            }
        }
        poly = next;
    }
    let scale = poly.iter().flatten().map(|c| c.norm()).fold(1.0, f64::max);
    let mut f = BiPoly::<f64>::zero();
    let mut max_frac: f64 = 0.0;
    let mut max_imag: f64 = 0.0;
    let valid = s + order as u64;
    for (j, row) in poly.iter().enumerate() {
        for (e, c) in row.iter().enumerate() {
            if (e + q * j) as u64 > valid {
                continue;
            }
            if e % p != 0 {
                max_frac = max_frac.max(c.norm());
                continue;
            }
            max_imag = max_imag.max(c.im.abs());
            if c.re.abs() > FRACTION_TOL * 1e-3 * scale {
                f.add_term((e / p) as u32, j as u32, c.re);
            }
        }
    }
    if max_frac > FRACTION_TOL * scale {
        return Err(BranchError::FractionalPowers(max_frac));
    }
    if max_imag > FRACTION_TOL * scale {
        return Err(BranchError::NotReal(max_imag));
    }
    let leading = f.component(w.p, w.q, s);
    let top = f.graded(w.p, w.q).into_iter().filter(|(_, c)| c.max_magnitude() > 1e-11 * scale).map(|(d, _)| d).max().unwrap_or(s);
    let polynomial = top + 10 <= valid;
    let f = if polynomial { f.truncate_weighted(w.p, w.q, top).prune(1e-11 * scale) } else { f };
    let f_exact = if polynomial { recognize_poly(&f) } else { None };
    Ok(CurveCandidate {
        weight: w,
        s,
        leading,
        f,
        f_exact,
        valid_through: Some(valid),
        polynomial,
        leading_alphas: branches.iter().map(|b| b.alpha0()).collect(),
    })
}

/// Rational recognition of every coefficient.
fn recognize_poly(f: &BiPoly<f64>) -> Option<BiPoly<Rational>> {
    let mut out = BiPoly::zero();
    for ((i, j), c) in f.terms() {
        let r = recognize_rational(*c, 1_000_000, 1e-10)?;
        out.add_term(i, j, r);
    }
    Some(out)
}

/// Cofactor `K` with `X(F) = K·F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cofactor {
    pub k: BiPoly<f64>,
    pub k_exact: Option<BiPoly<Rational>>,
    /// Weighted order r̄ of K (None for K ≡ 0).
    pub r_bar: Option<u64>,
    /// K is known through this weighted degree (None when exact).
    pub valid_through: Option<u64>,
    pub residual: f64,
}

impl Cofactor {
    pub fn leading(&self, w: Weight) -> BiPoly<f64> {
        match self.r_bar {
            Some(d) => self.k.component(w.p, w.q, d),
            None => BiPoly::zero(),
        }
    }

    pub fn component(&self, w: Weight, d: u64) -> BiPoly<f64> {
        self.k.component(w.p, w.q, d)
    }
}

/// `K = X(F)/F`: exact division for exact curves, graded division otherwise.
pub fn extract_cofactor(x: &VectorField, curve: &CurveCandidate, r: i64) -> Result<Cofactor, BranchError> {
    let w = curve.weight;
    if let Some(fe) = &curve.f_exact {
        let xf = x.apply(fe);
        if let Some(k) = xf.div_exact(fe) {
            let r_bar = k.weighted_order(w.p, w.q);
            return Ok(Cofactor { k: k.to_f64(), k_exact: Some(k), r_bar, valid_through: None, residual: 0.0 });
        }
        if curve.valid_through.is_none() {
            let (_, rem) = xf.div_rem(fe, |c| c.is_zero());
            return Err(BranchError::NotInvariant(rem.to_f64().max_magnitude()));
        }
    }
    let valid_f = curve.valid_through.expect("truncated curve");
    let m = valid_f - curve.s;
    let pf = x.p.to_f64();
    let qf = x.q.to_f64();
    let xf = curve.f.lie_derivative(&pf, &qf);
    let xf_g = xf.graded(w.p, w.q);
    let f_g = curve.f.graded(w.p, w.q);
    let fs = &curve.leading;
    let scale = curve.f.max_magnitude().max(xf.max_magnitude()).max(1e-300);
    let r = r.max(0) as u64;
    let mut k = BiPoly::<f64>::zero();
    let mut kg: BTreeMap<u64, BiPoly<f64>> = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for d in 0..=m {
        let target = curve.s + r + d;
        let mut rhs = xf_g.get(&target).cloned().unwrap_or_default();
        for (&dk, kc) in &kg {
            if let Some(fc) = f_g.get(&(target - dk)) {
                rhs = &rhs - &(kc * fc);
            }
        }
        let tol = 1e-9 * scale;
        let (quot, rem) = rhs.div_rem(fs, |c| c.abs() <= tol * 1e-3);
        worst = worst.max(rem.max_magnitude());
        if rem.max_magnitude() > tol * 10f64.powi(d as i32 / 4) {
            return Err(BranchError::NotInvariant(rem.max_magnitude()));
        }
        let quot = quot.prune(1e-13 * scale);
        if !quot.is_zero() {
            kg.insert(r + d, quot.clone());
            k = &k + &quot;
        }
    }
    let r_bar = k.weighted_order(w.p, w.q);
    let k_exact = if curve.polynomial {
        recognize_poly(&k).filter(|ke| curve.f_exact.as_ref().is_some_and(|fe| x.apply(fe) == ke * fe))
    } else {
        None
    };
    if let Some(ke) = k_exact {
        return Ok(Cofactor { k: ke.to_f64(), r_bar: ke.weighted_order(w.p, w.q), k_exact: Some(ke), valid_through: None, residual: 0.0 });
    }
    Ok(Cofactor { k, k_exact: None, r_bar, valid_through: Some(r + m), residual: worst })
}

/// Product `∏ F_i^{m_i}` with cofactor `Σ m_i K_i`.
pub fn combine_curves(parts: &[(&CurveCandidate, &Cofactor, u32)]) -> Result<(CurveCandidate, Cofactor), BranchError> {
    let (first, _, _) = parts.first().ok_or(BranchError::NoBranches)?;
    let w = first.weight;
    let mut f = BiPoly::<f64>::one();
    let mut fe = Some(BiPoly::<Rational>::one());
    let mut k = BiPoly::<f64>::zero();
    let mut ke = Some(BiPoly::<Rational>::zero());
    let mut s = 0;
    // Smallest `valid_through − s` over the truncated factors.
    let mut margin: Option<u64> = None;
    let mut kvalid: Option<u64> = None;
    for (c, cof, m) in parts {
        if c.weight != w {
            return Err(BranchError::MixedWeights);
        }
        f = &f * &c.f.pow(*m);
        fe = match (fe, &c.f_exact) {
            (Some(a), Some(b)) => Some(&a * &b.pow(*m)),
            _ => None,
        };
        let mr = *m as f64;
        k = &k + &cof.k.scale(&mr);
        ke = match (ke, &cof.k_exact) {
            (Some(a), Some(b)) => Some(&a + &b.scale(&Rational::from_integer((*m).into()))),
            _ => None,
        };
        s += c.s * *m as u64;
        if c.f_exact.is_none() {
            if let Some(v) = c.valid_through {
                let d = v.saturating_sub(c.s);
                margin = Some(margin.map_or(d, |a: u64| a.min(d)));
            }
        }
        kvalid = match (kvalid, cof.valid_through) {
            (a, Some(v)) => Some(a.map_or(v, |a: u64| a.min(v))),
            (a, None) => a,
        };
    }
    let valid = margin.map(|d| s + d);
    let f = match valid {
        Some(v) => f.truncate_weighted(w.p, w.q, v),
        None => f,
    };
    let curve = CurveCandidate {
        weight: w,
        s,
        leading: f.component(w.p, w.q, s),
        f,
        f_exact: if valid.is_none() { fe } else { None },
        valid_through: valid,
        polynomial: parts.iter().all(|(c, _, _)| c.polynomial),
        leading_alphas: parts.iter().flat_map(|(c, _, _)| c.leading_alphas.clone()).collect(),
    };
    let r_bar = k.prune(1e-14).weighted_order(w.p, w.q);
    let cof = Cofactor { k, k_exact: ke.filter(|_| kvalid.is_none()), r_bar, valid_through: kvalid, residual: 0.0 };
    Ok((curve, cof))
}

/// Result of the branch search for one weight.
#[derive(Debug, Clone)]
pub struct CurveSearch {
    pub determining: DeterminingPolynomial,
    pub roots: Vec<(Complex64, usize)>,
    pub branches: Vec<Branch>,
    pub curves: Vec<(CurveCandidate, Cofactor)>,
    pub notes: Vec<String>,
}

/// Builds all invariant curves reachable from complex-conjugate orbits of non-real roots of 𝒬.
pub fn find_curves(x: &VectorField, lead: &Component, w: Weight, r: i64, order: usize) -> Result<CurveSearch, BranchError> {
    let determining = q_polynomial(lead, w, r)?;
    let roots = determining.roots();
    let mut notes = Vec::new();
    let mut branches: Vec<Branch> = Vec::new();
    let mut curves = Vec::new();
    let mut used = vec![false; roots.len()];
    let find = |z: Complex64, used: &[bool]| {
        roots
            .iter()
            .enumerate()
            .position(|(k, (rz, _))| !used[k] && (rz - z).norm() <= 1e-7 * z.norm().max(1.0))
    };
    for k in 0..roots.len() {
        let (alpha, _) = roots[k];
        if used[k] || alpha.im.abs() <= 1e-9 * alpha.norm().max(1.0) {
            continue;
        }
        // Orbit under conjugation and t ↦ ζt with ζ^p = 1 (α₀ ↦ ζ^q α₀).
        let mut orbit = vec![alpha];
        let mut idx = 0;
        while idx < orbit.len() {
            let z = orbit[idx];
            let mut cands = vec![z.conj()];
            for l in 1..w.p {
                let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (l as f64) * (w.q as f64) / w.p as f64);
                cands.push(z * zeta);
            }
            for c in cands {
                if !orbit.iter().any(|o| (o - c).norm() <= 1e-7 * c.norm().max(1.0)) {
                    orbit.push(c);
                }
            }
            idx += 1;
        }
        let mut members = Vec::new();
        let mut complete = true;
        for z in &orbit {
            match find(*z, &used) {
                Some(j) => {
                    used[j] = true;
                    members.push(roots[j].0);
                }
                None => complete = false,
            }
        }
        if !complete {
            notes.push(format!("orbit of α₀ = {alpha} is not contained in the roots of 𝒬"));
            continue;
        }
        let mut orbit_branches = Vec::new();
        let mut failed = false;
        for z in members {
            let fuchs = fuchs_index(lead, w, z);
            if fuchs.verdict != FuchsVerdict::IndexEqualsP {
                notes.push(format!("α₀ = {z}: Fuchs verdict {:?}, branch not extended", fuchs.verdict));
                failed = true;
                break;
            }
            match extend_branch(x, lead, w, r, z, order) {
                Ok(b) => orbit_branches.push(b),
                Err(e) => {
                    notes.push(format!("α₀ = {z}: {e}"));
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            continue;
        }
        link_partners(&mut orbit_branches);
        match assemble_curve(&orbit_branches) {
            Ok(curve) => match curve.check_leading_form().and_then(|_| extract_cofactor(x, &curve, r)) {
                Ok(cof) => curves.push((curve, cof)),
                Err(e) => notes.push(format!("curve from α₀ = {alpha}: {e}")),
            },
            Err(e) => notes.push(format!("curve from α₀ = {alpha}: {e}")),
        }
        branches.extend(orbit_branches);
    }
    Ok(CurveSearch { determining, roots, branches, curves, notes })
}

/// Sets each branch's conjugate-partner index.
pub fn link_partners(branches: &mut [Branch]) {
    let alphas: Vec<Complex64> = branches.iter().map(|b| b.alpha0()).collect();
    for (k, b) in branches.iter_mut().enumerate() {
        let target = alphas[k].conj();
        b.partner = alphas
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k || alphas[k].im == 0.0)
            .find(|(_, a)| (*a - target).norm() <= 1e-8 * target.norm().max(1.0))
            .map(|(j, _)| j);
    }
}

/// Exact rational form of a double, for tests and reports.
pub fn exact(x: f64) -> Rational {
    rational_from_f64(x).unwrap_or_else(Rational::zero)
}
