//! Two-stage sign test of a cofactor near the origin.

use std::f64::consts::PI;

use serde::Serialize;

use crate::algebra::{circle_roots, trig_substitute, BiPoly, Rational};
use crate::diagram::Weight;

/// `(angles, radii)` of the sampling grid.
pub const SIGN_GRID: (usize, usize) = (512, 32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignVerdictKind {
    PositiveDefinite,
    NegativeDefinite,
    SignDefined,
    Indefinite,
    Inconclusive,
}

/// Zeros of `K_r̄(cos φ, sin φ)` on the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeadingFormRecord {
    pub degree: u64,
    /// `(angle, multiplicity)`.
    pub zeros: Vec<(f64, usize)>,
    /// Sign off the zeros, when it is the same everywhere.
    pub sign: Option<Sign>,
    /// Multiplicities came from an exact square-free factorization.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignVerdict {
    pub verdict: SignVerdictKind,
    /// Sign of the non-zero values when the verdict is definite or sign-defined.
    pub sign: Option<Sign>,
    /// Points `(x, y)` where the jet is strictly positive / strictly negative.
    pub witnesses: Vec<(f64, f64, f64)>,
    pub leading: Option<LeadingFormRecord>,
    /// Weighted degree of the sampled jet.
    pub jet_degree: u64,
    pub note: String,
}

impl SignVerdict {
    pub fn is_sign_defined(&self) -> bool {
        matches!(self.verdict, SignVerdictKind::PositiveDefinite | SignVerdictKind::NegativeDefinite | SignVerdictKind::SignDefined)
    }
}

fn leading_form(k: &BiPoly<f64>, k_exact: Option<&BiPoly<Rational>>, w: Weight, d: u64) -> LeadingFormRecord {
    let samples = 720;
    let value = |phi: f64| k.component(w.p, w.q, d).eval_f64(phi.cos(), phi.sin());
    let (zeros, certified) = match k_exact {
        Some(ke) => {
            let f = trig_substitute(&ke.component(w.p, w.q, d));
            (circle_roots(&f, 1e-8).unwrap_or_default(), true)
        }
        None => {
            let f = trig_substitute(&k.component(w.p, w.q, d));
            (circle_roots(&f, 1e-6).unwrap_or_default(), false)
        }
    };
    let scale = (0..samples).map(|i| value(2.0 * PI * i as f64 / samples as f64).abs()).fold(0.0, f64::max);
    let mut signs = (false, false);
    for i in 0..samples {
        let phi = 2.0 * PI * (i as f64 + 0.5) / samples as f64;
        if zeros.iter().any(|z| (phi - z.angle).abs() < 1e-9) {
            continue;
        }
        let v = value(phi);
        if v > 1e-12 * scale {
            signs.0 = true;
        } else if v < -1e-12 * scale {
            signs.1 = true;
        }
    }
    let sign = match signs {
        (true, false) => Some(Sign::Positive),
        (false, true) => Some(Sign::Negative),
        _ => None,
    };
    LeadingFormRecord { degree: d, zeros: zeros.iter().map(|z| (z.angle, z.multiplicity)).collect(), sign, certified }
}

/// Sign of the weighted jet `𝒥^d K` near the origin: exact zeros of the leading form, then a
/// weighted-polar grid of [`SIGN_GRID`] points with `ρ ∈ (0, ρ_max]`.
pub fn sign_definite_test(k: &BiPoly<f64>, k_exact: Option<&BiPoly<Rational>>, w: Weight, d: u64, rho_max: f64) -> SignVerdict {
    let jet = k.truncate_weighted(w.p, w.q, d);
    let Some(r_bar) = jet.prune(0.0).weighted_order(w.p, w.q) else {
        return SignVerdict {
            verdict: SignVerdictKind::Inconclusive,
            sign: None,
            witnesses: Vec::new(),
            leading: None,
            jet_degree: d,
            note: "jet vanishes identically".into(),
        };
    };
    let leading = leading_form(k, k_exact, w, r_bar);
    let (na, nr) = SIGN_GRID;
    let scale = jet.max_magnitude();
    let mut pos: Option<(f64, f64, f64)> = None;
    let mut neg: Option<(f64, f64, f64)> = None;
    let mut zero_seen = false;
    for j in 1..=nr {
        let rho = rho_max * j as f64 / nr as f64;
        let tol = 1e-13 * scale * rho.powi(r_bar as i32).max(f64::MIN_POSITIVE);
        for i in 0..na {
            let phi = 2.0 * PI * i as f64 / na as f64;
            let (x, y) = (rho.powi(w.p as i32) * phi.cos(), rho.powi(w.q as i32) * phi.sin());
            let v = jet.eval_f64(x, y);
            if v > tol {
                pos.get_or_insert((x, y, v));
            } else if v < -tol {
                neg.get_or_insert((x, y, v));
            } else {
                zero_seen = true;
            }
        }
    }
    let leading_odd = leading.zeros.iter().any(|z| z.1 % 2 == 1);
    let grid_sign = match (pos, neg) {
        (Some(_), None) => Some(Sign::Positive),
        (None, Some(_)) => Some(Sign::Negative),
        _ => None,
    };
    let witnesses: Vec<(f64, f64, f64)> = pos.into_iter().chain(neg).collect();
    let stage = if leading.certified { "certified leading form" } else { "sampled leading form" };
    let (verdict, sign, note) = if leading_odd || (leading.sign.is_none() && leading.zeros.is_empty()) {
        let w = leading_witnesses(&leading, k, w, r_bar);
        return SignVerdict {
            verdict: SignVerdictKind::Indefinite,
            sign: None,
            witnesses: if w.len() == 2 { w } else { witnesses },
            leading: Some(leading),
            jet_degree: d,
            note: format!("{stage} changes sign"),
        };
    } else if pos.is_some() && neg.is_some() {
        (SignVerdictKind::Inconclusive, None, format!("{stage} is sign-defined but the sampled jet changes sign"))
    } else if grid_sign.is_some() && grid_sign == leading.sign {
        let kind = match (zero_seen, grid_sign) {
            (false, Some(Sign::Positive)) => SignVerdictKind::PositiveDefinite,
            (false, Some(Sign::Negative)) => SignVerdictKind::NegativeDefinite,
            _ => SignVerdictKind::SignDefined,
        };
        (kind, grid_sign, format!("{stage} and sampled jet agree"))
    } else {
        (SignVerdictKind::Inconclusive, None, format!("{stage} and sampled jet disagree"))
    };
    SignVerdict { verdict, sign, witnesses, leading: Some(leading), jet_degree: d, note }
}

/// Two points of opposite sign on a small weighted circle, one on each side of an odd zero.
fn leading_witnesses(rec: &LeadingFormRecord, k: &BiPoly<f64>, w: Weight, d: u64) -> Vec<(f64, f64, f64)> {
    let lead = k.component(w.p, w.q, d);
    let t: f64 = 1e-2;
    let at = |phi: f64| {
        let (x, y) = (t.powi(w.p as i32) * phi.cos(), t.powi(w.q as i32) * phi.sin());
        (x, y, lead.eval_f64(x, y))
    };
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for &(angle, m) in &rec.zeros {
        if m % 2 == 1 {
            for delta in [0.05, 0.01, 0.2] {
                let (a, b) = (at(angle - delta), at(angle + delta));
                if a.2 * b.2 < 0.0 {
                    out = if a.2 > 0.0 { vec![a, b] } else { vec![b, a] };
                    return out;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn definite_semidefinite_and_indefinite() {
        let w = Weight::new(1, 1).unwrap();
        let xy = BiPoly::from_terms([((1, 1), 8.0)]);
        let v = sign_definite_test(&xy, None, w, 2, 0.5);
        assert_eq!(v.verdict, SignVerdictKind::Indefinite);
        assert_eq!(v.witnesses.len(), 2);
        assert!(v.witnesses[0].2 > 0.0 && v.witnesses[1].2 < 0.0);

        let x2 = BiPoly::from_terms([((2, 0), 3.0)]);
        let x2e = BiPoly::from_terms([((2, 0), rat(3, 1))]);
        let v = sign_definite_test(&x2, Some(&x2e), w, 2, 0.5);
        assert_eq!(v.verdict, SignVerdictKind::SignDefined);
        assert_eq!(v.sign, Some(Sign::Positive));
        assert!(v.leading.as_ref().unwrap().certified);

        let sum = BiPoly::from_terms([((2, 0), -1.0), ((0, 2), -2.0)]);
        let v = sign_definite_test(&sum, None, w, 2, 0.5);
        assert_eq!(v.verdict, SignVerdictKind::NegativeDefinite);
    }
}
