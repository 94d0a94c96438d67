//! Corpus fixtures: per-system checks against known closed forms.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Rational, UniPoly};
use crate::blowup::{polar_components, PolarOptions};
use crate::branches::{fuchs_index, q_polynomial};
use crate::cofactor::pv_xi;
use crate::diagram::{newton_diagram, qh_decompose, VectorField, Weight};
use crate::flow::{eta1_estimate, Axis, Cylinder, FlowOptions};

use super::analyze::{analyze, AnalysisReport, Stability, VerdictKind};
use super::config::Rho0Grid;
use super::corpus::{corpus_names, corpus_system};
use super::system::{SystemFile, SystemFileError};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("no corpus fixture named {0:?}")]
    Missing(String),
    #[error("fixture {0}: {1}")]
    System(String, SystemFileError),
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs the fixtures of every corpus entry, or of the one named by `filter`.
pub fn run_corpus(filter: Option<&str>) -> Result<Vec<FixtureOutcome>, FixtureError> {
    let names: Vec<&str> = match filter {
        Some(f) => {
            if corpus_system(f).is_none() {
                return Err(FixtureError::Missing(f.to_string()));
            }
            vec![f]
        }
        None => corpus_names().collect(),
    };
    let systems: Vec<(&str, SystemFile)> = names
        .into_iter()
        .map(|n| match corpus_system(n) {
            Some(Ok(s)) => Ok((n, s)),
            Some(Err(e)) => Err(FixtureError::System(n.to_string(), e)),
            None => Err(FixtureError::Missing(n.to_string())),
        })
        .collect::<Result<_, _>>()?;
    Ok(systems
        .par_iter()
        .map(|(name, sys)| {
            let t = Instant::now();
            let checks = match fixture_checks(name, sys) {
                Ok(c) => c,
                Err(e) => vec![Check { label: "fixture setup".into(), passed: false, detail: e.to_string() }],
            };
            FixtureOutcome { name: name.to_string(), checks, elapsed: t.elapsed() }
        })
        .collect())
}

/// Plain-text pass/fail table.
pub fn format_table(outcomes: &[FixtureOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&format!("{:<20} {} ({:.2?})\n", o.name, if o.passed() { "PASS" } else { "FAIL" }, o.elapsed));
        for c in &o.checks {
            s.push_str(&format!("  [{}] {}: {}\n", if c.passed { "ok" } else { "FAIL" }, c.label, c.detail));
        }
    }
    s
}

type Checks = Result<Vec<Check>, SystemFileError>;

fn fixture_checks(name: &str, sys: &SystemFile) -> Checks {
    match name {
        "linear" => linear(sys),
        "quasihomogeneous" => quasihomogeneous(sys),
        "andreev" => andreev(sys),
        "algaba" => algaba(sys),
        "dccd" => dccd(sys),
        "armengol" => armengol(sys),
        "ultimo" => ultimo(sys),
        "manosa1" => manosa1(sys),
        "manosa2" => manosa2(sys),
        "hamiltonian_cubic" => Ok(vec![verdict_check("x' = y, y' = −x³ is a center", &report(sys)?, VerdictKind::Center, None)]),
        other => Ok(vec![Check { label: "fixture".into(), passed: false, detail: format!("no checks defined for {other}") }]),
    }
}

fn check(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { label: label.into(), passed, detail: detail.into() }
}

fn report(sys: &SystemFile) -> Result<AnalysisReport, SystemFileError> {
    analyze(sys, &sys.config()?)
}

fn with(sys: &SystemFile, params: &[(&str, &str)]) -> Result<SystemFile, SystemFileError> {
    sys.with_params(params.iter().copied())
}

fn verdict_check(label: &str, r: &AnalysisReport, kind: VerdictKind, stability: Option<Stability>) -> Check {
    let ok = r.verdict.kind == kind && (stability.is_none() || r.verdict.stability == stability);
    check(label, ok, format!("{:?} {:?} [{:?}] {}", r.verdict.kind, r.verdict.stability, r.verdict.rule, r.verdict.summary))
}

fn rat(s: &str) -> Rational {
    s.parse().expect("fixture rationals are well formed")
}

fn poly(coeffs: &[&str]) -> UniPoly<Rational> {
    UniPoly::new(coeffs.iter().map(|c| rat(c)).collect())
}

fn weights_of(x: &VectorField) -> Vec<(u32, u32, i64)> {
    newton_diagram(x)
        .map(|d| d.edges.iter().map(|e| (e.weight.p, e.weight.q, e.leading_degree)).collect())
        .unwrap_or_default()
}

/// 𝒬 of the field for weight `w`, compared with `expected` up to a constant factor.
fn q_check(x: &VectorField, w: Weight, expected: UniPoly<Rational>) -> Check {
    let label = format!("𝒬 for weight {w}");
    let Some(edge) = newton_diagram(x).ok().and_then(|d| d.edge_for(w).cloned()) else {
        return check(label, false, "weight is not an edge weight");
    };
    match q_polynomial(qh_decompose(x, w).leading(), w, edge.leading_degree) {
        Ok(q) => {
            let ok = q.proportional_to(&expected);
            check(label, ok, format!("{:?} vs expected {:?}", coeff_strings(&q.poly), coeff_strings(&expected)))
        }
        Err(e) => check(label, false, e.to_string()),
    }
}

fn coeff_strings(p: &UniPoly<Rational>) -> Vec<String> {
    p.coeffs().iter().map(|c| c.to_string()).collect()
}

/// Fuchs indices j* at every root of 𝒬 for weight `w`.
fn fuchs_indices(x: &VectorField, w: Weight) -> Vec<Option<Complex64>> {
    let Some(edge) = newton_diagram(x).ok().and_then(|d| d.edge_for(w).cloned()) else {
        return Vec::new();
    };
    let dec = qh_decompose(x, w);
    let Ok(q) = q_polynomial(dec.leading(), w, edge.leading_degree) else {
        return Vec::new();
    };
    q.roots().into_iter().map(|(z, _)| fuchs_index(dec.leading(), w, z).index).collect()
}

fn fuchs_check(x: &VectorField, w: Weight, expected: f64, tol: f64) -> Check {
    let idx = fuchs_indices(x, w);
    let ok = !idx.is_empty() && idx.iter().all(|j| j.is_some_and(|j| (j.re - expected).abs() < tol && j.im.abs() < tol));
    check(format!("Fuchs index on {w}"), ok, format!("j* = {idx:?}, expected {expected}"))
}

/// η₁ on the positive y half-axis for weight `w` over `[min, max]`.
pub(crate) fn eta1_on(x: &VectorField, w: Weight, min: f64, max: f64) -> Result<(f64, f64), String> {
    let ps = polar_components(x, w, PolarOptions::default()).map_err(|e| e.to_string())?;
    let cyl = Cylinder::new(&ps);
    let grid = Rho0Grid { min, max, count: 8 }.points();
    let e = eta1_estimate(&cyl, &grid, Axis::PositiveY, &FlowOptions::default()).map_err(|e| e.to_string())?;
    Ok((e.value, e.error))
}

fn eta1_check(label: &str, x: &VectorField, w: Weight, grid: (f64, f64), expected: f64, rel: f64) -> Check {
    match eta1_on(x, w, grid.0, grid.1) {
        Ok((v, err)) => {
            let d = (v / expected - 1.0).abs();
            check(label, d < rel, format!("η₁ = {v:.9} ± {err:.1e}, expected {expected:.9} (relative {d:.2e})"))
        }
        Err(e) => check(label, false, e),
    }
}

fn weight(p: u32, q: u32) -> Weight {
    Weight::new(p, q).expect("fixture weights are coprime")
}

fn linear(sys: &SystemFile) -> Checks {
    Ok(vec![
        verdict_check("λ = 0 is a center", &report(&with(sys, &[("lam", "0")])?)?, VerdictKind::Center, None),
        verdict_check("λ = 1/10 is an unstable focus", &report(&with(sys, &[("lam", "1/10")])?)?, VerdictKind::Focus, Some(Stability::Unstable)),
        verdict_check("λ = −1/10 is a stable focus", &report(&with(sys, &[("lam", "-1/10")])?)?, VerdictKind::Focus, Some(Stability::Stable)),
    ])
}

fn quasihomogeneous(sys: &SystemFile) -> Checks {
    let x = sys.field()?;
    let mut out = vec![q_check(&x, weight(1, 3), poly(&["4", "6", "3"]))];
    let r = report(sys)?;
    let k_zero = r.weights.iter().any(|w| w.cofactor.as_ref().is_some_and(|c| c.r_bar.is_none()));
    out.push(check("3A + D = 0 gives K ≡ 0", k_zero, "cofactor (3A + D)x² vanishes"));
    out.push(verdict_check("3A + D = 0 is a center", &r, VerdictKind::Center, None));
    let focus = report(&with(sys, &[("D", "-2")])?)?;
    out.push(verdict_check("3A + D = 1 is a focus", &focus, VerdictKind::Focus, None));
    let bad = report(&with(sys, &[("A", "1"), ("B", "1"), ("C", "-1"), ("D", "-3")])?)?;
    out.push(check(
        "Δ > 0 violates monodromy",
        !bad.monodromy.monodromic && bad.verdict.kind == VerdictKind::Inconclusive,
        bad.verdict.summary.clone(),
    ));
    Ok(out)
}

fn andreev(sys: &SystemFile) -> Checks {
    let x = sys.field()?;
    let ws = weights_of(&x);
    let mut out = vec![
        check("single weight (1,2) with r = 1", ws == vec![(1, 2, 1)], format!("{ws:?}")),
        q_check(&x, weight(1, 2), poly(&["1", "0", "2"])),
        fuchs_check(&x, weight(1, 2), -4.0, 1e-10),
        verdict_check("P = B + 3L = (A + κ)L = 0 is a center", &report(sys)?, VerdictKind::Center, None),
    ];
    out.push(verdict_check("P = 1 is a focus", &report(&with(sys, &[("P", "1")])?)?, VerdictKind::Focus, None));
    Ok(out)
}

fn algaba(sys: &SystemFile) -> Checks {
    let x = sys.field()?;
    let a = x.params.get("a").cloned().unwrap_or_else(|| rat("0"));
    let six_a = (rat("6") * &a).to_string();
    let mut out = vec![q_check(&x, weight(2, 3), poly(&["1", "0", &six_a, "0", "3/2"]))];
    let r = report(sys)?;
    let af = crate::algebra::rational_to_f64(&a);
    // F₁₂ = (2/3)x⁶ + 4a x³y² + y⁴, normalized by the y⁴ coefficient.
    let curve_ok = r.weights.iter().find_map(|w| w.curve.as_ref()).is_some_and(|c| {
        let get = |i, j| c.terms.iter().find(|t| t.i == i && t.j == j).map_or(0.0, |t| t.value);
        let scale = get(0, 4);
        scale != 0.0
            && (get(6, 0) / scale - 2.0 / 3.0).abs() < 1e-9
            && (get(3, 2) / scale - 4.0 * af).abs() < 1e-9
            && c.terms.iter().filter(|t| t.value.abs() > 1e-12 * scale.abs()).count() == 3
    });
    out.push(check("curve (2/3)x⁶ + 4a x³y² + y⁴", curve_ok, "leading form of the invariant curve"));
    out.push(verdict_check("(a, α, β) = (1/5, 1, 1) is a focus", &r, VerdictKind::Focus, None));
    let ham = report(&with(sys, &[("alpha", "0"), ("beta", "0")])?)?;
    out.push(verdict_check("Hamiltonian (a, 0, 0) is a center", &ham, VerdictKind::Center, None));
    Ok(out)
}

fn dccd(sys: &SystemFile) -> Checks {
    Ok(vec![
        verdict_check("μ = A = 0 is a center", &report(sys)?, VerdictKind::Center, None),
        verdict_check("μ = 1/10 is a focus", &report(&with(sys, &[("mu", "1/10")])?)?, VerdictKind::Focus, None),
    ])
}

fn armengol(sys: &SystemFile) -> Checks {
    let x = sys.field()?;
    let p = |k: &str| x.params.get(k).map(crate::algebra::rational_to_f64).unwrap_or(0.0);
    let (a, b) = (p("a"), p("b"));
    let d = newton_diagram(&x);
    let verts = d.as_ref().map(|d| d.vertices.clone()).unwrap_or_default();
    let ws = weights_of(&x);
    let bs = x.params.get("b").cloned().unwrap_or_else(|| rat("1"));
    let m3b = (rat("-3") * &bs).to_string();
    let mb = (-bs.clone()).to_string();
    let m2b = (rat("-2") * &bs).to_string();
    Ok(vec![
        check("vertices (0,4), (2,2), (6,0)", verts == vec![(0, 4), (2, 2), (6, 0)], format!("{verts:?}")),
        check("weights (1,1) r = 2 and (1,2) r = 3", ws == vec![(1, 1, 2), (1, 2, 3)], format!("{ws:?}")),
        q_check(&x, weight(1, 1), poly(&["0", "0", &m3b, "0", &mb])),
        q_check(&x, weight(1, 2), poly(&["-2", "-2", &m2b])),
        eta1_check("η₁ = exp(2π√3 a/(3b))", &x, weight(1, 2), (1e-3 / 27000.0, 1e-1 / 27000.0), (2.0 * PI * 3f64.sqrt() * a / (3.0 * b)).exp(), 1e-2),
    ])
}

fn ultimo(sys: &SystemFile) -> Checks {
    let x = sys.field()?;
    let ws = weights_of(&x);
    Ok(vec![
        check("weights (1,1) and (1,2)", ws.iter().map(|w| (w.0, w.1)).collect::<Vec<_>>() == vec![(1, 1), (1, 2)], format!("{ws:?}")),
        fuchs_check(&x, weight(1, 2), -2.0, 1e-10),
    ])
}

/// Closed form of η₁ for the first Mañosa family.
pub(crate) fn manosa1_eta1(a: f64) -> f64 {
    let delta = 32.0 - (1.0 + 3.0 * a).powi(2);
    (PI + 4.0 * PI * a / delta.sqrt()).exp()
}

fn manosa1(sys: &SystemFile) -> Checks {
    let mut out = Vec::new();
    for (s, a) in [("0", 0.0), ("1", 1.0), ("-31/25", -31.0 / 25.0)] {
        let x = with(sys, &[("a", s)])?.field()?;
        out.push(eta1_check(&format!("η₁ formula at a = {s}"), &x, weight(1, 3), (1e-3, 3e-2), manosa1_eta1(a), 1e-3));
    }
    let x = with(sys, &[("a", "1")])?.field()?;
    let xi = polar_components(&x, weight(1, 1), PolarOptions::default())
        .map_err(|e| e.to_string())
        .and_then(|ps| pv_xi(&ps).map_err(|e| e.to_string()));
    out.push(match xi {
        Ok(v) => check("ξ₁₁(2π) = π", v.value.is_some_and(|v| (v - PI).abs() < 1e-8), format!("{:?}", v.value)),
        Err(e) => check("ξ₁₁(2π) = π", false, e),
    });
    let r = report(&with(sys, &[("a", "1")])?)?;
    out.push(verdict_check("a = 1 is an unstable focus", &r, VerdictKind::Focus, Some(Stability::Unstable)));
    Ok(out)
}

fn manosa2(sys: &SystemFile) -> Checks {
    let x = sys.field()?;
    let a = x.params.get("a").map(crate::algebra::rational_to_f64).unwrap_or(1.0);
    let a_s = x.params.get("a").map(|v| (-v.clone() * rat("3")).to_string()).unwrap_or_else(|| "-3".into());
    let idx = fuchs_indices(&x, weight(1, 3));
    // j* is complex when a² < 4; compare as complex numbers.
    let expected = {
        let d = Complex64::new(a * a - 4.0, 0.0).sqrt();
        6.0 * d / (5.0 * a + 3.0 * d)
    };
    let fuchs_ok = !idx.is_empty()
        && idx.iter().all(|j| j.is_some_and(|j| (j - expected).norm() < 1e-10 || (j - expected.conj()).norm() < 1e-10));
    Ok(vec![
        q_check(&x, weight(1, 3), poly(&["9", &a_s, "1"])),
        check("Fuchs index 6√(a²−4)/(5a+3√(a²−4))", fuchs_ok, format!("j* = {idx:?}, expected {expected}")),
        eta1_check("η₁ = exp(10π/(9√3)) at a = 1", &x, weight(1, 3), (1e-3 / 27000.0, 1e-1 / 27000.0), (10.0 * PI / (9.0 * 3f64.sqrt())).exp(), 1e-3),
    ])
}
