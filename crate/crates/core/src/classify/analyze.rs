//! The analysis pipeline: diagram, per-weight blow-up, curves, flow and cofactor evidence.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{BiPoly, Rational};
use crate::blowup::{polar_components, Orientation, PolarOptions, PolarSystem};
use crate::branches::{combine_curves, find_curves, Admissibility, Cofactor, CurveCandidate, FuchsIndex};
use crate::cofactor::{
    beta_fit, beta_quadrature, integral_k, pv_xi, sign_definite_test, BetaExpansion, IntegralMethod,
    Sign, SignVerdict, XiValue,
};
use crate::diagram::{newton_diagram, remove_common_factor, NewtonDiagram, VectorField, Weight};
use crate::flow::{
    a1_closed_quadrature, bautin_coefficients, eta1_estimate, poincare_map, Axis, BautinCoefficients, Cylinder, Eta1Estimate, Eta1Method,
    FlowOptions,
};

use super::config::{AnalysisConfig, Rho0Grid};
use super::system::SystemFile;

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Factor applied to both ends of the ρ₀ grid when turns fail on it.
const GRID_SHRINK: f64 = 30.0;
const GRID_RETRIES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    Center,
    Focus,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
}

/// What a piece of evidence rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `∫K̂` vanishes on the whole grid.
    IntegralVanishes,
    /// `Π(ρ₀) = ρ₀` on the whole grid.
    ReturnIdentity,
    /// The cofactor is identically zero, so the curve is a first integral.
    FirstIntegral,
    /// `∫K̂` keeps one sign and is bounded away from zero.
    IntegralNonzero,
    /// The cofactor jet is sign-defined.
    SignDefinite,
    /// A Poincaré–Lyapunov quantity differs from its center value.
    LyapunovQuantity,
    /// Center and focus evidence both present.
    ConflictingEvidence,
    /// The singular point is not monodromic.
    MonodromyViolated,
    /// The field is degenerate (non-isolated singularity and similar).
    DegenerateInput,
    /// No rule applied.
    InsufficientEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Supports {
    Center,
    Focus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub rule: Rule,
    pub supports: Supports,
    pub weight: Option<Weight>,
    pub stability: Option<Stability>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub stability: Option<Stability>,
    pub rule: Rule,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemEcho {
    pub name: Option<String>,
    pub description: Option<String>,
    /// Parameter bindings after evaluation.
    pub params: BTreeMap<String, String>,
    pub p: String,
    pub q: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyRecord {
    /// `false` when a violation was detected; `true` only means none was found.
    pub monodromic: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleRecord {
    pub angle: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootRecord {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminingRecord {
    /// Coefficients of 𝒬(η) in increasing degree.
    pub coefficients: Vec<String>,
    pub roots: Vec<RootRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRecord {
    pub alpha0: RootRecord,
    pub order: usize,
    pub residual: f64,
    pub admissibility: Admissibility,
    pub fuchs: FuchsIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermRecord {
    pub i: u32,
    pub j: u32,
    pub value: f64,
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    /// Weighted degree of the leading form `F_s`.
    pub s: u64,
    pub polynomial: bool,
    pub valid_through: Option<u64>,
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CofactorRecord {
    pub r_bar: Option<u64>,
    pub valid_through: Option<u64>,
    pub residual: f64,
    pub terms: Vec<TermRecord>,
}

/// One row of the `I(ρ₀)` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralRow {
    pub rho0: f64,
    pub weight: Weight,
    pub time_domain: Option<f64>,
    pub rho1: Option<f64>,
    /// `log|F̂(0, Π(ρ₀))/F̂(0, ρ₀)|`.
    pub log_identity: Option<f64>,
    pub discrepancy: Option<f64>,
    pub pv: Option<f64>,
    pub pv_error: Option<f64>,
    pub flagged: bool,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnRow {
    pub rho0: f64,
    pub rho1: Option<f64>,
    pub difference: Option<f64>,
    pub error: Option<String>,
}

/// A Poincaré–Lyapunov quantity with the method that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaValue {
    pub index: usize,
    pub value: f64,
    pub error: Option<f64>,
    pub weight: Weight,
    pub method: String,
}

/// A checked relation `lhs = rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relation {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightReport {
    pub weight: Weight,
    pub r: i64,
    pub omega: Vec<AngleRecord>,
    pub orientation: Orientation,
    pub in_mo: bool,
    pub determining: Option<DeterminingRecord>,
    pub branches: Vec<BranchRecord>,
    pub curve: Option<CurveRecord>,
    pub cofactor: Option<CofactorRecord>,
    pub integrals: Vec<IntegralRow>,
    /// `η₁..η_k` from the Bautin recursion.
    pub bautin: Vec<f64>,
    pub beta: Option<BetaExpansion>,
    pub relations: Vec<Relation>,
    pub sign: Option<SignVerdict>,
    pub xi: Option<XiValue>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub system: SystemEcho,
    pub config: AnalysisConfig,
    /// Common factor of P and Q that was divided out.
    pub common_factor: Option<String>,
    pub diagram: Option<NewtonDiagram>,
    pub monodromy: MonodromyRecord,
    pub weights: Vec<WeightReport>,
    /// Weight whose cylinder carries the return map and η₁.
    pub flow_weight: Option<Weight>,
    /// ρ₀ grid actually sampled.
    pub grid: Option<Rho0Grid>,
    pub returns: Vec<ReturnRow>,
    pub eta: Vec<EtaValue>,
    pub eta1_numeric: Option<Eta1Estimate>,
    pub evidence: Vec<Evidence>,
    pub verdict: Verdict,
    pub errors: Vec<String>,
    /// Broken internal consistency checks (reported with exit code 3 by the CLI).
    pub invariant_violations: Vec<String>,
}

/// Label for η₁ outside the Mo class.
pub const NUMERIC_ETA1_LABEL: &str = "numeric, no closed-form method implemented";

fn echo(sys: &SystemFile, x: &VectorField) -> SystemEcho {
    SystemEcho {
        name: sys.name.clone(),
        description: sys.description.clone(),
        params: x.params.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        p: x.p.to_string(),
        q: x.q.to_string(),
    }
}

fn terms_of(f: &BiPoly<f64>, exact: Option<&BiPoly<Rational>>) -> Vec<TermRecord> {
    f.prune(0.0)
        .terms()
        .map(|((i, j), c)| TermRecord { i, j, value: *c, exact: exact.map(|e| e.coeff(i, j).to_string()) })
        .collect()
}

fn root_record(z: Complex64, multiplicity: usize) -> RootRecord {
    RootRecord { re: z.re, im: z.im, multiplicity }
}

fn is_real_nonzero(z: Complex64) -> bool {
    z.norm() > 1e-12 && z.im.abs() <= 1e-9 * z.norm().max(1.0)
}

fn flow_options(cfg: &AnalysisConfig) -> FlowOptions {
    FlowOptions { atol: cfg.atol, rtol: cfg.rtol, trust_radius: cfg.trust_radius, ..FlowOptions::default() }
}

fn shrunk(g: Rho0Grid, k: usize) -> Rho0Grid {
    let f = GRID_SHRINK.powi(k as i32);
    Rho0Grid { min: g.min / f, max: g.max / f, count: g.count }
}

/// Runs the full pipeline on a parsed system file.
pub fn analyze(sys: &SystemFile, cfg: &AnalysisConfig) -> Result<AnalysisReport, super::system::SystemFileError> {
    let field = sys.field()?;
    Ok(analyze_field(sys, &field, cfg))
}

pub fn analyze_field(sys: &SystemFile, field: &VectorField, cfg: &AnalysisConfig) -> AnalysisReport {
    let mut report = AnalysisReport {
        schema: SCHEMA_VERSION,
        system: echo(sys, field),
        config: cfg.clone(),
        common_factor: None,
        diagram: None,
        monodromy: MonodromyRecord { monodromic: true, violations: Vec::new() },
        weights: Vec::new(),
        flow_weight: None,
        grid: None,
        returns: Vec::new(),
        eta: Vec::new(),
        eta1_numeric: None,
        evidence: Vec::new(),
        verdict: Verdict { kind: VerdictKind::Inconclusive, stability: None, rule: Rule::InsufficientEvidence, summary: String::new() },
        errors: Vec::new(),
        invariant_violations: Vec::new(),
    };
    let x = match remove_common_factor(field) {
        Ok(cf) => {
            report.common_factor = cf.removed.as_ref().map(|g| g.to_string());
            cf.field
        }
        Err(e) => {
            report.errors.push(e.to_string());
            return finish(report, Some(Rule::DegenerateInput));
        }
    };
    let diagram = match newton_diagram(&x) {
        Ok(d) => d,
        Err(e) => {
            report.errors.push(e.to_string());
            return finish(report, Some(Rule::DegenerateInput));
        }
    };
    let weights = match cfg.weights {
        Some(w) => vec![w],
        None => diagram.weights(),
    };
    report.diagram = Some(diagram);

    if x.p.filter(|i, _| i == 0).is_zero() {
        report.monodromy.violations.push("the y-axis is invariant (P(0, y) ≡ 0)".into());
    }
    if x.q.filter(|_, j| j == 0).is_zero() {
        report.monodromy.violations.push("the x-axis is invariant (Q(x, 0) ≡ 0)".into());
    }

    let popts = PolarOptions { allow_any_weight: cfg.weights.is_some(), extra_orders: Some(cfg.extra_orders) };
    let mut systems: Vec<(PolarSystem, Option<(CurveCandidate, Cofactor)>)> = Vec::new();
    for w in weights {
        let ps = match polar_components(&x, w, popts) {
            Ok(ps) => ps,
            Err(e) => {
                report.errors.push(format!("weight {w}: {e}"));
                continue;
            }
        };
        let (wr, curve) = weight_structure(&x, &ps, cfg);
        for root in wr.determining.iter().flat_map(|d| &d.roots) {
            let z = Complex64::new(root.re, root.im);
            if is_real_nonzero(z) {
                report.monodromy.violations.push(format!("real root η = {:.12} of 𝒬 for weight {w}", z.re));
            }
        }
        report.weights.push(wr);
        systems.push((ps, curve));
    }
    report.monodromy.monodromic = report.monodromy.violations.is_empty();
    if !report.monodromy.monodromic {
        return finish(report, Some(Rule::MonodromyViolated));
    }
    if systems.is_empty() {
        return finish(report, Some(Rule::DegenerateInput));
    }

    let opts = flow_options(cfg);
    let flow_idx = choose_flow_weight(&systems);
    let flow_ps = &systems[flow_idx].0;
    let flow_cyl = Cylinder::new(flow_ps);
    report.flow_weight = Some(flow_ps.weight);

    // Grid on which every return completes.
    let mut chosen = None;
    for k in 0..=GRID_RETRIES {
        let g = shrunk(cfg.rho0_grid, k);
        let rows: Vec<ReturnRow> = g
            .points()
            .par_iter()
            .map(|&r0| match poincare_map(&flow_cyl, r0, &opts) {
                Ok(s) => ReturnRow { rho0: r0, rho1: Some(s.rho1), difference: Some(s.difference), error: None },
                Err(e) => ReturnRow { rho0: r0, rho1: None, difference: None, error: Some(e.to_string()) },
            })
            .collect();
        let ok = rows.iter().all(|r| r.error.is_none());
        if ok || k == GRID_RETRIES {
            if !ok {
                report.errors.push(format!("returns failed on every grid down to [{:e}, {:e}]", g.min, g.max));
            } else if k > 0 {
                report.errors.push(format!("ρ₀ grid shrunk to [{:e}, {:e}] so that every turn completes", g.min, g.max));
            }
            chosen = Some((g, rows));
            break;
        }
    }
    let (grid, returns) = chosen.expect("at least one grid is tried");
    let returns_ok = returns.iter().all(|r| r.error.is_none());
    report.grid = Some(grid);
    report.returns = returns;

    // η₁ on the y half-axis, shrinking further if needed.
    let mut eta1 = None;
    let mut last_err = None;
    let base = (0..=GRID_RETRIES).position(|k| shrunk(cfg.rho0_grid, k) == grid).unwrap_or(0);
    for k in base..=GRID_RETRIES.max(base) {
        let g = shrunk(cfg.rho0_grid, k);
        match eta1_estimate(&flow_cyl, &g.points(), Axis::PositiveY, &opts) {
            Ok(e) => {
                eta1 = Some(e);
                break;
            }
            Err(e) => last_err = Some(e),
        }
    }
    if eta1.is_none() {
        if let Some(e) = last_err {
            report.errors.push(format!("η₁ estimate: {e}"));
        }
    }

    let points = grid.points();
    for (idx, (ps, curve)) in systems.iter().enumerate() {
        let wr = &mut report.weights[idx];
        let mut bautin = None;
        if ps.omega.is_empty() && !ps.components[0].g.is_zero() {
            bautin = mo_quantities(ps, cfg, wr, &mut report.eta);
        } else if !ps.components[0].g.is_zero() {
            match pv_xi(ps) {
                Ok(xi) => wr.xi = Some(xi),
                Err(e) => wr.notes.push(format!("ξ: {e}")),
            }
        }
        let Some((curve, cof)) = curve else { continue };
        let own = Cylinder::new(ps);
        let mut rows = integral_rows(&own, ps, curve, cof, &points, cfg, &opts);
        if rows.iter().any(|r| r.time_domain.is_none()) && idx != flow_idx {
            let alt = integral_rows(&flow_cyl, flow_ps, curve, cof, &points, cfg, &opts);
            if alt.iter().filter(|r| r.time_domain.is_some()).count() > rows.iter().filter(|r| r.time_domain.is_some()).count() {
                wr.notes.push(format!("integrals taken on the {} cylinder", flow_ps.weight));
                rows = alt;
            }
        }
        wr.integrals = rows;
        if ps.omega.is_empty() && cfg.use_bautin {
            beta_quantities(ps, curve, cof, bautin.as_ref(), wr);
        }
    }

    if let Some(e) = &eta1 {
        let mo = systems[flow_idx].0.omega.is_empty();
        if !mo {
            report.eta.push(EtaValue { index: 1, value: e.value, error: Some(e.error), weight: flow_ps.weight, method: NUMERIC_ETA1_LABEL.into() });
        }
    }
    report.eta1_numeric = eta1;
    collect_evidence(&mut report, &systems, flow_ps, returns_ok);
    finish(report, None)
}

/// Prefers a weight whose leading angular component is nonzero on both half-axes.
fn choose_flow_weight(systems: &[(PolarSystem, Option<(CurveCandidate, Cofactor)>)]) -> usize {
    let regular = |ps: &PolarSystem, phi: f64| {
        let g = &ps.components[0].g;
        !g.is_zero() && g.eval(phi).abs() > 1e-12 * g.max_magnitude()
    };
    systems
        .iter()
        .position(|(ps, _)| regular(ps, 0.0) && regular(ps, 0.5 * PI))
        .or_else(|| systems.iter().position(|(ps, _)| regular(ps, 0.0)))
        .unwrap_or(0)
}

fn weight_structure(x: &VectorField, ps: &PolarSystem, cfg: &AnalysisConfig) -> (WeightReport, Option<(CurveCandidate, Cofactor)>) {
    let w = ps.weight;
    let mut wr = WeightReport {
        weight: w,
        r: ps.r,
        omega: ps.omega.iter().map(|c| AngleRecord { angle: c.angle, multiplicity: c.multiplicity }).collect(),
        orientation: ps.orientation,
        in_mo: ps.omega.is_empty() && ps.orientation != Orientation::Degenerate,
        determining: None,
        branches: Vec::new(),
        curve: None,
        cofactor: None,
        integrals: Vec::new(),
        bautin: Vec::new(),
        beta: None,
        relations: Vec::new(),
        sign: None,
        xi: None,
        notes: Vec::new(),
    };
    let search = match find_curves(x, ps.decomposition.leading(), w, ps.r, cfg.branch_order) {
        Ok(s) => s,
        Err(e) => {
            wr.notes.push(format!("branch search: {e}"));
            return (wr, None);
        }
    };
    wr.determining = Some(DeterminingRecord {
        coefficients: search.determining.poly.coeffs().iter().map(|c| c.to_string()).collect(),
        roots: search.roots.iter().map(|&(z, m)| root_record(z, m)).collect(),
    });
    wr.branches = search
        .branches
        .iter()
        .map(|b| BranchRecord {
            alpha0: root_record(b.alpha0(), 1),
            order: b.order(),
            residual: b.residual,
            admissibility: b.admissibility,
            fuchs: b.fuchs.clone(),
        })
        .collect();
    wr.notes.extend(search.notes.iter().cloned());
    if search.curves.is_empty() {
        return (wr, None);
    }
    let parts: Vec<_> = search.curves.iter().map(|(c, k)| (c, k, 1u32)).collect();
    let (curve, cof) = match combine_curves(&parts) {
        Ok(c) => c,
        Err(e) => {
            wr.notes.push(format!("curve product: {e}"));
            return (wr, None);
        }
    };
    wr.curve = Some(CurveRecord {
        s: curve.s,
        polynomial: curve.polynomial,
        valid_through: curve.valid_through,
        terms: terms_of(&curve.f, curve.f_exact.as_ref()),
    });
    wr.cofactor = Some(CofactorRecord {
        r_bar: cof.r_bar,
        valid_through: cof.valid_through,
        residual: cof.residual,
        terms: terms_of(&cof.k, cof.k_exact.as_ref()),
    });
    if let Some(r_bar) = cof.r_bar {
        let mut d = cfg.sign_degree.unwrap_or(r_bar + 2);
        if let Some(v) = cof.valid_through {
            d = d.min(v);
        }
        wr.sign = Some(sign_definite_test(&cof.k, cof.k_exact.as_ref(), w, d.max(r_bar), cfg.trust_radius));
    }
    (wr, Some((curve, cof)))
}

fn integral_rows(
    cyl: &Cylinder,
    ps: &PolarSystem,
    curve: &CurveCandidate,
    cof: &Cofactor,
    points: &[f64],
    cfg: &AnalysisConfig,
    opts: &FlowOptions,
) -> Vec<IntegralRow> {
    let omega: Vec<f64> = ps.omega.iter().map(|c| c.angle).collect();
    let pv_allowed = cfg.use_pv && ps.orientation != Orientation::Mixed;
    points
        .par_iter()
        .map(|&r0| {
            let mut row = IntegralRow {
                rho0: r0,
                weight: cyl.weight,
                time_domain: None,
                rho1: None,
                log_identity: None,
                discrepancy: None,
                pv: None,
                pv_error: None,
                flagged: false,
                errors: Vec::new(),
            };
            match integral_k(cyl, &cof.k, r0, IntegralMethod::TimeDomain, &omega, opts)
                .and_then(|s| s.with_oracle(curve, cyl.weight.p, cfg.oracle_tol))
            {
                Ok(s) => {
                    row.time_domain = Some(s.value);
                    row.rho1 = Some(s.rho1);
                    row.log_identity = s.oracle;
                    row.discrepancy = s.discrepancy;
                    row.flagged = s.flagged;
                }
                Err(e) => row.errors.push(format!("time domain: {e}")),
            }
            if pv_allowed {
                match integral_k(cyl, &cof.k, r0, IntegralMethod::PvPhiDomain, &omega, opts) {
                    Ok(s) => {
                        row.pv = Some(s.value);
                        row.pv_error = s.error;
                    }
                    Err(e) => row.errors.push(format!("pv: {e}")),
                }
            }
            row
        })
        .collect()
}

fn mo_quantities(ps: &PolarSystem, cfg: &AnalysisConfig, wr: &mut WeightReport, eta: &mut Vec<EtaValue>) -> Option<BautinCoefficients> {
    let w = ps.weight;
    match a1_closed_quadrature(ps) {
        Ok(v) => eta.push(EtaValue { index: 1, value: v, error: None, weight: w, method: "closed-form quadrature of F_r/G_r".into() }),
        Err(e) => wr.notes.push(format!("η₁ quadrature: {e}")),
    }
    if !cfg.use_bautin {
        return None;
    }
    match bautin_coefficients(ps, cfg.bautin_order.max(2), cfg.atol, cfg.rtol) {
        Ok(b) => {
            wr.bautin = b.eta.clone();
            for i in 2..=b.order {
                eta.push(EtaValue { index: i, value: b.eta(i), error: None, weight: w, method: "Bautin recursion".into() });
            }
            Some(b)
        }
        Err(e) => {
            wr.notes.push(format!("Bautin recursion: {e}"));
            None
        }
    }
}

fn beta_quantities(ps: &PolarSystem, curve: &CurveCandidate, cof: &Cofactor, bautin: Option<&BautinCoefficients>, wr: &mut WeightReport) {
    let Some(r_bar) = cof.r_bar else {
        wr.notes.push("cofactor vanishes identically; every β is zero".into());
        return;
    };
    if (r_bar as i64) < ps.r {
        wr.notes.push(format!("r̄ = {r_bar} is below r = {}", ps.r));
        return;
    }
    let m = r_bar - ps.r as u64;
    let samples: Vec<(f64, f64)> = wr.integrals.iter().filter_map(|r| r.time_domain.map(|v| (r.rho0, v))).collect();
    let mut beta = match beta_fit(&samples, m) {
        Ok(b) => b,
        Err(e) => {
            wr.notes.push(format!("β fit: {e}"));
            return;
        }
    };
    if let Some(b) = bautin {
        match beta_quadrature(ps, cof, b) {
            Ok(q) => beta.quadrature = Some(q),
            Err(e) => wr.notes.push(format!("β quadrature: {e}")),
        }
    }
    let s = curve.s as f64;
    let eta = |i: usize| wr.bautin.get(i - 1).copied();
    let mut rel = |name: String, lhs: f64, rhs: f64| wr.relations.push(Relation { name, lhs, rhs, difference: lhs - rhs });
    if m == 0 {
        if let (Some(b0), Some(e1)) = (beta.beta(0), eta(1)) {
            rel("β₀ = s·log η₁".into(), b0, s * e1.ln());
        }
    } else {
        if let Some(e1) = eta(1) {
            rel("η₁ = 1".into(), e1, 1.0);
        }
        for i in 2..=m as usize {
            if let Some(e) = eta(i) {
                rel(format!("η{} = 0", subscript(i)), e, 0.0);
            }
        }
        if let (Some(bm), Some(e)) = (beta.beta(m), eta(m as usize + 1)) {
            rel(format!("β{} = s·η{}", subscript(m as usize), subscript(m as usize + 1)), bm, s * e);
        }
        if let (Some((q, _)), Some(bm)) = (beta.quadrature, beta.beta(m)) {
            rel(format!("β{} fit = β{} quadrature", subscript(m as usize), subscript(m as usize)), bm, q);
        }
    }
    wr.beta = Some(beta);
}

fn subscript(i: usize) -> String {
    i.to_string().chars().map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap()).unwrap()).collect()
}

/// Real-time stability from the growth of the return map in the direction of increasing φ.
fn stability_from_growth(growth: f64, ps: &PolarSystem) -> Stability {
    if growth * ps.time_sign() > 0.0 {
        Stability::Unstable
    } else {
        Stability::Stable
    }
}

fn collect_evidence(
    report: &mut AnalysisReport,
    systems: &[(PolarSystem, Option<(CurveCandidate, Cofactor)>)],
    flow_ps: &PolarSystem,
    returns_ok: bool,
) {
    let cfg = report.config.clone();
    let mut ev = Vec::new();
    let diffs: Vec<f64> = report.returns.iter().filter_map(|r| r.difference).collect();
    let return_identity = returns_ok && !diffs.is_empty() && diffs.iter().all(|d| d.abs() < cfg.return_tol);
    if return_identity {
        let max = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        ev.push(Evidence {
            rule: Rule::ReturnIdentity,
            supports: Supports::Center,
            weight: Some(flow_ps.weight),
            stability: None,
            detail: format!("max |Π(ρ₀) − ρ₀| = {max:.3e} over {} radii", diffs.len()),
        });
    }
    for (wr, (ps, curve)) in report.weights.iter().zip(systems) {
        if curve.is_none() {
            continue;
        }
        let w = wr.weight;
        if wr.cofactor.as_ref().is_some_and(|c| c.r_bar.is_none()) {
            ev.push(Evidence {
                rule: Rule::FirstIntegral,
                supports: Supports::Center,
                weight: Some(w),
                stability: None,
                detail: "the invariant curve has zero cofactor".into(),
            });
        }
        let values: Vec<f64> = wr.integrals.iter().filter_map(|r| r.time_domain).collect();
        let complete = !values.is_empty() && values.len() == wr.integrals.len();
        if complete && values.iter().all(|v| v.abs() < cfg.center_tol) {
            let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            ev.push(Evidence {
                rule: Rule::IntegralVanishes,
                supports: Supports::Center,
                weight: Some(w),
                stability: None,
                detail: format!("max |∫K̂| = {max:.3e} over {} radii", values.len()),
            });
        }
        let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let same_sign = values.iter().all(|v| *v > 0.0) || values.iter().all(|v| *v < 0.0);
        if !values.is_empty() && same_sign && max > cfg.focus_tol {
            ev.push(Evidence {
                rule: Rule::IntegralNonzero,
                supports: Supports::Focus,
                weight: Some(w),
                stability: Some(stability_from_growth(values[0].signum(), ps)),
                detail: format!("∫K̂ keeps sign {} with max |∫K̂| = {max:.3e}", if values[0] > 0.0 { "+" } else { "−" }),
            });
        }
        if let Some(sv) = &wr.sign {
            if sv.is_sign_defined() {
                let stability = match sv.sign {
                    Some(Sign::Positive) => Some(Stability::Unstable),
                    Some(Sign::Negative) => Some(Stability::Stable),
                    None => None,
                };
                ev.push(Evidence {
                    rule: Rule::SignDefinite,
                    supports: Supports::Focus,
                    weight: Some(w),
                    stability,
                    detail: format!("cofactor jet of degree {} is {:?} ({})", sv.jet_degree, sv.verdict, sv.note),
                });
            }
        }
    }
    // Poincaré–Lyapunov quantities.
    let signs_ok = |growth: f64| diffs.len() == report.returns.len() && !diffs.is_empty() && diffs.iter().all(|d| d.signum() == growth.signum());
    for (wr, (ps, _)) in report.weights.iter().zip(systems) {
        if !wr.in_mo {
            continue;
        }
        let e1 = report.eta.iter().find(|e| e.index == 1 && e.weight == wr.weight).map(|e| e.value);
        let mut found = None;
        if let Some(e1) = e1 {
            if (e1 - 1.0).abs() > cfg.eta_tol {
                found = Some((1, e1 - 1.0));
            }
        }
        if found.is_none() && e1.is_some_and(|e| (e - 1.0).abs() <= cfg.eta_tol) {
            for i in 2..=wr.bautin.len() {
                let v = wr.bautin[i - 1];
                if v.abs() > cfg.eta_tol {
                    found = Some((i, v));
                    break;
                }
            }
        }
        if let Some((i, g)) = found {
            let consistent = ps.weight != flow_ps.weight || signs_ok(g);
            if consistent {
                ev.push(Evidence {
                    rule: Rule::LyapunovQuantity,
                    supports: Supports::Focus,
                    weight: Some(wr.weight),
                    stability: Some(stability_from_growth(g, ps)),
                    detail: format!("first nonvanishing quantity η{} {} {:.6e}", subscript(i), if i == 1 { "− 1 =" } else { "=" }, g),
                });
            } else {
                report.errors.push(format!("η{} = {g:.3e} disagrees in sign with Π(ρ₀) − ρ₀ on the grid", subscript(i)));
            }
        }
    }
    if let Some(e) = &report.eta1_numeric {
        if !flow_ps.omega.is_empty() {
            let g = e.value - 1.0;
            let margin = cfg.eta_tol.max(10.0 * e.error);
            // Ratios belong to the map actually sampled; the inverse map sits on the other side of 1.
            let expected = match e.method {
                Eta1Method::Forward => g.signum(),
                Eta1Method::Inverse => -g.signum(),
            };
            let ratios_consistent = e.ratios.iter().all(|r| (r.1 - 1.0).signum() == expected);
            if g.abs() > margin && ratios_consistent {
                ev.push(Evidence {
                    rule: Rule::LyapunovQuantity,
                    supports: Supports::Focus,
                    weight: Some(flow_ps.weight),
                    stability: Some(stability_from_growth(g, flow_ps)),
                    detail: format!("η₁ = {:.9e} ± {:.1e} ({NUMERIC_ETA1_LABEL})", e.value, e.error),
                });
            }
        }
    }
    report.evidence = ev;
}

fn finish(mut report: AnalysisReport, forced: Option<Rule>) -> AnalysisReport {
    let inconclusive = |rule: Rule, summary: String| Verdict { kind: VerdictKind::Inconclusive, stability: None, rule, summary };
    if let Some(rule) = forced {
        let summary = match rule {
            Rule::MonodromyViolated => format!("monodromy condition violated: {}", report.monodromy.violations.join("; ")),
            _ => format!("analysis could not proceed: {}", report.errors.join("; ")),
        };
        report.verdict = inconclusive(rule, summary);
        return report;
    }
    let has = |r: Rule| report.evidence.iter().any(|e| e.rule == r);
    let center = has(Rule::ReturnIdentity) && (has(Rule::IntegralVanishes) || has(Rule::FirstIntegral));
    let focus_ev: Vec<&Evidence> = report
        .evidence
        .iter()
        .filter(|e| matches!(e.rule, Rule::SignDefinite | Rule::LyapunovQuantity))
        .collect();
    let any_focus = report.evidence.iter().any(|e| e.supports == Supports::Focus);
    report.verdict = if center && any_focus {
        report.invariant_violations.push("center and focus evidence both present".into());
        inconclusive(Rule::ConflictingEvidence, "center and focus evidence conflict".into())
    } else if center {
        let rule = if has(Rule::IntegralVanishes) { Rule::IntegralVanishes } else { Rule::FirstIntegral };
        Verdict { kind: VerdictKind::Center, stability: None, rule, summary: "integral of K̂ and return map both vanish on the grid".into() }
    } else if let Some(first) = focus_ev.iter().find(|e| e.rule == Rule::SignDefinite).or(focus_ev.first()) {
        let stabilities: Vec<Stability> = focus_ev.iter().filter_map(|e| e.stability).collect();
        let stability = first.stability.filter(|s| stabilities.iter().all(|t| t == s));
        if stability.is_none() && !stabilities.is_empty() {
            report.errors.push("focus evidence disagrees on the direction of stability".into());
        }
        Verdict { kind: VerdictKind::Focus, stability, rule: first.rule, summary: first.detail.clone() }
    } else {
        inconclusive(Rule::InsufficientEvidence, "no rule produced a decision".into())
    };
    report
}
