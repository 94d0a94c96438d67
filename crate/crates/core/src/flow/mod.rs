//! Flow on the blown-up cylinder: turns, return maps and Poincaré–Lyapunov quantities.

mod bautin;
mod cylinder;
pub mod ode;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::bisect;
use crate::algebra::quad::QuadError;

pub use bautin::{a1_closed_quadrature, bautin_coefficients, BautinCoefficients};
pub use cylinder::{Cylinder, Monomials};
use ode::{Control, DenseSegment, Dopri5, OdeStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("system is not in the Mo class (characteristic direction at φ = {witness:.6})")]
    NotMo { witness: f64 },
    #[error("trajectory from ρ₀ = {rho0:e} left the trust radius")]
    Escaped { rho0: f64 },
    #[error("trajectory from ρ₀ = {rho0:e} stalled: {reason}")]
    Stalled { rho0: f64, reason: String },
    #[error("non-monodromic behaviour from ρ₀ = {rho0:e}: {reason}")]
    NonMonodromic { rho0: f64, reason: String },
    #[error("need at least {needed} ρ₀ samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("return ratios are not monotone beyond noise")]
    NonMonotone { ratios: Vec<(f64, f64)> },
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("integration of the Bautin system failed: {0}")]
    Integration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnStatus {
    Completed,
    Escaped,
    Stalled,
    NonMonodromic,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub atol: f64,
    pub rtol: f64,
    pub trust_radius: f64,
    /// Number of full turns before stopping.
    pub turns: u32,
    /// Keep the dense output of every step.
    pub record: bool,
    pub max_steps: usize,
    /// Rescaled-time budget for one turn.
    pub tau_max: f64,
    /// Angle of the transversal ray used as Poincaré section.
    pub section: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { atol: 1e-12, rtol: 1e-10, trust_radius: 0.5, turns: 1, record: false, max_steps: 500_000, tau_max: 1e14, section: 0.0 }
    }
}

/// One integration from `(φ, ρ) = (φ_s, ρ₀)` until `|φ − φ_s| = 2π·turns`.
///
/// The state is `[φ, ρ, I_1, …, I_m]` where `I_i' = σ D K_i / ρ^r`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rho0: f64,
    pub status: TurnStatus,
    pub detail: Option<String>,
    pub tau: f64,
    pub phi: f64,
    pub rho: f64,
    /// `+1` when the turn ended at `+2π`, `−1` at `−2π`.
    pub winding: f64,
    pub functionals: Vec<f64>,
    pub segments: Vec<DenseSegment>,
    pub steps: usize,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.status == TurnStatus::Completed
    }

    pub fn to_result(&self) -> Result<&Self, FlowError> {
        let reason = || self.detail.clone().unwrap_or_default();
        match self.status {
            TurnStatus::Completed => Ok(self),
            TurnStatus::Escaped => Err(FlowError::Escaped { rho0: self.rho0 }),
            TurnStatus::Stalled => Err(FlowError::Stalled { rho0: self.rho0, reason: reason() }),
            TurnStatus::NonMonodromic => Err(FlowError::NonMonodromic { rho0: self.rho0, reason: reason() }),
        }
    }
}

/// Below this radius a trajectory is taken to have reached the singular circle.
const COLLAPSE_RADIUS: f64 = 1e-280;

pub fn integrate_turn(cyl: &Cylinder, rho0: f64, integrands: &[Monomials], opts: &FlowOptions) -> Trajectory {
    let sweep = 2.0 * PI * opts.turns.max(1) as f64;
    integrate_sweep(cyl, opts.section, rho0, (sweep, sweep), integrands, opts)
}

/// Integrates from `(φ₀, ρ₀)` until φ reaches `φ₀ + ahead` or `φ₀ − behind`.
///
/// The state is `[φ, ln ρ, I_1, …]`; dense-output component 1 is `ln ρ`.
pub fn integrate_sweep(
    cyl: &Cylinder,
    phi0: f64,
    rho0: f64,
    (ahead, behind): (f64, f64),
    integrands: &[Monomials],
    opts: &FlowOptions,
) -> Trajectory {
    let r = cyl.r as i32;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (phi, rho) = (y[0], y[1].exp());
        let (rr, th) = cyl.rhs(phi, rho);
        dy[0] = th;
        dy[1] = rr / rho;
        if !integrands.is_empty() {
            let (x, yy) = cyl.xy(phi, rho);
            let w = cyl.sigma * cyl.d(phi) / rho.powi(r);
            for (k, d) in integrands.iter().zip(dy[2..].iter_mut()) {
                *d = w * k.eval(x, yy);
            }
        }
    };
    let mut y0 = vec![phi0, rho0.ln()];
    y0.resize(2 + integrands.len(), 0.0);
    let solver = Dopri5 { atol: opts.atol, rtol: opts.rtol, max_steps: opts.max_steps, h_max: f64::INFINITY };
    let (log_trust, log_floor) = (opts.trust_radius.ln(), COLLAPSE_RADIUS.ln());
    let mut winding = 0.0;
    let mut reason = None;
    let observe = |seg: &DenseSegment, a: &[f64], b: &[f64]| {
        for (sgn, span) in [(1.0, ahead), (-1.0, behind)] {
            let goal = phi0 + sgn * span;
            if sgn * (a[0] - phi0) < span && sgn * (b[0] - phi0) >= span {
                let t = bisect(|t| seg.component(t, 0) - goal, seg.t0, seg.t0 + seg.h);
                winding = sgn;
                return Control::StopAt(t);
            }
        }
        if b[1] > log_trust {
            return Control::Abort("escaped".into());
        }
        if b[1] < log_floor {
            reason = Some(format!("ρ fell below {COLLAPSE_RADIUS:e} at φ = {:.6}", b[0]));
            return Control::Abort("collapse".into());
        }
        Control::Continue
    };
    let out = solver.solve(rhs, 0.0, &y0, opts.tau_max, opts.record, observe);
    let status = match &out.status {
        OdeStatus::Stopped if out.y[1] > log_trust => TurnStatus::Escaped,
        OdeStatus::Stopped => TurnStatus::Completed,
        OdeStatus::Aborted(m) if m == "escaped" => TurnStatus::Escaped,
        OdeStatus::Aborted(_) => TurnStatus::NonMonodromic,
        OdeStatus::ReachedEnd => {
            reason = Some(format!("rescaled time budget {:e} exhausted at φ = {:.6}", opts.tau_max, out.y[0]));
            TurnStatus::Stalled
        }
        OdeStatus::MaxSteps => {
            reason = Some(format!("step budget exhausted at φ = {:.6}", out.y[0]));
            TurnStatus::Stalled
        }
        OdeStatus::StepUnderflow | OdeStatus::NonFinite => {
            reason = Some(format!("step size underflow at φ = {:.6}, ρ = {:e}", out.y[0], out.y[1].exp()));
            TurnStatus::Stalled
        }
    };
    Trajectory {
        rho0,
        status,
        detail: reason,
        tau: out.t,
        phi: out.y[0],
        rho: out.y[1].exp(),
        winding,
        functionals: out.y[2..].to_vec(),
        segments: out.segments,
        steps: out.steps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnSample {
    pub rho0: f64,
    pub rho1: f64,
    pub difference: f64,
}

pub fn poincare_map(cyl: &Cylinder, rho0: f64, opts: &FlowOptions) -> Result<ReturnSample, FlowError> {
    let t = integrate_turn(cyl, rho0, &[], opts);
    t.to_result()?;
    Ok(ReturnSample { rho0, rho1: t.rho, difference: t.rho - rho0 })
}

/// Half-axis carrying a Poincaré section, measured in its own coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// `φ = 0`, coordinate `x = ρ^p`.
    PositiveX,
    /// `φ = π/2`, coordinate `y = ρ^q`.
    PositiveY,
}

impl Axis {
    fn angle(self) -> f64 {
        match self {
            Axis::PositiveX => 0.0,
            Axis::PositiveY => 0.5 * PI,
        }
    }

    fn exponent(self, cyl: &Cylinder) -> i32 {
        match self {
            Axis::PositiveX => cyl.weight.p as i32,
            Axis::PositiveY => cyl.weight.q as i32,
        }
    }
}

/// Return of the orbit through `(φ, ρ) = (0, ρ₀)` to a half-axis: `(u₀, u₁)` are the
/// axis coordinates of its first two crossings.
pub fn axis_return(cyl: &Cylinder, rho0: f64, axis: Axis, opts: &FlowOptions) -> Result<(f64, f64), FlowError> {
    let k = axis.exponent(cyl);
    let theta = axis.angle();
    let first = if theta == 0.0 {
        rho0
    } else {
        let leg = integrate_sweep(cyl, 0.0, rho0, (theta, 2.0 * PI - theta), &[], opts);
        leg.to_result()?;
        leg.rho
    };
    let mut o = *opts;
    o.section = theta;
    o.turns = 1;
    let turn = integrate_turn(cyl, first, &[], &o);
    turn.to_result().map_err(|e| match e {
        FlowError::Escaped { .. } => FlowError::Escaped { rho0 },
        other => other,
    })?;
    Ok((first.powi(k), turn.rho.powi(k)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Eta1Method {
    /// Fit of forward returns.
    Forward,
    /// Fit of returns of the time-reversed flow, inverted.
    Inverse,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eta1Estimate {
    pub value: f64,
    pub error: f64,
    pub axis: Axis,
    pub method: Eta1Method,
    pub extrapolation: Extrapolation,
    /// `(ρ₀, Π(ρ₀)/ρ₀)` for the map actually sampled.
    pub ratios: Vec<(f64, f64)>,
    /// Starting radii whose turn left the trust radius in the sampled direction.
    pub dropped: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Polynomial least squares in ρ₀.
    Polynomial,
    /// Iterated Δ² on a geometric grid, exact for `η + cρ₀^κ` with unknown κ.
    Aitken,
}

fn is_geometric(samples: &[(f64, f64)]) -> bool {
    let q: Vec<f64> = samples.windows(2).map(|w| w[1].0 / w[0].0).collect();
    q.iter().all(|&r| (r / q[0] - 1.0).abs() < 1e-9)
}

/// Last Δ² value of the sequence, with the change from the previous one as error.
fn aitken(xs: &[f64]) -> Option<(f64, f64)> {
    let acc: Vec<f64> = xs
        .windows(3)
        .map(|w| {
            let (d0, d1) = (w[1] - w[0], w[2] - w[1]);
            let den = d1 - d0;
            if den.abs() <= 1e-14 * w[2].abs() || d1 == 0.0 {
                w[2]
            } else {
                w[2] - d1 * d1 / den
            }
        })
        .collect();
    match acc.as_slice() {
        [] => None,
        [only] => Some((*only, (xs[xs.len() - 1] - only).abs())),
        [.., a, b] => Some((*b, (b - a).abs())),
    }
}

/// Limit of `ratio(ρ₀)` as ρ₀ → 0, its error and the method that produced it.
fn extrapolate(ratios: &[(f64, f64)]) -> (f64, f64, Extrapolation) {
    let deg = if ratios.len() >= 6 { 2 } else { 1 };
    let (c_hi, res) = intercept_fit(ratios, deg);
    let (c_lo, _) = intercept_fit(ratios, deg - 1);
    let poly = (c_hi, (c_hi - c_lo).abs() + res);
    let values: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    match aitken(&values) {
        Some((v, e)) if is_geometric(ratios) && e < poly.1 => (v, e, Extrapolation::Aitken),
        _ => (poly.0, poly.1, Extrapolation::Polynomial),
    }
}

/// Least-squares fit of `ratio = c₀ + c₁ρ₀ + … + c_{deg}ρ₀^{deg}`; returns `c₀` and the RMS residual.
fn intercept_fit(samples: &[(f64, f64)], deg: usize) -> (f64, f64) {
    let n = samples.len();
    let scale = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let a = nalgebra::DMatrix::from_fn(n, deg + 1, |i, j| (samples[i].0 / scale).powi(j as i32));
    let b = nalgebra::DVector::from_iterator(n, samples.iter().map(|s| s.1));
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).expect("SVD solve with U and V");
    let res = (&a * &c - &b).norm() / (n as f64).sqrt();
    (c[0], res)
}

/// Limit of `u₁/u₀` for the return map on `axis`, extrapolated over starting radii `grid`.
pub fn eta1_estimate(cyl: &Cylinder, grid: &[f64], axis: Axis, opts: &FlowOptions) -> Result<Eta1Estimate, FlowError> {
    if grid.len() < 4 {
        return Err(FlowError::InsufficientSamples { needed: 4, got: grid.len() });
    }
    let sample = |c: &Cylinder| -> Vec<Result<(f64, f64), FlowError>> {
        grid.par_iter().map(|&r0| axis_return(c, r0, axis, opts).map(|(u0, u1)| (r0, u1 / u0))).collect()
    };
    let escaped = |v: &[Result<(f64, f64), FlowError>]| v.iter().filter(|s| matches!(s, Err(FlowError::Escaped { .. }))).count();
    let forward = sample(cyl);
    let (method, runs) = if escaped(&forward) == 0 {
        (Eta1Method::Forward, forward)
    } else {
        let inverse = sample(&cyl.reversed());
        if escaped(&inverse) < escaped(&forward) {
            (Eta1Method::Inverse, inverse)
        } else {
            (Eta1Method::Forward, forward)
        }
    };
    let mut ratios = Vec::new();
    let mut dropped = Vec::new();
    for (r0, run) in grid.iter().zip(runs) {
        match run {
            Ok(s) => ratios.push(s),
            Err(FlowError::Escaped { .. }) => dropped.push(*r0),
            Err(e) => return Err(e),
        }
    }
    if ratios.len() < 4 {
        return Err(FlowError::InsufficientSamples { needed: 4, got: ratios.len() });
    }
    let typical = ratios.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let noise = 1e-7 * typical + 10.0 * opts.rtol;
    let diffs: Vec<f64> = ratios.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let up = diffs.iter().any(|&d| d > noise);
    let down = diffs.iter().any(|&d| d < -noise);
    if up && down {
        return Err(FlowError::NonMonotone { ratios });
    }
    let (intercept, err, extrapolation) = extrapolate(&ratios);
    let (value, error) = match method {
        Eta1Method::Forward => (intercept, err),
        Eta1Method::Inverse => (1.0 / intercept, err / (intercept * intercept)),
    };
    Ok(Eta1Estimate { value, error, axis, method, extrapolation, ratios, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::blowup::{polar_components, PolarOptions};
    use crate::diagram::{VectorField, Weight};

    fn linear(lam: (i64, i64)) -> Cylinder {
        let l = rat(lam.0, lam.1);
        let x = VectorField::from_terms(&[(0, 1, rat(-1, 1)), (1, 0, l.clone())], &[(1, 0, rat(1, 1)), (0, 1, l)]).unwrap();
        let ps = polar_components(&x, Weight::new(1, 1).unwrap(), PolarOptions::default()).unwrap();
        Cylinder::new(&ps)
    }

    #[test]
    fn linear_return_map() {
        let cyl = linear((1, 10));
        let s = poincare_map(&cyl, 0.1, &FlowOptions::default()).unwrap();
        let exact = 0.1 * (0.2 * PI).exp();
        assert!((s.rho1 - exact).abs() < 1e-10, "{} vs {exact}", s.rho1);
    }

    #[test]
    fn two_turns_match_composition() {
        let cyl = linear((1, 20));
        let opts = FlowOptions::default();
        let once = poincare_map(&cyl, 0.05, &opts).unwrap().rho1;
        let twice = poincare_map(&cyl, once, &opts).unwrap().rho1;
        let direct = integrate_turn(&cyl, 0.05, &[], &FlowOptions { turns: 2, ..opts });
        assert!((direct.rho - twice).abs() < 1e-11);
    }

    #[test]
    fn escape_and_inverse_fallback() {
        let cyl = linear((1, 2));
        let opts = FlowOptions::default();
        assert!(matches!(poincare_map(&cyl, 0.1, &opts), Err(FlowError::Escaped { .. })));
        let grid = [0.03, 0.02, 0.01, 0.005, 0.002];
        let est = eta1_estimate(&cyl, &grid, Axis::PositiveX, &opts).unwrap();
        assert_eq!(est.method, Eta1Method::Inverse);
        assert!((est.value / PI.exp() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn aitken_recovers_fractional_power_limit() {
        let grid: Vec<f64> = (0..8).map(|k| 0.03 * 0.6f64.powi(k)).collect();
        let samples: Vec<(f64, f64)> = grid.iter().map(|&r| (r, 2.5 + 3.0 * r.powf(0.63))).collect();
        let (v, e, how) = extrapolate(&samples);
        assert_eq!(how, Extrapolation::Aitken);
        assert!((v - 2.5).abs() < 1e-10 && e < 1e-9, "{v} {e}");
    }
}
