//! Principal values by symmetric excision, `ε_k = 2^{−k} ε₀`, extrapolated to `ε → 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{khat_on, lifted_angles, CofactorError};
use crate::algebra::quad::integrate;
use crate::algebra::{bisect, circle_roots, ComplexRational, FourierPoly};
use crate::blowup::PolarSystem;
use crate::flow::ode::DenseSegment;
use crate::flow::{Cylinder, Monomials, Trajectory};

/// Number of excision radii.
pub const PV_STEPS: usize = 9;
const QUAD_TOL: f64 = 1e-10;

/// Richardson extrapolation of values at `ε, ε/2, ε/4, …` whose error expands in odd powers of ε.
/// Returns the estimate and the difference between the two best entries.
pub fn richardson_odd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mut table = vec![values.to_vec()];
    for j in 1..n.min(5) {
        let prev = &table[j - 1];
        let f = 2f64.powi(2 * j as i32 - 1);
        let next: Vec<f64> = (1..prev.len()).map(|i| prev[i] + (prev[i] - prev[i - 1]) / (f - 1.0)).collect();
        table.push(next);
    }
    let mut best = (values[n - 1], (values[n - 1] - values[n.saturating_sub(2)]).abs());
    for col in &table {
        if col.len() >= 2 {
            let (a, b) = (col[col.len() - 1], col[col.len() - 2]);
            if (a - b).abs() < best.1 {
                best = (a, (a - b).abs());
            }
        }
    }
    best
}

/// `∫` over `[0, 2π]` minus the windows `(c − ε, c + ε)` taken modulo 2π.
fn excised_integral(f: &impl Fn(f64) -> f64, centers: &[f64], eps: f64) -> Result<f64, CofactorError> {
    let tau = 2.0 * PI;
    let mut cut: Vec<(f64, f64)> = Vec::new();
    for &c in centers {
        let (a, b) = (c - eps, c + eps);
        cut.push((a.max(0.0), b.min(tau)));
        if a < 0.0 {
            cut.push((tau + a, tau));
        }
        if b > tau {
            cut.push((0.0, b - tau));
        }
    }
    cut.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut at = 0.0;
    for (a, b) in cut {
        if a > at {
            total += integrate(f, at, a, QUAD_TOL, QUAD_TOL, 20_000)?.value;
        }
        at = f64::max(at, b);
    }
    if at < tau {
        total += integrate(f, at, tau, QUAD_TOL, QUAD_TOL, 20_000)?.value;
    }
    Ok(total)
}

/// A quarter of the smallest circular gap between centres, at most 0.4.
fn initial_eps(centers: &[f64]) -> f64 {
    let mut gap: f64 = 0.4;
    for w in centers.windows(2) {
        gap = gap.min(0.25 * (w[1] - w[0]));
    }
    if let (Some(first), Some(last)) = (centers.first(), centers.last()) {
        if centers.len() > 1 {
            gap = gap.min(0.25 * (first + 2.0 * PI - last));
        }
    }
    gap.max(1e-6)
}

fn pv_sequence(f: &impl Fn(f64) -> f64, centers: &[f64], eps0: f64) -> Result<Vec<(f64, f64)>, CofactorError> {
    (0..PV_STEPS)
        .map(|k| {
            let eps = eps0 * 0.5f64.powi(k as i32);
            excised_integral(f, centers, eps).map(|v| (eps, v))
        })
        .collect()
}

/// `ρ` on the recorded trajectory at angle φ.
fn rho_at(segments: &[DenseSegment], phi: f64) -> f64 {
    let k = segments.partition_point(|s| s.end(0) < phi).min(segments.len() - 1);
    let s = &segments[k];
    let (a, b) = (s.start(0), s.end(0));
    let t = if phi <= a {
        s.t0
    } else if phi >= b {
        s.t1()
    } else {
        bisect(|t| s.component(t, 0) - phi, s.t0, s.t1())
    };
    s.component(t, 1).exp()
}

/// φ-domain PV of `K̂` along a recorded turn, excising at the lifts of `Ω` and at sign
/// changes of Θ along the trajectory.
pub(super) fn trajectory_pv(cyl: &Cylinder, k: &Monomials, t: &Trajectory, omega: &[f64]) -> Result<(f64, f64), CofactorError> {
    let segs = &t.segments;
    let theta = |phi: f64| cyl.sigma * cyl.rhs(phi, rho_at(segs, phi)).1;
    let wrap = |phi: f64| phi.rem_euclid(2.0 * PI);
    let reach = initial_eps(&lifted_angles(omega));
    // The dips of Θ sit at trajectory-dependent angles near Ω.
    let mut centers: Vec<f64> = lifted_angles(omega).into_iter().map(|c| wrap(dip_minimum(&|p| theta(wrap(p)).abs(), c, reach))).collect();
    for s in segs {
        let (a, b) = (s.start(0), s.end(0));
        if b > a && theta(a).signum() != theta(b).signum() {
            let c = bisect(theta, a, b);
            if cyl.rhs(c, rho_at(segs, c)).0.abs() < 1e-12 {
                return Err(CofactorError::TangentialCrossing(c));
            }
            centers.push(c);
        }
    }
    centers.sort_by(f64::total_cmp);
    centers.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let f = |phi: f64| khat_on(cyl, k, phi, rho_at(segs, phi)).unwrap_or(f64::NAN);
    if centers.is_empty() {
        let q = integrate(f, 0.0, 2.0 * PI, QUAD_TOL, QUAD_TOL, 20_000)?;
        return Ok((q.value, q.error));
    }
    let eps0 = centers
        .iter()
        .map(|&c| {
            // Half-width of the dip of Θ along the trajectory around c.
            let floor = theta(c).abs();
            let mut d = 0.4;
            while d > 1e-14 && theta(wrap(c - d)).abs().max(theta(wrap(c + d)).abs()) > 4.0 * floor {
                d *= 0.5;
            }
            0.25 * d
        })
        .fold(initial_eps(&centers), f64::min);
    let seq = pv_sequence(&f, &centers, eps0)?;
    let (v, e) = richardson_odd(&seq.iter().map(|s| s.1).collect::<Vec<_>>());
    if !v.is_finite() {
        return Err(CofactorError::PvDivergent(seq));
    }
    Ok((v, e))
}

/// Minimiser of `g` on `[c − h, c + h]`: grid scan, then golden section.
fn dip_minimum(g: &impl Fn(f64) -> f64, c: f64, h: f64) -> f64 {
    let n = 400;
    let (mut best, mut at) = (g(c), c);
    for i in 0..=n {
        let p = c - h + 2.0 * h * i as f64 / n as f64;
        let v = g(p);
        if v < best {
            best = v;
            at = p;
        }
    }
    let step = 2.0 * h / n as f64;
    let (mut a, mut b) = (at - step, at + step);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (x1, x2) = (b - r * (b - a), a + r * (b - a));
        if g(x1) < g(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    0.5 * (a + b)
}

/// `ξ(2π) = PV ∫₀^{2π} F_r/G_r dφ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiValue {
    pub value: Option<f64>,
    pub error: f64,
    pub exists: bool,
    /// Degree in `z = e^{iφ}` of the common factor removed from `F_r` and `G_r`.
    pub cancelled_degree: usize,
    /// Poles left on the circle after cancellation.
    pub poles: Vec<f64>,
    /// `(ε, value)` excision sequence.
    pub sequence: Vec<(f64, f64)>,
}

pub fn pv_xi(ps: &PolarSystem) -> Result<XiValue, CofactorError> {
    let f = &ps.components[0].f;
    let g = &ps.components[0].g;
    if g.is_zero() {
        return Err(CofactorError::NotMo);
    }
    let (pf, nf) = f.to_z_poly();
    let (pg, ng) = g.to_z_poly();
    let common = if pf.is_zero() { pg.clone() } else { pf.gcd(&pg) };
    let num = pf.div_rem(&common).0;
    let den = pg.div_rem(&common).0;
    let shift = ng as i32 - nf as i32;
    let (num_c, den_c) = (num.to_c64(), den.to_c64());
    let ratio = move |phi: f64| {
        let z = Complex64::from_polar(1.0, phi);
        let v = horner(&num_c, z) / horner(&den_c, z) * z.powi(shift);
        v.re
    };
    let den_fourier: FourierPoly<ComplexRational> = FourierPoly::from_pairs(
        den.coeffs().iter().enumerate().map(|(k, c)| (k as i64, c.clone())),
    );
    let poles = if den.degree().unwrap_or(0) == 0 { Vec::new() } else { circle_roots(&den_fourier, 1e-8).unwrap_or_default() };
    let cancelled_degree = common.degree().unwrap_or(0);
    let pole_angles: Vec<f64> = poles.iter().map(|c| c.angle).collect();
    if poles.is_empty() {
        let q = integrate(ratio, 0.0, 2.0 * PI, 1e-13, 1e-13, 20_000)?;
        return Ok(XiValue { value: Some(q.value), error: q.error, exists: true, cancelled_degree, poles: Vec::new(), sequence: Vec::new() });
    }
    let seq = pv_sequence(&ratio, &pole_angles, initial_eps(&pole_angles))?;
    let exists = poles.iter().all(|c| c.multiplicity == 1);
    let (v, e) = richardson_odd(&seq.iter().map(|s| s.1).collect::<Vec<_>>());
    Ok(XiValue {
        value: if exists && v.is_finite() { Some(v) } else { None },
        error: e,
        exists,
        cancelled_degree,
        poles: poles.iter().map(|c| c.angle).collect(),
        sequence: seq,
    })
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_odd_powers() {
        let vals: Vec<f64> = (0..PV_STEPS).map(|k| 0.1 * 0.5f64.powi(k as i32)).map(|e| 3.0 + 2.0 * e - 7.0 * e.powi(3) + e.powi(5)).collect();
        let (v, err) = richardson_odd(&vals);
        assert!((v - 3.0).abs() < 1e-13 && err < 1e-12, "{v} {err}");
    }

    #[test]
    fn simple_pole_principal_value() {
        let f = |phi: f64| (2.0 + phi.sin()) / (phi - 1.0);
        let seq = pv_sequence(&f, &[1.0], 0.2).unwrap();
        let (v, _) = richardson_odd(&seq.iter().map(|s| s.1).collect::<Vec<_>>());
        let exact = integrate(|t: f64| if t == 1.0 { 0.0 } else { (t.sin() - 1f64.sin()) / (t - 1.0) }, 0.0, 2.0 * PI, 1e-14, 1e-14, 1000).unwrap().value
            + (2.0 + 1f64.sin()) * ((2.0 * PI - 1.0) / 1.0f64).ln();
        assert!((v - exact).abs() < 1e-9, "{v} {exact}");
    }
}
