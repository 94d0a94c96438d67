//! Poincaré–Lyapunov quantities of Mo-class systems through the recursion for `a_i(φ)`.

use std::f64::consts::PI;

use serde::Serialize;

use super::ode::{Control, DenseSegment, Dopri5, OdeStatus};
use super::{Cylinder, FlowError};
use crate::algebra::quad::integrate;
use crate::blowup::PolarSystem;

/// `a_i(φ)` for `i = 1..=order` with `η_i = a_i(2π)`.
#[derive(Debug, Clone, Serialize)]
pub struct BautinCoefficients {
    pub order: usize,
    pub eta: Vec<f64>,
    #[serde(skip)]
    segments: Vec<DenseSegment>,
}

impl BautinCoefficients {
    /// `a_i(φ)` for `φ ∈ [0, 2π]`, `i ≥ 1`.
    pub fn a(&self, i: usize, phi: f64) -> f64 {
        assert!(i >= 1 && i <= self.order);
        let k = self.segments.partition_point(|s| s.t1() < phi).min(self.segments.len() - 1);
        self.segments[k].component(phi, i - 1)
    }

    pub fn eta(&self, i: usize) -> f64 {
        self.eta[i - 1]
    }

    /// `[φ_k, φ_{k+1}]` intervals on which every `a_i` is a single polynomial piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.segments.iter().map(|s| (s.t0, s.t1()))
    }

    /// Values of `a_i` on `n` equispaced points of `[0, 2π)`.
    pub fn sample(&self, i: usize, n: usize) -> Vec<(f64, f64)> {
        (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).map(|phi| (phi, self.a(i, phi))).collect()
    }
}

fn require_mo(ps: &PolarSystem) -> Result<(), FlowError> {
    match ps.omega.first() {
        Some(c) => Err(FlowError::NotMo { witness: c.angle }),
        None if ps.components[0].g.is_zero() => Err(FlowError::NotMo { witness: 0.0 }),
        None => Ok(()),
    }
}

/// `𝓕_1..𝓕_k` at φ: coefficients of `(Σ F_{r+m} ρ^m)/(Σ G_{r+m} ρ^m)`.
pub(super) fn expansion_basis(cyl: &Cylinder, k: usize, phi: f64) -> Vec<f64> {
    let fg: Vec<(f64, f64)> = (0..k as i64).map(|m| cyl.fg(cyl.r + m, phi)).collect();
    let mut q = vec![0.0; k];
    for m in 0..k {
        let mut num = fg[m].0;
        for l in 1..=m {
            num -= fg[l].1 * q[m - l];
        }
        q[m] = num / fg[0].1;
    }
    q
}

/// Coefficients of `(Σ_{n≥1} a_n x^n)^i` up to `x^k`, for `i = 1..=k`.
fn powers(a: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut base = vec![0.0; k + 1];
    base[1..=k].copy_from_slice(&a[..k]);
    let mut out = vec![base.clone()];
    for _ in 1..k {
        let prev = out.last().unwrap();
        let mut next = vec![0.0; k + 1];
        for (u, pu) in prev.iter().enumerate() {
            if *pu == 0.0 {
                continue;
            }
            for v in 1..=k - u.min(k) {
                if u + v <= k {
                    next[u + v] += pu * base[v];
                }
            }
        }
        out.push(next);
    }
    out
}

pub fn bautin_coefficients(ps: &PolarSystem, k: usize, atol: f64, rtol: f64) -> Result<BautinCoefficients, FlowError> {
    require_mo(ps)?;
    let cyl = Cylinder::with_sign(ps, 1.0);
    let rhs = |phi: f64, a: &[f64], da: &mut [f64]| {
        let f = expansion_basis(&cyl, k, phi);
        let pw = powers(a, k);
        for n in 1..=k {
            da[n - 1] = (1..=n).map(|i| f[i - 1] * pw[i - 1][n]).sum();
        }
    };
    let mut a0 = vec![0.0; k];
    a0[0] = 1.0;
    let solver = Dopri5 { atol, rtol, max_steps: 1_000_000, h_max: 0.05 };
    let out = solver.solve(rhs, 0.0, &a0, 2.0 * PI, true, |_, _, _| Control::Continue);
    if out.status != OdeStatus::ReachedEnd {
        return Err(FlowError::Integration(format!("{:?} at φ = {}", out.status, out.t)));
    }
    Ok(BautinCoefficients { order: k, eta: out.y, segments: out.segments })
}

/// `exp ∫₀^{2π} F_r/G_r dφ`.
pub fn a1_closed_quadrature(ps: &PolarSystem) -> Result<f64, FlowError> {
    require_mo(ps)?;
    let cyl = Cylinder::with_sign(ps, 1.0);
    let q = integrate(
        |phi| {
            let (f, g) = cyl.fg(cyl.r, phi);
            f / g
        },
        0.0,
        2.0 * PI,
        1e-14,
        1e-13,
        2000,
    )?;
    Ok(q.value.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_powers() {
        let p = powers(&[1.0, 2.0, 3.0], 3);
        assert_eq!(p[0], vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(p[1], vec![0.0, 0.0, 1.0, 4.0]);
        assert_eq!(p[2], vec![0.0, 0.0, 0.0, 1.0]);
    }
}
