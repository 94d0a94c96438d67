//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (estimate {value}, error {error:e})")]
    NotConverged { value: f64, error: f64, subdivisions: usize },
    #[error("integrand returned a non-finite value at {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(c));
    }
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(c - x));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(c + x));
        }
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((kron * h, ((kron - gauss) * h).abs()))
}

/// Single (7, 15) panel over `[a, b]`: `(Kronrod value, |Kronrod − Gauss|)`.
pub fn gauss_kronrod(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    kronrod(&mut f, a, b)
}

/// `∫_a^b f` to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Quadrature, QuadError> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (v, e) = kronrod(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    let mut subdivisions = 0;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if subdivisions >= max_subdivisions {
            return Err(QuadError::NotConverged { value: total, error: err, subdivisions });
        }
        let seg = heap.pop().expect("heap holds every segment");
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a.min(seg.b) || m >= seg.a.max(seg.b) {
            heap.push(seg);
            return Err(QuadError::NotConverged { value: total, error: err, subdivisions });
        }
        let (v1, e1) = kronrod(&mut f, seg.a, m)?;
        let (v2, e2) = kronrod(&mut f, m, seg.b)?;
        evaluations += 30;
        subdivisions += 1;
        heap.push(Segment { a: seg.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, error: e2 });
        total = heap.iter().map(|s| s.value).sum();
        err = heap.iter().map(|s| s.error).sum();
    }
    Ok(Quadrature { value: total, error: err, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn smooth_periodic() {
        let q = integrate(|t| 4.0 / (5.0 + 3.0 * (2.0 * t).cos()), 0.0, 2.0 * PI, 1e-13, 1e-13, 1000).unwrap();
        assert!((q.value - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let q = integrate(|t: f64| 1.0 / t.sqrt(), 0.0, 1.0, 1e-10, 1e-10, 2000).unwrap();
        assert!((q.value - 2.0).abs() < 1e-8);
    }
}
