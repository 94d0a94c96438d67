//! Polynomial root finding (Aberth–Ehrlich iteration with Newton polishing).

use num_complex::Complex64;

/// All complex roots of `Σ coeffs[k] zᵏ`, with multiplicity.
///
/// Leading zeros of the coefficient list are ignored; roots at the origin are
/// reported exactly.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|v| *v == Complex64::new(0.0, 0.0)) {
        c.pop();
    }
    let zeros = c.iter().take_while(|v| **v == Complex64::new(0.0, 0.0)).count();
    let c = &c[zeros..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if c.len() <= 1 {
        return roots;
    }
    let n = c.len() - 1;
    if n == 1 {
        roots.push(-c[0] / c[1]);
        return roots;
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|v| v / lead).collect();
    let deriv: Vec<Complex64> = (1..=n).map(|k| monic[k] * k as f64).collect();

    // Initial guesses on a circle of radius (|a₀|)^{1/n}, which is the geometric mean of |roots|.
    let radius = monic[0].norm().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..500 {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let p = horner(&monic, z[k]);
            let dp = horner(&deriv, z[k]);
            if p.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * z[k].norm().max(1e-300) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let p = horner(&monic, *zk);
            let dp = horner(&deriv, *zk);
            let step = p / dp;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            let cand = *zk - step;
            if horner(&monic, cand).norm() < p.norm() {
                *zk = cand;
            } else {
                break;
            }
        }
    }
    roots.extend(z);
    roots
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, v| acc * z + v)
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots() {
        let r = polynomial_roots(&[Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(r.len(), 2);
        for z in r {
            assert!((z.norm() - 2f64.sqrt()).abs() < 1e-14);
            assert!(z.re.abs() < 1e-14);
        }
    }

    #[test]
    fn roots_with_zero() {
        // z (z − 1)(z − 2)(z − 3)
        let c = [0.0, -6.0, 11.0, -6.0, 1.0].map(|v| Complex64::new(v, 0.0));
        let mut r: Vec<f64> = polynomial_roots(&c).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (got, want) in r.iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
