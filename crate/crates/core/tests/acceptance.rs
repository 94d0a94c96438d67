//! Acceptance suite: one PASS/FAIL line per criterion, each within its time budget.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use centerfocus_core::algebra::quad::integrate;
use centerfocus_core::algebra::{BiPoly, Rational, UniPoly};
use centerfocus_core::blowup::{polar_components, PolarOptions, PolarSystem};
use centerfocus_core::branches::{combine_curves, find_curves, fuchs_index, q_polynomial, CurveCandidate, Cofactor};
use centerfocus_core::classify::{analyze, corpus_names, corpus_system, AnalysisReport, Rho0Grid, SystemFile, VerdictKind};
use centerfocus_core::cofactor::{beta_fit, beta_quadrature, integral_k, pv_xi, IntegralMethod};
use centerfocus_core::diagram::{inverse_integrating_factor, newton_diagram, qh_decompose, VectorField, Weight};
use centerfocus_core::flow::{bautin_coefficients, eta1_estimate, Axis, Cylinder, FlowOptions};

type Outcome = Result<String, String>;

fn sys(name: &str, params: &[(&str, &str)]) -> SystemFile {
    corpus_system(name).unwrap().unwrap().with_params(params.iter().copied()).unwrap()
}

fn field(name: &str, params: &[(&str, &str)]) -> VectorField {
    sys(name, params).field().unwrap()
}

fn w(p: u32, q: u32) -> Weight {
    Weight::new(p, q).unwrap()
}

fn polar(x: &VectorField, wt: Weight) -> PolarSystem {
    polar_components(x, wt, PolarOptions::default()).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rat(s: &str) -> Rational {
    s.parse().unwrap()
}

fn leading_degree(x: &VectorField, wt: Weight) -> i64 {
    newton_diagram(x).unwrap().edge_for(wt).expect("edge weight").leading_degree
}

fn q_poly(x: &VectorField, wt: Weight) -> UniPoly<Rational> {
    q_polynomial(qh_decompose(x, wt).leading(), wt, leading_degree(x, wt)).unwrap().poly
}

fn q_roots(x: &VectorField, wt: Weight) -> Vec<Complex64> {
    q_polynomial(qh_decompose(x, wt).leading(), wt, leading_degree(x, wt))
        .unwrap()
        .roots()
        .into_iter()
        .flat_map(|(z, m)| std::iter::repeat(z).take(m))
        .collect()
}

/// Both root multisets agree to `tol` (greedy matching).
fn same_roots(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|z| {
        let hit = (0..b.len()).find(|&k| !used[k] && (b[k] - z).norm() < tol);
        hit.map(|k| used[k] = true).is_some()
    })
}

/// Roots of `c + b·t + a·t²` by the quadratic formula.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    let d = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    vec![(-b + d) / (2.0 * a), (-b - d) / (2.0 * a)]
}

fn fuchs_all(x: &VectorField, wt: Weight) -> Vec<Complex64> {
    let dec = qh_decompose(x, wt);
    q_roots(x, wt).into_iter().map(|z| fuchs_index(dec.leading(), wt, z).index.expect("nondegenerate index")).collect()
}

fn curve_and_cofactor(x: &VectorField, wt: Weight, order: usize) -> (CurveCandidate, Cofactor) {
    let r = leading_degree(x, wt);
    let search = find_curves(x, qh_decompose(x, wt).leading(), wt, r, order).unwrap();
    let parts: Vec<_> = search.curves.iter().map(|(c, k)| (c, k, 1u32)).collect();
    combine_curves(&parts).unwrap()
}

/// Periodic trapezoid rule, spectrally accurate for smooth periodic integrands.
fn periodic_mean(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).sum::<f64>() / n as f64
}

fn eta1(x: &VectorField, wt: Weight, min: f64, max: f64) -> Result<f64, String> {
    let ps = polar(x, wt);
    let grid = Rho0Grid { min, max, count: 8 }.points();
    eta1_estimate(&Cylinder::new(&ps), &grid, Axis::PositiveY, &FlowOptions::default()).map(|e| e.value).map_err(|e| e.to_string())
}

fn criterion_1() -> Outcome {
    let arm = newton_diagram(&field("armengol", &[])).unwrap();
    ensure(arm.vertices == vec![(0, 4), (2, 2), (6, 0)], format!("Armengol vertices {:?}", arm.vertices))?;
    ensure(arm.weights() == vec![w(1, 1), w(1, 2)], format!("Armengol weights {:?}", arm.weights()))?;
    let man = newton_diagram(&field("manosa1", &[])).unwrap();
    let got: Vec<(Weight, i64)> = man.edges.iter().map(|e| (e.weight, e.leading_degree)).collect();
    ensure(got == vec![(w(1, 1), 2), (w(1, 3), 4)], format!("Mañosa I edges {got:?}"))?;
    let and = newton_diagram(&field("andreev", &[])).unwrap();
    let got: Vec<(Weight, i64)> = and.edges.iter().map(|e| (e.weight, e.leading_degree)).collect();
    ensure(got == vec![(w(1, 2), 1)], format!("Andreev edges {got:?}"))?;
    Ok("Armengol, Mañosa I and Andreev diagrams exact".into())
}

fn criterion_2() -> Outcome {
    let check = |label: &str, x: &VectorField, wt: Weight, expected: UniPoly<Rational>, roots: Vec<Complex64>| -> Result<(), String> {
        let q = q_poly(x, wt);
        ensure(q.monic() == expected.monic(), format!("{label}: 𝒬 = {:?}", q.coeffs()))?;
        ensure(same_roots(&q_roots(x, wt), &roots, 1e-9), format!("{label}: roots differ from {roots:?}"))
    };
    let up = |c: &[&str]| UniPoly::new(c.iter().map(|s| rat(s)).collect());
    // Andreev: 1 + 2η², roots ±i/√2.
    let i2 = Complex64::new(0.0, 1.0 / 2f64.sqrt());
    check("Andreev", &field("andreev", &[]), w(1, 2), up(&["1", "0", "2"]), vec![i2, -i2])?;
    // Algaba: 1 + 6aη² + 3η⁴/2 at a = 1/5; η² solves the quadratic in η².
    let a = 0.2;
    let sq: Vec<Complex64> = quadratic_roots(1.5, 6.0 * a, 1.0).into_iter().flat_map(|u| [u.sqrt(), -u.sqrt()]).collect();
    check("Algaba", &field("algaba", &[("a", "1/5")]), w(2, 3), up(&["1", "0", "6/5", "0", "3/2"]), sq)?;
    // Quasihomogeneous: −C + (3A − D)η + 3Bη².
    for (aa, bb, cc, dd) in [(1, 1, -4, -3), (2, 1, -5, 1), (-1, 2, -3, 0)] {
        let (s_a, s_b, s_c, s_d) = (aa.to_string(), bb.to_string(), cc.to_string(), dd.to_string());
        let x = field("quasihomogeneous", &[("A", &s_a), ("B", &s_b), ("C", &s_c), ("D", &s_d)]);
        let expected = up(&[&(-cc).to_string(), &(3 * aa - dd).to_string(), &(3 * bb).to_string()]);
        let roots = quadratic_roots(3.0 * bb as f64, (3 * aa - dd) as f64, -cc as f64);
        check(&format!("quasihomogeneous ({aa},{bb},{cc},{dd})"), &x, w(1, 3), expected, roots)?;
    }
    // Mañosa II: roots of 9 − 3aη + η².
    let a = 1.0;
    check("Mañosa II", &field("manosa2", &[("a", "1")]), w(1, 3), up(&["9", "-3", "1"]), quadratic_roots(1.0, -3.0 * a, 9.0))?;
    Ok("Andreev, Algaba, quasihomogeneous and Mañosa II 𝒬 match".into())
}

fn criterion_3() -> Outcome {
    let and = fuchs_all(&field("andreev", &[]), w(1, 2));
    ensure(and.iter().all(|j| *j == Complex64::new(-4.0, 0.0)), format!("Andreev j* = {and:?}"))?;
    let a = Complex64::new(1.0, 0.0);
    let d = (a * a - 4.0).sqrt();
    let expected = 6.0 * d / (5.0 * a + 3.0 * d);
    let man = fuchs_all(&field("manosa2", &[("a", "1")]), w(1, 3));
    let err = man.iter().map(|j| (j - expected).norm().min((j - expected.conj()).norm())).fold(0.0, f64::max);
    ensure(!man.is_empty() && err < 1e-10, format!("Mañosa II j* = {man:?}, expected {expected}"))?;
    let ult = fuchs_all(&field("ultimo", &[]), w(1, 2));
    ensure(!ult.is_empty() && ult.iter().all(|j| (j - Complex64::new(-2.0, 0.0)).norm() < 1e-12), format!("ultimo j* = {ult:?}"))?;
    Ok(format!("Andreev −4, Mañosa II |Δj*| = {err:.1e}, ultimo −2"))
}

fn criterion_4() -> Outcome {
    let a = 0.2;
    let (f, k) = curve_and_cofactor(&field("algaba", &[("a", "1/5")]), w(2, 3), 20);
    let scale = f.f.coeff(0, 4);
    let expected_f = [((6, 0), 2.0 / 3.0), ((3, 2), 4.0 * a), ((0, 4), 1.0)];
    let mut err: f64 = 0.0;
    for ((i, j), c) in f.f.terms() {
        let e = expected_f.iter().find(|t| t.0 == (i, j)).map_or(0.0, |t| t.1);
        err = err.max((c / scale - e).abs());
    }
    for ((i, j), e) in expected_f {
        err = err.max((f.f.coeff(i, j) / scale - e).abs());
    }
    ensure(err < 1e-9, format!("Algaba F₁₂ coefficient error {err:.2e}"))?;
    // K is invariant under scaling F; K₈ = 12x(αx³ + βy²) with α = β = 1.
    let expected_k = [((4, 0), 12.0), ((1, 2), 12.0)];
    let mut kerr: f64 = 0.0;
    for ((i, j), c) in k.k.terms() {
        let e = expected_k.iter().find(|t| t.0 == (i, j)).map_or(0.0, |t| t.1);
        kerr = kerr.max((c - e).abs());
    }
    for ((i, j), e) in expected_k {
        kerr = kerr.max((k.k.coeff(i, j) - e).abs());
    }
    ensure(kerr < 1e-9 && k.r_bar == Some(8) && f.s == 12, format!("Algaba K₈ error {kerr:.2e}, r̄ = {:?}, s = {}", k.r_bar, f.s))?;

    // Quasihomogeneous: F₆ = y² + (A/B − D/(3B))x³y − (C/(3B))x⁶, K = (3A + D)x², exact.
    let (aa, bb, cc, dd) = ("1", "1", "-4", "-2");
    let x = field("quasihomogeneous", &[("A", aa), ("B", bb), ("C", cc), ("D", dd)]);
    let (f, k) = curve_and_cofactor(&x, w(1, 3), 20);
    let fe = f.f_exact.as_ref().ok_or("quasihomogeneous F not exact")?;
    let (a, b, c, d) = (rat(aa), rat(bb), rat(cc), rat(dd));
    let three = rat("3");
    let expected = BiPoly::from_terms([
        ((0, 2), rat("1")),
        ((3, 1), &a / &b - &d / (&three * &b)),
        ((6, 0), -(&c / (&three * &b))),
    ]);
    let lead = fe.coeff(0, 2);
    ensure(fe.scale(&(rat("1") / lead)) == expected, format!("F₆ = {fe}"))?;
    let ke = k.k_exact.as_ref().ok_or("quasihomogeneous K not exact")?;
    ensure(*ke == BiPoly::monomial(2, 0, &three * &a + &d), format!("K = {ke}"))?;
    Ok(format!("Algaba F₁₂ error {err:.1e}, K₈ error {kerr:.1e}; quasihomogeneous F₆, K exact"))
}

fn criterion_5() -> Outcome {
    let opts = FlowOptions::default();
    let a1_check = |label: &str, ps: &PolarSystem, oracle: &dyn Fn(f64) -> f64| -> Result<(f64, f64), String> {
        let b = bautin_coefficients(ps, 2, opts.atol, opts.rtol).map_err(|e| e.to_string())?;
        let err = (0..256)
            .map(|k| 2.0 * PI * k as f64 / 256.0)
            .map(|phi| (b.a(1, phi) - oracle(phi)).abs())
            .fold(0.0, f64::max);
        ensure(err < 1e-8, format!("{label}: max |a₁ − closed form| = {err:.2e}"))?;
        ensure((b.eta(1) - 1.0).abs() < 1e-9, format!("{label}: η₁ = {}", b.eta(1)))?;
        Ok((err, (b.eta(1) - 1.0).abs()))
    };
    let andreev = |phi: f64| 2f64.powf(0.75) / (11.0 - 4.0 * (2.0 * phi).cos() + (4.0 * phi).cos()).powf(0.25);
    let (e1, d1) = a1_check("Andreev", &polar(&field("andreev", &[]), w(1, 2)), &andreev)?;
    let mut worst = (e1, d1);
    for (s, a) in [("1/5", 0.2), ("0", 0.0), ("-1/4", -0.25)] {
        let g7 = move |phi: f64| {
            let (c, sn) = (phi.cos(), phi.sin());
            -(2.0 * c.powi(6) + 12.0 * a * c.powi(3) * sn * sn + 3.0 * sn.powi(4))
        };
        let algaba = move |phi: f64| 2f64.powf(1.0 / 12.0) / (-g7(phi)).powf(1.0 / 12.0);
        let (e, d) = a1_check(&format!("Algaba a = {s}"), &polar(&field("algaba", &[("a", s)]), w(2, 3)), &algaba)?;
        worst = (worst.0.max(e), worst.1.max(d));
    }
    Ok(format!("max a₁ error {:.1e}, max |η₁ − 1| {:.1e}", worst.0, worst.1))
}

fn manosa1_eta1(a: f64) -> f64 {
    let delta = 32.0 - (1.0 + 3.0 * a).powi(2);
    (PI + 4.0 * PI * a / delta.sqrt()).exp()
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    for (s, a) in [("0", 0.0), ("1", 1.0), ("-31/25", -31.0 / 25.0)] {
        let v = eta1(&field("manosa1", &[("a", s)]), w(1, 3), 1e-3, 3e-2)?;
        let expected = manosa1_eta1(a);
        let rel = (v / expected - 1.0).abs();
        ensure(rel < 1e-3, format!("Mañosa I a = {s}: η₁ = {v}, expected {expected}"))?;
        parts.push(format!("a={s}: {rel:.1e}"));
    }
    if (manosa1_eta1(-31.0 / 25.0) - 1.0).abs() > 1e-12 {
        return Err("closed form does not give η₁ = 1 at a = −31/25".into());
    }
    // Turns from ρ₀ ≳ 10⁻⁴ pass outside the trust radius; the grid sits where every turn completes.
    let v = eta1(&field("manosa2", &[("a", "1")]), w(1, 3), 1e-3 / 27000.0, 1e-1 / 27000.0)?;
    let expected = (10.0 * PI / (9.0 * 3f64.sqrt())).exp();
    let rel2 = (v / expected - 1.0).abs();
    ensure(rel2 < 1e-3, format!("Mañosa II: η₁ = {v}, expected {expected}"))?;
    let v = eta1(&field("armengol", &[("a", "1"), ("b", "1")]), w(1, 2), 1e-3 / 27000.0, 1e-1 / 27000.0)?;
    let expected = (2.0 * PI * 3f64.sqrt() / 3.0).exp();
    let rel3 = (v / expected - 1.0).abs();
    ensure(rel3 < 1e-2, format!("Armengol: η₁ = {v}, expected {expected}"))?;
    Ok(format!("Mañosa I relative errors [{}], Mañosa II {rel2:.1e}, Armengol {rel3:.1e}", parts.join(", ")))
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in ["0", "1", "-1/2", "1/3"] {
        let xi = pv_xi(&polar(&field("manosa1", &[("a", s)]), w(1, 1))).map_err(|e| e.to_string())?;
        let v = xi.value.ok_or(format!("ξ₁₁ does not exist at a = {s}"))?;
        worst = worst.max((v - PI).abs());
    }
    ensure(worst < 1e-8, format!("max |ξ₁₁ − π| = {worst:.2e}"))?;
    let eta = eta1(&field("manosa1", &[("a", "1")]), w(1, 3), 1e-3, 3e-2)?;
    let e2pi = (2.0 * PI).exp();
    ensure((eta / e2pi - 1.0).abs() < 1e-3, format!("η₁ = {eta}, expected e^(2π) = {e2pi}"))?;
    let gap = (PI.exp() - eta).abs();
    ensure(gap > 100.0, format!("|exp(ξ) − η₁| = {gap}"))?;
    Ok(format!("max |ξ₁₁ − π| = {worst:.1e}; η₁(a=1) = {eta:.4}; |exp(ξ) − η₁| = {gap:.1}"))
}

fn criterion_8() -> Outcome {
    let q = integrate(|phi| 4.0 / (5.0 + 3.0 * (2.0 * phi).cos()), 0.0, 2.0 * PI, 1e-13, 1e-13, 1000).map_err(|e| e.to_string())?;
    let err = (q.value - 2.0 * PI).abs();
    ensure(err < 1e-10, format!("∫ = {}, error {err:.2e}", q.value))?;
    Ok(format!("error {err:.1e}"))
}

fn center_focus_report(s: &SystemFile) -> AnalysisReport {
    let mut cfg = s.config().unwrap();
    cfg.rho0_grid = Rho0Grid { min: 1e-3, max: 5e-2, count: 8 };
    analyze(s, &cfg).unwrap()
}

fn criterion_9() -> Outcome {
    let centers: Vec<(&str, SystemFile)> = vec![
        ("linear λ = 0", sys("linear", &[("lam", "0")])),
        ("quasihomogeneous 3A + D = 0", sys("quasihomogeneous", &[("A", "1"), ("B", "1"), ("C", "-4"), ("D", "-3")])),
        ("Andreev P = B + 3L = (A + κ)L = 0", sys("andreev", &[])),
        ("Algaba Hamiltonian (1/5, 0, 0)", sys("algaba", &[("a", "1/5"), ("alpha", "0"), ("beta", "0")])),
        ("DCCD μ = A = 0", sys("dccd", &[("mu", "0"), ("A", "0")])),
        ("quasihomogeneous (1,2,−3,−3)", sys("quasihomogeneous", &[("A", "1"), ("B", "2"), ("C", "-3"), ("D", "-3")])),
    ];
    let foci: Vec<(&str, SystemFile)> = vec![
        ("linear λ = 1/10", sys("linear", &[("lam", "1/10")])),
        ("quasihomogeneous D = −2", sys("quasihomogeneous", &[("D", "-2")])),
        ("Andreev P = 1", sys("andreev", &[("P", "1")])),
        ("Algaba (1/5, 1, 1)", sys("algaba", &[])),
        ("DCCD μ = 1/10", sys("dccd", &[("mu", "1/10")])),
        // Mañosa I is left out: with η₁ ≈ 535 a turn from ρ₀ = 0.05 leaves the trust radius.
        ("Andreev P = −1/2", sys("andreev", &[("P", "-1/2")])),
    ];
    let mut worst_i: f64 = 0.0;
    let mut worst_ret: f64 = 0.0;
    for (label, s) in &centers {
        let r = center_focus_report(s);
        let rows: Vec<_> = r.weights.iter().flat_map(|w| &w.integrals).collect();
        ensure(!rows.is_empty(), format!("{label}: no integral samples"))?;
        for row in rows {
            let v = row.time_domain.ok_or(format!("{label}: integral failed at ρ₀ = {}", row.rho0))?;
            worst_i = worst_i.max(v.abs());
        }
        ensure(!r.returns.is_empty(), format!("{label}: no return samples"))?;
        for row in &r.returns {
            let d = row.difference.ok_or(format!("{label}: return failed at ρ₀ = {}", row.rho0))?;
            worst_ret = worst_ret.max(d.abs());
        }
        ensure(r.verdict.kind == VerdictKind::Center, format!("{label}: verdict {:?}", r.verdict.kind))?;
    }
    ensure(worst_i < 1e-6 && worst_ret < 1e-8, format!("centers: max |I| = {worst_i:.2e}, max |Π − ρ₀| = {worst_ret:.2e}"))?;
    let mut min_at_05 = f64::INFINITY;
    for (label, s) in &foci {
        let r = center_focus_report(s);
        let good = r.weights.iter().filter(|w| !w.integrals.is_empty()).any(|w| {
            let vals: Vec<f64> = w.integrals.iter().filter_map(|row| row.time_domain).collect();
            let same = vals.len() == w.integrals.len() && (vals.iter().all(|v| *v > 0.0) || vals.iter().all(|v| *v < 0.0));
            let at = w.integrals.iter().find(|row| (row.rho0 - 0.05).abs() < 1e-12).and_then(|row| row.time_domain);
            if let Some(v) = at {
                min_at_05 = min_at_05.min(v.abs());
            }
            same && at.is_some_and(|v| v.abs() > 1e-4)
        });
        ensure(good, format!("{label}: no weight with a sign-consistent integral and |I(0.05)| > 1e-4"))?;
    }
    Ok(format!("centers max |I| {worst_i:.1e}, max |Π − ρ₀| {worst_ret:.1e}; foci min |I(0.05)| {min_at_05:.2e}"))
}

fn criterion_10() -> Outcome {
    let opts = FlowOptions::default();
    let grid = Rho0Grid { min: 1e-3, max: 1e-1, count: 10 }.points();
    let samples = |ps: &PolarSystem, k: &Cofactor| -> Result<Vec<(f64, f64)>, String> {
        let cyl = Cylinder::new(ps);
        grid.iter()
            .map(|&r0| integral_k(&cyl, &k.k, r0, IntegralMethod::TimeDomain, &[], &opts).map(|s| (r0, s.value)).map_err(|e| e.to_string()))
            .collect()
    };
    // Andreev with P ≠ 0: β₀ = 0 and β₁ = 4η₂ by three routes.
    let x = field("andreev", &[("P", "1/2")]);
    let ps = polar(&x, w(1, 2));
    let (f, k) = curve_and_cofactor(&x, w(1, 2), 20);
    ensure(f.s == 4, format!("Andreev s = {}", f.s))?;
    let fit = beta_fit(&samples(&ps, &k)?, 1).map_err(|e| e.to_string())?;
    let b = bautin_coefficients(&ps, 3, opts.atol, opts.rtol).map_err(|e| e.to_string())?;
    let (q1, _) = beta_quadrature(&ps, &k, &b).map_err(|e| e.to_string())?;
    let fit1 = fit.beta(1).ok_or("no β₁")?;
    let four_eta2 = 4.0 * b.eta(2);
    let beta0 = fit.below_start.first().copied().unwrap_or(0.0);
    ensure(beta0.abs() < 1e-6, format!("Andreev β₀ = {beta0:.2e}"))?;
    let spread = (fit1 - q1).abs().max((fit1 - four_eta2).abs()).max((q1 - four_eta2).abs());
    ensure(spread < 1e-6, format!("Andreev β₁: fit {fit1}, quadrature {q1}, 4η₂ {four_eta2}"))?;

    // Andreev with P = 0: β₂ = 0 and η₃ = 0.
    let x = field("andreev", &[]);
    let ps = polar(&x, w(1, 2));
    let (_, k) = curve_and_cofactor(&x, w(1, 2), 20);
    let b = bautin_coefficients(&ps, 3, opts.atol, opts.rtol).map_err(|e| e.to_string())?;
    let (_, q2) = beta_quadrature(&ps, &k, &b).map_err(|e| e.to_string())?;
    let fit = beta_fit(&samples(&ps, &k)?, 1).map_err(|e| e.to_string())?;
    let fit2 = fit.beta(2).unwrap_or(0.0);
    ensure(q2.abs() < 1e-8 && fit2.abs() < 1e-8 && b.eta(3).abs() < 1e-8, format!("Andreev P = 0: β₂ {q2:.2e} / {fit2:.2e}, η₃ {:.2e}", b.eta(3)))?;

    // Algaba at a = 0: β₁ = αf(0) + βg(0) with g(0) = 0.
    let amp = |phi: f64| {
        let (c, s) = (phi.cos(), phi.sin());
        let g7 = -(2.0 * c.powi(6) + 3.0 * s.powi(4));
        6.0 * 2f64.powf(1.0 / 12.0) * c * ((2.0 * phi).cos() - 5.0) / (-g7).powf(13.0 / 12.0)
    };
    let f0 = 2.0 * PI * periodic_mean(|p| amp(p) * p.cos().powi(3), 4096);
    let g0 = 2.0 * PI * periodic_mean(|p| amp(p) * p.sin().powi(2), 4096);
    let mut diffs = Vec::new();
    for (al, be) in [("1", "0"), ("0", "1"), ("2", "-3")] {
        let x = field("algaba", &[("a", "0"), ("alpha", al), ("beta", be)]);
        let ps = polar(&x, w(2, 3));
        let (_, k) = curve_and_cofactor(&x, w(2, 3), 20);
        let b = bautin_coefficients(&ps, 2, opts.atol, opts.rtol).map_err(|e| e.to_string())?;
        let (beta1, _) = beta_quadrature(&ps, &k, &b).map_err(|e| e.to_string())?;
        let expected = al.parse::<f64>().unwrap() * f0 + be.parse::<f64>().unwrap() * g0;
        diffs.push((beta1 - expected).abs());
    }
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    ensure(g0.abs() < 1e-12 && worst < 1e-7, format!("Algaba: g(0) = {g0:.2e}, |β₁ − (αf + βg)| = {diffs:?}"))?;
    Ok(format!("Andreev β₁ spread {spread:.1e}; Algaba f(0) = {f0:.6}, max error {worst:.1e}"))
}

fn criterion_11() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for name in corpus_names() {
        let s = corpus_system(name).unwrap().unwrap();
        let r = analyze(&s, &s.config().unwrap()).unwrap();
        for row in r.weights.iter().flat_map(|w| &w.integrals) {
            if let Some(d) = row.discrepancy {
                worst = worst.max(d);
                count += 1;
            }
        }
        // Series and diagram invariants.
        let x = s.field().unwrap();
        let diagram = newton_diagram(&x).unwrap();
        for e in &diagram.edges {
            let dec = qh_decompose(&x, e.weight);
            let (p, q) = dec.reconstruct();
            ensure(p == x.p && q == x.q, format!("{name}: decomposition does not reconstruct"))?;
            for (j, c) in &dec.components {
                let wt = e.weight;
                let ok = c.p.terms().all(|((m, n), _)| wt.degree(m, n) == wt.p as i64 + j)
                    && c.q.terms().all(|((m, n), _)| wt.degree(m, n) == wt.q as i64 + j);
                ensure(ok, format!("{name}: component {j} of {wt} is not quasihomogeneous"))?;
            }
            let v = inverse_integrating_factor(dec.leading(), e.weight).at_x_one();
            let q = q_poly(&x, e.weight);
            let pr = Rational::from_integer(e.weight.p.into());
            let neg_v_over_p = UniPoly::new(v.coeffs().iter().map(|c| -(c / &pr)).collect());
            ensure(q == neg_v_over_p, format!("{name}: 𝒬 ≠ −V(1,η)/p for {}", e.weight))?;
        }
    }
    ensure(count > 0 && worst < 1e-6, format!("max |I − log-identity| = {worst:.2e} over {count} samples"))?;
    Ok(format!("max |I − log-identity| = {worst:.1e} over {count} samples; invariants exact"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, u64, fn() -> Outcome); 11] = [
        ("Newton diagrams", 1, criterion_1),
        ("𝒬 polynomials", 1, criterion_2),
        ("Fuchs indices", 1, criterion_3),
        ("curve and cofactor assembly", 5, criterion_4),
        ("a₁ closed forms", 5, criterion_5),
        ("η₁ formulas", 60, criterion_6),
        ("ξ₁₁ counterexample", 10, criterion_7),
        ("quadrature sanity", 1, criterion_8),
        ("center/focus round trip", 120, criterion_9),
        ("β relations", 60, criterion_10),
        ("oracle identity and invariants", 60, criterion_11),
    ];
    let mut failed = Vec::new();
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let elapsed = t.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&out, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; exceeded {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!("criterion {:>2} {status}: {name} ({:.2?}) {detail}", k + 1, elapsed);
        if status == "FAIL" {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
