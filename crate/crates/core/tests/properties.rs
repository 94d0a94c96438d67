use std::collections::BTreeSet;

use proptest::prelude::*;

use centerfocus_core::algebra::{Rational, UniPoly};
use centerfocus_core::branches::q_polynomial;
use centerfocus_core::classify::{analyze, corpus_system, AnalysisConfig, Rho0Grid, SystemFile, VerdictKind};
use centerfocus_core::diagram::{inverse_integrating_factor, newton_diagram, qh_decompose, vector_support, VectorField};

type Terms = Vec<(u32, u32, i64)>;

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((0u32..5, 0u32..5, -3i64..=3), 0..6)
}

fn field_from(p: &Terms, q: &Terms) -> Option<VectorField> {
    let conv = |t: &Terms| -> Vec<(u32, u32, Rational)> {
        t.iter().filter(|t| t.2 != 0).map(|&(m, n, c)| (m, n, Rational::from_integer(c.into()))).collect()
    };
    let x = VectorField::from_terms(&conv(p), &conv(q)).ok()?;
    (!x.p.is_zero() || !x.q.is_zero()).then_some(x)
}

fn small_rational() -> impl Strategy<Value = String> {
    (-6i32..=6, 1i32..=4).prop_map(|(n, d)| format!("{n}/{d}"))
}

fn andreev(params: &[(&str, String)]) -> SystemFile {
    let s = corpus_system("andreev").unwrap().unwrap();
    s.with_params(params.iter().map(|(k, v)| (*k, v.as_str()))).unwrap()
}

fn quick_config(s: &SystemFile) -> AnalysisConfig {
    let mut cfg = s.config().unwrap();
    cfg.rho0_grid = Rho0Grid { min: 1e-3, max: 5e-2, count: 4 };
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decomposition_reconstructs_and_is_quasihomogeneous(p in terms(), q in terms()) {
        let Some(x) = field_from(&p, &q) else { return Ok(()) };
        let d = newton_diagram(&x).unwrap();
        for e in &d.edges {
            let dec = qh_decompose(&x, e.weight);
            let (rp, rq) = dec.reconstruct();
            prop_assert!(rp == x.p && rq == x.q);
            prop_assert_eq!(dec.r, e.leading_degree);
            for (j, c) in &dec.components {
                let wt = e.weight;
                prop_assert!(c.p.terms().all(|((m, n), _)| wt.degree(m, n) == wt.p as i64 + j));
                prop_assert!(c.q.terms().all(|((m, n), _)| wt.degree(m, n) == wt.q as i64 + j));
            }
        }
    }

    #[test]
    fn hull_edges_support_the_whole_diagram(p in terms(), q in terms()) {
        let Some(x) = field_from(&p, &q) else { return Ok(()) };
        let d = newton_diagram(&x).unwrap();
        let support: BTreeSet<(u32, u32)> = vector_support(&x);
        prop_assert_eq!(&d.support, &support);
        prop_assert!(d.vertices.iter().all(|v| support.contains(v)));
        for e in &d.edges {
            prop_assert!(support.iter().all(|&(i, j)| e.weight.degree(i, j) >= e.line_value));
            prop_assert_eq!(e.weight.degree(e.end.0, e.end.1), e.line_value);
            prop_assert!(e.members.contains(&e.start) && e.members.contains(&e.end));
        }
        // Slopes strictly flatten along the chain.
        for pair in d.edges.windows(2) {
            let (a, b) = (pair[0].weight, pair[1].weight);
            prop_assert!((a.p as u64) * (b.q as u64) > (b.p as u64) * (a.q as u64));
        }
    }

    #[test]
    fn determining_polynomial_is_minus_v_over_p(p in terms(), q in terms()) {
        let Some(x) = field_from(&p, &q) else { return Ok(()) };
        let d = newton_diagram(&x).unwrap();
        for e in &d.edges {
            let dec = qh_decompose(&x, e.weight);
            let Ok(det) = q_polynomial(dec.leading(), e.weight, e.leading_degree) else { continue };
            let v = inverse_integrating_factor(dec.leading(), e.weight).at_x_one();
            let pr = Rational::from_integer(e.weight.p.into());
            let expected = UniPoly::new(v.coeffs().iter().map(|c| -(c / &pr)).collect());
            prop_assert_eq!(det.poly, expected);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn log_identity_matches_cofactor_integral(
        a in small_rational(), b in small_rational(), kappa in small_rational(), pp in small_rational()
    ) {
        let s = andreev(&[("A", a), ("B", b), ("kappa", kappa), ("P", pp)]);
        let r = analyze(&s, &quick_config(&s)).unwrap();
        let rows: Vec<f64> = r.weights.iter().flat_map(|w| &w.integrals).filter_map(|row| row.discrepancy).collect();
        prop_assert!(!rows.is_empty());
        for d in rows {
            prop_assert!(d < 1e-6, "discrepancy {d:.3e}");
        }
    }

    #[test]
    fn tightening_never_flips_a_verdict(
        pp in prop_oneof![Just("0".to_string()), small_rational()], factor in 1.0f64..100.0
    ) {
        let s = andreev(&[("P", pp)]);
        let cfg = quick_config(&s);
        let loose = analyze(&s, &cfg).unwrap().verdict.kind;
        let tight = analyze(&s, &cfg.tightened(factor)).unwrap().verdict.kind;
        prop_assert!(tight == loose || tight == VerdictKind::Inconclusive, "{loose:?} became {tight:?}");
    }
}
