//! Report serialization: deterministic JSON with 17 significant digits, and plain text.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use super::analyze::{AnalysisReport, VerdictKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

/// Report as a JSON tree. Object keys are sorted; non-finite floats become `null`.
pub fn to_json_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize to JSON")
}

pub fn emit_report(report: &AnalysisReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = String::new();
            write_json(&to_json_value(report), 0, &mut out);
            out.push('\n');
            out.into_bytes()
        }
        ReportFormat::Text => render_text(report).into_bytes(),
    }
}

/// Floats as `d.dddddddddddddddde±x`, integers verbatim.
pub(crate) fn format_number(n: &serde_json::Number) -> String {
    if n.is_i64() || n.is_u64() {
        return n.to_string();
    }
    let v = n.as_f64().expect("JSON numbers are finite");
    format!("{v:.16e}")
}

pub(crate) fn write_json(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&format_number(n)),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let n = map.len();
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push_str(": ");
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < n { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

fn render_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let name = r.system.name.as_deref().unwrap_or("system");
    let _ = writeln!(s, "system: {name}");
    if let Some(d) = &r.system.description {
        let _ = writeln!(s, "  {d}");
    }
    if !r.system.params.is_empty() {
        let params: Vec<String> = r.system.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        let _ = writeln!(s, "  params: {}", params.join(", "));
    }
    let _ = writeln!(s, "  P = {}", r.system.p);
    let _ = writeln!(s, "  Q = {}", r.system.q);
    if let Some(g) = &r.common_factor {
        let _ = writeln!(s, "common factor removed: {g}");
    }
    if let Some(d) = &r.diagram {
        let verts: Vec<String> = d.vertices.iter().map(|v| format!("({},{})", v.0, v.1)).collect();
        let _ = writeln!(s, "Newton diagram: vertices {}", verts.join(" "));
        for e in &d.edges {
            let _ = writeln!(s, "  edge ({},{})–({},{}) weight {} r = {}", e.start.0, e.start.1, e.end.0, e.end.1, e.weight, e.leading_degree);
        }
    }
    for v in &r.monodromy.violations {
        let _ = writeln!(s, "! {v}");
    }
    for w in &r.weights {
        let _ = writeln!(s, "weight {}: r = {}, orientation {:?}, {}", w.weight, w.r, w.orientation, if w.in_mo { "in Mo" } else { "not in Mo" });
        if !w.omega.is_empty() {
            let om: Vec<String> = w.omega.iter().map(|a| format!("{:.6} (×{})", a.angle, a.multiplicity)).collect();
            let _ = writeln!(s, "  characteristic directions: {}", om.join(", "));
        }
        if let Some(d) = &w.determining {
            let _ = writeln!(s, "  𝒬 coefficients: [{}]", d.coefficients.join(", "));
        }
        if let Some(c) = &w.curve {
            let _ = writeln!(s, "  curve: s = {}, {} terms{}", c.s, c.terms.len(), if c.polynomial { "" } else { " (truncated series)" });
        }
        if let Some(k) = &w.cofactor {
            let _ = writeln!(s, "  cofactor: r̄ = {}", k.r_bar.map_or("∞ (K ≡ 0)".to_string(), |v| v.to_string()));
        }
        if let Some(sv) = &w.sign {
            let _ = writeln!(s, "  sign test: {:?} ({})", sv.verdict, sv.note);
        }
        if !w.integrals.is_empty() {
            let _ = writeln!(s, "  {:>12} {:>22} {:>12} {:>22}", "ρ₀", "∫K̂", "|Δ log-id|", "PV");
            for row in &w.integrals {
                let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.15e}"));
                let d = row.discrepancy.map_or("-".to_string(), |x| format!("{x:.2e}"));
                let _ = writeln!(s, "  {:>12.5e} {:>22} {:>12} {:>22}{}", row.rho0, f(row.time_domain), d, f(row.pv), if row.flagged { " !" } else { "" });
            }
        }
        if let Some(b) = &w.beta {
            let _ = writeln!(s, "  β from ρ₀^{}: {:?}", b.start, b.coefficients);
            if let Some(q) = b.quadrature {
                let _ = writeln!(s, "  β by quadrature: ({:.12e}, {:.12e})", q.0, q.1);
            }
        }
        for rel in &w.relations {
            let _ = writeln!(s, "  {}: {:.12e} vs {:.12e} (Δ = {:.2e})", rel.name, rel.lhs, rel.rhs, rel.difference);
        }
        if let Some(xi) = &w.xi {
            match xi.value {
                Some(v) => {
                    let _ = writeln!(s, "  ξ(2π) = {v:.12}");
                }
                None => {
                    let _ = writeln!(s, "  ξ(2π) does not exist");
                }
            }
        }
        for n in &w.notes {
            let _ = writeln!(s, "  note: {n}");
        }
    }
    if let Some(g) = &r.grid {
        let _ = writeln!(s, "ρ₀ grid: {} points in [{:e}, {:e}] on weight {}", g.count, g.min, g.max, r.flow_weight.map_or("-".into(), |w| w.to_string()));
    }
    for e in &r.eta {
        let err = e.error.map_or(String::new(), |x| format!(" ± {x:.1e}"));
        let _ = writeln!(s, "η{} = {:.12e}{err} [{}; weight {}]", e.index, e.value, e.method, e.weight);
    }
    for e in &r.evidence {
        let _ = writeln!(s, "evidence ({:?}, for {:?}): {}", e.rule, e.supports, e.detail);
    }
    for e in &r.errors {
        let _ = writeln!(s, "warning: {e}");
    }
    for e in &r.invariant_violations {
        let _ = writeln!(s, "invariant violated: {e}");
    }
    let kind = match (r.verdict.kind, r.verdict.stability) {
        (VerdictKind::Center, _) => "center".to_string(),
        (VerdictKind::Focus, Some(st)) => format!("focus ({})", format!("{st:?}").to_lowercase()),
        (VerdictKind::Focus, None) => "focus".to_string(),
        (VerdictKind::Inconclusive, _) => "inconclusive".to_string(),
    };
    let _ = writeln!(s, "verdict: {kind} [{:?}] {}", r.verdict.rule, r.verdict.summary);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let v = serde_json::json!({"b": 0.1, "a": [1, -2.5e-300, null]});
        let mut out = String::new();
        write_json(&v, 0, &mut out);
        assert!(out.contains("\"a\""));
        assert!(out.find("\"a\"").unwrap() < out.find("\"b\"").unwrap());
        assert!(out.contains("1.0000000000000001e-1"), "{out}");
        assert!(out.contains("-2.5000000000000001e-300") || out.contains("-2.5000000000000000e-300"), "{out}");
        let back: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
        assert_eq!(back["a"][0].as_i64(), Some(1));
    }
}
