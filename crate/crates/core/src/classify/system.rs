//! TOML system files: `[system]` terms, `[params]` bindings and `[config]` overrides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{parse_coefficient_expression, BiPoly, ExprError, Rational};
use crate::diagram::{DiagramError, VectorField};

use super::config::ConfigOverrides;

#[derive(Debug, Error)]
pub enum SystemFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed system file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("parameter `{name}`: {source}")]
    Param { name: String, source: ExprError },
    #[error("{component} term {index} (x^{i} y^{j}): {source}")]
    Coefficient { component: &'static str, index: usize, i: u32, j: u32, source: ExprError },
    #[error("parameter `{0}` is not defined")]
    UnknownOverride(String),
    #[error(transparent)]
    Field(#[from] DiagramError),
    #[error("[config]: {0}")]
    Config(#[from] super::config::ConfigError),
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct Terms {
    #[serde(rename = "P")]
    pub p: Vec<(u32, u32, String)>,
    #[serde(rename = "Q")]
    pub q: Vec<(u32, u32, String)>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub system: Terms,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub config: ConfigOverrides,
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, SystemFileError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SystemFileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| SystemFileError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Replaces parameter values (as expressions) and returns the modified file.
    pub fn with_params<'a>(&self, overrides: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, SystemFileError> {
        let mut out = self.clone();
        for (k, v) in overrides {
            if !out.params.contains_key(k) {
                return Err(SystemFileError::UnknownOverride(k.to_string()));
            }
            out.params.insert(k.to_string(), v.to_string());
        }
        Ok(out)
    }

    /// Bound parameter values. Parameters may reference earlier ones alphabetically.
    pub fn bindings(&self) -> Result<BTreeMap<String, Rational>, SystemFileError> {
        let mut env = BTreeMap::new();
        for (name, text) in &self.params {
            let v = parse_coefficient_expression(text, &env)
                .map_err(|source| SystemFileError::Param { name: name.clone(), source })?;
            env.insert(name.clone(), v);
        }
        Ok(env)
    }

    pub fn field(&self) -> Result<VectorField, SystemFileError> {
        let env = self.bindings()?;
        let build = |component: &'static str, terms: &[(u32, u32, String)]| -> Result<BiPoly<Rational>, SystemFileError> {
            let mut poly = BiPoly::zero();
            for (index, (i, j, text)) in terms.iter().enumerate() {
                let c = parse_coefficient_expression(text, &env)
                    .map_err(|source| SystemFileError::Coefficient { component, index, i: *i, j: *j, source })?;
                poly.add_term(*i, *j, c);
            }
            Ok(poly)
        };
        let p = build("P", &self.system.p)?;
        let q = build("Q", &self.system.q)?;
        Ok(VectorField::with_params(p, q, env)?)
    }

    /// Default configuration with this file's `[config]` table applied.
    pub fn config(&self) -> Result<super::config::AnalysisConfig, SystemFileError> {
        let mut cfg = super::config::AnalysisConfig::default();
        cfg.apply(&self.config)?;
        Ok(cfg)
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| "system".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    const TEXT: &str = r#"
name = "demo"
[system]
P = [[0, 1, "-1"], [1, 0, "lam"]]
Q = [[1, 0, "1"], [0, 1, "lam"]]
[params]
lam = "1/10"
"#;

    #[test]
    fn parses_and_binds() {
        let sf = SystemFile::parse(TEXT).unwrap();
        let x = sf.field().unwrap();
        assert_eq!(x.p.coeff(1, 0), rat(1, 10));
        assert_eq!(x.params["lam"], rat(1, 10));
        let x0 = sf.with_params([("lam", "0")]).unwrap().field().unwrap();
        assert!(x0.p.coeff(1, 0) == rat(0, 1));
    }

    #[test]
    fn reports_bad_coefficients() {
        let bad = TEXT.replace("\"lam\"]]\nQ", "\"lam^2\"]]\nQ");
        let err = SystemFile::parse(&bad).unwrap().field().unwrap_err();
        assert!(matches!(err, SystemFileError::Coefficient { component: "P", index: 1, .. }), "{err}");
        assert!(SystemFile::parse("[system]\nP = 3").is_err());
        assert!(matches!(
            SystemFile::parse(TEXT).unwrap().with_params([("mu", "1")]),
            Err(SystemFileError::UnknownOverride(_))
        ));
    }
}
