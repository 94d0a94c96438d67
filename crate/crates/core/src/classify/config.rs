//! Analysis configuration with defaults and file/CLI overrides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::Weight;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("ρ₀ grid needs 0 < min < max and at least 4 points")]
    BadGrid,
    #[error("weights ({0},{1}) are not coprime positive integers")]
    BadWeights(u32, u32),
}

/// Geometric grid of starting radii, stored in decreasing order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rho0Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Rho0Grid {
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| self.max * (self.min / self.max).powf(k as f64 / (n - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    /// Explicit weight, or every edge weight of the diagram when `None`.
    pub weights: Option<Weight>,
    pub rho0_grid: Rho0Grid,
    /// Center evidence: every |I(ρ₀)| below this.
    pub center_tol: f64,
    /// Center evidence: every |Π(ρ₀) − ρ₀| below this.
    pub return_tol: f64,
    /// Focus evidence from the integral: max |I(ρ₀)| above this with a constant sign.
    pub focus_tol: f64,
    /// Focus evidence from Poincaré–Lyapunov quantities: |η₁ − 1| or |η_k| above this.
    pub eta_tol: f64,
    /// Allowed |I − log-identity| before a sample is flagged.
    pub oracle_tol: f64,
    pub atol: f64,
    pub rtol: f64,
    pub bautin_order: usize,
    pub branch_order: usize,
    pub trust_radius: f64,
    /// Number of polar components above r.
    pub extra_orders: i64,
    /// Jet degree for the sign test (defaults to r̄ + 2 in the curve weight).
    pub sign_degree: Option<u64>,
    pub use_pv: bool,
    pub use_bautin: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            weights: None,
            rho0_grid: Rho0Grid { min: 1e-3, max: 1e-1, count: 8 },
            center_tol: 1e-6,
            return_tol: 1e-8,
            focus_tol: 1e-5,
            eta_tol: 1e-6,
            oracle_tol: 1e-6,
            atol: 1e-12,
            rtol: 1e-10,
            bautin_order: 3,
            branch_order: 20,
            trust_radius: 0.5,
            extra_orders: 8,
            sign_degree: None,
            use_pv: true,
            use_bautin: true,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("center_tol", self.center_tol),
            ("return_tol", self.return_tol),
            ("focus_tol", self.focus_tol),
            ("eta_tol", self.eta_tol),
            ("oracle_tol", self.oracle_tol),
            ("atol", self.atol),
            ("rtol", self.rtol),
            ("trust_radius", self.trust_radius),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::NonPositive(name));
            }
        }
        let g = self.rho0_grid;
        if !(g.min > 0.0 && g.min < g.max && g.count >= 4) {
            return Err(ConfigError::BadGrid);
        }
        if self.bautin_order == 0 {
            return Err(ConfigError::NonPositive("bautin_order"));
        }
        if self.branch_order == 0 {
            return Err(ConfigError::NonPositive("branch_order"));
        }
        Ok(())
    }

    /// Stricter evidence thresholds: center bounds shrink and focus bounds grow by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        AnalysisConfig {
            center_tol: self.center_tol / factor,
            return_tol: self.return_tol / factor,
            focus_tol: self.focus_tol * factor,
            eta_tol: self.eta_tol * factor,
            ..self.clone()
        }
    }

    pub fn apply(&mut self, o: &ConfigOverrides) -> Result<(), ConfigError> {
        if let Some([p, q]) = o.weights {
            self.weights = Some(Weight::new(p, q).map_err(|_| ConfigError::BadWeights(p, q))?);
        }
        if let Some((min, max, count)) = o.rho0_grid {
            self.rho0_grid = Rho0Grid { min, max, count };
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        set!(center_tol, return_tol, focus_tol, eta_tol, oracle_tol, atol, rtol, bautin_order, branch_order, trust_radius, extra_orders, use_pv, use_bautin);
        if o.sign_degree.is_some() {
            self.sign_degree = o.sign_degree;
        }
        self.validate()
    }
}

/// Optional `[config]` table of a system file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub weights: Option<[u32; 2]>,
    pub rho0_grid: Option<(f64, f64, usize)>,
    pub center_tol: Option<f64>,
    pub return_tol: Option<f64>,
    pub focus_tol: Option<f64>,
    pub eta_tol: Option<f64>,
    pub oracle_tol: Option<f64>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    pub bautin_order: Option<usize>,
    pub branch_order: Option<usize>,
    pub trust_radius: Option<f64>,
    pub extra_orders: Option<i64>,
    pub sign_degree: Option<u64>,
    pub use_pv: Option<bool>,
    pub use_bautin: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_decreasing_geometric() {
        let g = AnalysisConfig::default().rho0_grid.points();
        assert_eq!(g.len(), 8);
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[7] - 1e-3).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn overrides_are_validated() {
        let mut c = AnalysisConfig::default();
        let o = ConfigOverrides { center_tol: Some(-1.0), ..Default::default() };
        assert_eq!(c.apply(&o), Err(ConfigError::NonPositive("center_tol")));
        let mut c = AnalysisConfig::default();
        let o = ConfigOverrides { weights: Some([1, 2]), rho0_grid: Some((1e-3, 3e-2, 6)), ..Default::default() };
        c.apply(&o).unwrap();
        assert_eq!(c.weights, Some(Weight { p: 1, q: 2 }));
    }
}
