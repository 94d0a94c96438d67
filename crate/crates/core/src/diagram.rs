//! Newton diagram of a vector field, weights, quasihomogeneous decomposition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{bivariate_gcd, BiPoly, Rational, UniPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagramError {
    #[error("the origin is not singular: P(0,0) or Q(0,0) is nonzero")]
    NonSingularOrigin,
    #[error("the vector field is identically zero")]
    ZeroField,
    #[error("empty support")]
    EmptySupport,
    #[error("weights ({p},{q}) are not coprime positive integers")]
    BadWeights { p: u32, q: u32 },
    #[error("P and Q share the factor {factor}, which vanishes along a curve through the origin")]
    NonIsolatedSingularity { factor: String },
}

/// Coprime positive weights defining `deg(x^i y^j) = p·i + q·j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Weight {
    pub p: u32,
    pub q: u32,
}

impl Weight {
    pub fn new(p: u32, q: u32) -> Result<Self, DiagramError> {
        if p == 0 || q == 0 || p.gcd(&q) != 1 {
            return Err(DiagramError::BadWeights { p, q });
        }
        Ok(Weight { p, q })
    }

    pub fn degree(&self, i: u32, j: u32) -> i64 {
        self.p as i64 * i as i64 + self.q as i64 * j as i64
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Planar polynomial vector field `P∂ₓ + Q∂ᵧ` with a singular point at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub p: BiPoly<Rational>,
    pub q: BiPoly<Rational>,
    pub params: BTreeMap<String, Rational>,
}

impl VectorField {
    pub fn new(p: BiPoly<Rational>, q: BiPoly<Rational>) -> Result<Self, DiagramError> {
        Self::with_params(p, q, BTreeMap::new())
    }

    pub fn with_params(
        p: BiPoly<Rational>,
        q: BiPoly<Rational>,
        params: BTreeMap<String, Rational>,
    ) -> Result<Self, DiagramError> {
        if p.is_zero() && q.is_zero() {
            return Err(DiagramError::ZeroField);
        }
        if !p.coeff(0, 0).is_zero() || !q.coeff(0, 0).is_zero() {
            return Err(DiagramError::NonSingularOrigin);
        }
        Ok(VectorField { p, q, params })
    }

    /// Builds from `(i, j, coefficient)` triples.
    pub fn from_terms(p: &[(u32, u32, Rational)], q: &[(u32, u32, Rational)]) -> Result<Self, DiagramError> {
        let build = |t: &[(u32, u32, Rational)]| BiPoly::from_terms(t.iter().map(|(i, j, c)| ((*i, *j), c.clone())));
        Self::new(build(p), build(q))
    }

    /// Time-reversed field `−X`.
    pub fn reversed(&self) -> Self {
        VectorField { p: -&self.p, q: -&self.q, params: self.params.clone() }
    }

    /// Lie derivative `X(F)`.
    pub fn apply(&self, f: &BiPoly<Rational>) -> BiPoly<Rational> {
        f.lie_derivative(&self.p, &self.q)
    }
}

/// Shifted support: P-monomial `x^m y^n ↦ (m, n+1)`, Q-monomial `x^m y^n ↦ (m+1, n)`.
pub fn vector_support(x: &VectorField) -> BTreeSet<(u32, u32)> {
    x.p.terms()
        .map(|((m, n), _)| (m, n + 1))
        .chain(x.q.terms().map(|((m, n), _)| (m + 1, n)))
        .collect()
}

/// One compact edge of a Newton polygon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub start: (u32, u32),
    pub end: (u32, u32),
    /// Every support point on the edge, ordered by increasing i.
    pub members: Vec<(u32, u32)>,
    pub weight: Weight,
    /// `ℓ = p·i + q·j` on the edge.
    pub line_value: i64,
    /// `r = ℓ − p − q` for vector-field supports.
    pub leading_degree: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonDiagram {
    pub support: BTreeSet<(u32, u32)>,
    pub vertices: Vec<(u32, u32)>,
    pub edges: Vec<Edge>,
    pub warnings: Vec<String>,
}

impl NewtonDiagram {
    pub fn weights(&self) -> Vec<Weight> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    pub fn edge_for(&self, w: Weight) -> Option<&Edge> {
        self.edges.iter().find(|e| e.weight == w)
    }
}

fn cross(o: (u32, u32), a: (u32, u32), b: (u32, u32)) -> i64 {
    let (ox, oy) = (o.0 as i64, o.1 as i64);
    (a.0 as i64 - ox) * (b.1 as i64 - oy) - (a.1 as i64 - oy) * (b.0 as i64 - ox)
}

/// Vertices and compact edges of the lower-left hull of a point set.
///
/// Collinear interior points are edge members, not vertices. Rays along the axes
/// are omitted.
pub fn lower_left_hull(points: &BTreeSet<(u32, u32)>) -> (Vec<(u32, u32)>, Vec<Edge>) {
    let pts: Vec<(u32, u32)> = points.iter().copied().collect();
    let Some(&first) = pts.first() else { return (Vec::new(), Vec::new()) };
    let j_min = pts.iter().map(|p| p.1).min().expect("nonempty");
    let last = *pts.iter().filter(|p| p.1 == j_min).min().expect("nonempty");
    let mut hull: Vec<(u32, u32)> = Vec::new();
    for &p in pts.iter().filter(|p| p.0 <= last.0) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    // The chain starts at the lowest point of the leftmost column and ends at `last`.
    debug_assert_eq!(hull.first(), Some(&first));
    let vertices: Vec<(u32, u32)> = {
        let end = hull.iter().position(|&v| v == last).expect("last is on the hull");
        hull[..=end].to_vec()
    };
    let edges = vertices
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let di = b.0 - a.0;
            let dj = a.1 - b.1;
            let g = di.gcd(&dj);
            let weight = Weight { p: dj / g, q: di / g };
            let line_value = weight.degree(a.0, a.1);
            let members = pts
                .iter()
                .copied()
                .filter(|&(i, j)| i >= a.0 && i <= b.0 && weight.degree(i, j) == line_value)
                .collect();
            Edge {
                start: a,
                end: b,
                members,
                weight,
                line_value,
                leading_degree: line_value - weight.p as i64 - weight.q as i64,
            }
        })
        .collect();
    (vertices, edges)
}

pub fn newton_diagram(x: &VectorField) -> Result<NewtonDiagram, DiagramError> {
    let support = vector_support(x);
    if support.is_empty() {
        return Err(DiagramError::EmptySupport);
    }
    let (vertices, edges) = lower_left_hull(&support);
    let warnings = edges
        .iter()
        .filter(|e| e.leading_degree < 1)
        .map(|e| format!("edge with weight {} has leading degree r = {}", e.weight, e.leading_degree))
        .collect();
    Ok(NewtonDiagram { support, vertices, edges, warnings })
}

/// Quasihomogeneous component `P_{p+j}∂ₓ + Q_{q+j}∂ᵧ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub p: BiPoly<Rational>,
    pub q: BiPoly<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QHDecomposition {
    pub weight: Weight,
    pub components: BTreeMap<i64, Component>,
    pub r: i64,
}

impl QHDecomposition {
    pub fn leading(&self) -> &Component {
        &self.components[&self.r]
    }

    pub fn component(&self, j: i64) -> Option<&Component> {
        self.components.get(&j)
    }

    pub fn max_degree(&self) -> i64 {
        *self.components.keys().next_back().expect("nonempty")
    }

    /// Sum of all components.
    pub fn reconstruct(&self) -> (BiPoly<Rational>, BiPoly<Rational>) {
        self.components.values().fold((BiPoly::zero(), BiPoly::zero()), |(p, q), c| (&p + &c.p, &q + &c.q))
    }
}

/// Splits X by weighted degree: `x^m y^n` in P has degree `pm + qn − p`, in Q `pm + qn − q`.
pub fn qh_decompose(x: &VectorField, w: Weight) -> QHDecomposition {
    let mut components: BTreeMap<i64, Component> = BTreeMap::new();
    let empty = || Component { p: BiPoly::zero(), q: BiPoly::zero() };
    for ((m, n), c) in x.p.terms() {
        let j = w.degree(m, n) - w.p as i64;
        components.entry(j).or_insert_with(empty).p.add_term(m, n, c.clone());
    }
    for ((m, n), c) in x.q.terms() {
        let j = w.degree(m, n) - w.q as i64;
        components.entry(j).or_insert_with(empty).q.add_term(m, n, c.clone());
    }
    let r = *components.keys().next().expect("a vector field has at least one term");
    QHDecomposition { weight: w, components, r }
}

/// Inverse integrating factor `V = p·x·Q_{q+r} − q·y·P_{p+r}` of the leading part.
pub fn inverse_integrating_factor(leading: &Component, w: Weight) -> BiPoly<Rational> {
    let p = Rational::from_integer(w.p.into());
    let q = Rational::from_integer(w.q.into());
    &(&BiPoly::<Rational>::x() * &leading.q).scale(&p) - &(&BiPoly::<Rational>::y() * &leading.p).scale(&q)
}

/// Outcome of the common-factor check on P and Q.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonFactor {
    /// The field after dividing out the common factor (unchanged when none).
    pub field: VectorField,
    /// The removed factor, if any, normalized to be positive off the origin.
    pub removed: Option<BiPoly<Rational>>,
}

/// Detects a common polynomial factor of P and Q.
///
/// A factor vanishing only at the origin (e.g. `x² + y²`) is divided out with its
/// sign preserved, so orbits and their orientation are unchanged. A factor that
/// vanishes along a real curve through the origin makes the singularity non-isolated.
pub fn remove_common_factor(x: &VectorField) -> Result<CommonFactor, DiagramError> {
    if x.p.is_zero() || x.q.is_zero() {
        return Ok(CommonFactor { field: x.clone(), removed: None });
    }
    let g = bivariate_gcd(&x.p, &x.q);
    if g.total_degree().unwrap_or(0) == 0 {
        return Ok(CommonFactor { field: x.clone(), removed: None });
    }
    let g_f = g.to_f64();
    let sign_at = |phi: f64, rad: f64| g_f.eval_f64(rad * phi.cos(), rad * phi.sin());
    if !g.coeff(0, 0).is_zero() {
        // Nonzero at the origin: a unit near the singular point; divide it out keeping the sign at 0.
        let s = if g.coeff(0, 0) > Rational::zero() { Rational::one() } else { -Rational::one() };
        let g = g.scale(&s);
        return divide_out(x, g);
    }
    // Vanishes at the origin: must keep one strict sign on small circles.
    let mut sign = 0i8;
    for &rad in &[1e-1, 1e-2, 1e-3] {
        for k in 0..720 {
            let v = sign_at(2.0 * std::f64::consts::PI * k as f64 / 720.0, rad);
            let s = if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 };
            if s == 0 || (sign != 0 && s != sign) {
                return Err(DiagramError::NonIsolatedSingularity { factor: g.to_string() });
            }
            sign = s;
        }
    }
    let g = if sign < 0 { -&g } else { g };
    divide_out(x, g)
}

fn divide_out(x: &VectorField, g: BiPoly<Rational>) -> Result<CommonFactor, DiagramError> {
    let p = x.p.div_exact(&g).expect("gcd divides P");
    let q = x.q.div_exact(&g).expect("gcd divides Q");
    let field = VectorField::with_params(p, q, x.params.clone())?;
    Ok(CommonFactor { field, removed: Some(g) })
}

/// `Q_{q+r}(1, η)` and friends: the restriction of a component to `x = 1`.
pub fn at_x_one(p: &BiPoly<Rational>) -> UniPoly<Rational> {
    p.at_x_one()
}
