//! Weighted polar blow-up `x = ρ^p cos φ, y = ρ^q sin φ`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{circle_roots, trig_substitute, CircleRoot, ComplexRational, FourierPoly, Rational, Scalar};
use crate::diagram::{newton_diagram, qh_decompose, DiagramError, QHDecomposition, VectorField, Weight};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlowupError {
    #[error("weight {0} is not an edge weight of the Newton diagram")]
    WeightNotInDiagram(Weight),
    #[error("leading angular component G_r vanishes identically for weight {0}")]
    DegenerateLeading(Weight),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Sense of rotation given by the sign of `G_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Counterclockwise,
    Clockwise,
    Mixed,
    Degenerate,
}

/// `F_j` and `G_j` for one weighted degree `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarComponent {
    pub degree: i64,
    pub f: FourierPoly<ComplexRational>,
    pub g: FourierPoly<ComplexRational>,
}

#[derive(Debug, Clone)]
pub struct PolarSystem {
    pub weight: Weight,
    pub r: i64,
    /// Components for `j = r..=j_max` (zero where the field has no component).
    pub components: Vec<PolarComponent>,
    /// `D(φ) = p cos²φ + q sin²φ`.
    pub d: FourierPoly<ComplexRational>,
    /// Zeros of `G_r` on the circle.
    pub omega: Vec<CircleRoot>,
    pub orientation: Orientation,
    pub decomposition: QHDecomposition,
}

/// Options for [`polar_components`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PolarOptions {
    /// Accept weights that are not edge weights of the diagram.
    pub allow_any_weight: bool,
    /// Number of components above `r` (default 8).
    pub extra_orders: Option<i64>,
}

const ROOT_TOL: f64 = 1e-8;

pub fn polar_components(x: &VectorField, w: Weight, opts: PolarOptions) -> Result<PolarSystem, BlowupError> {
    if !opts.allow_any_weight && newton_diagram(x)?.edge_for(w).is_none() {
        return Err(BlowupError::WeightNotInDiagram(w));
    }
    let decomposition = qh_decompose(x, w);
    let r = decomposition.r;
    let j_max = r + opts.extra_orders.unwrap_or(8);
    let cos: FourierPoly<ComplexRational> = trig_substitute(&crate::algebra::BiPoly::<Rational>::x());
    let sin: FourierPoly<ComplexRational> = trig_substitute(&crate::algebra::BiPoly::<Rational>::y());
    let pw = ComplexRational::from_i64(w.p as i64);
    let qw = ComplexRational::from_i64(w.q as i64);
    let components = (r..=j_max)
        .map(|j| match decomposition.component(j) {
            Some(c) => {
                let pt = trig_substitute(&c.p);
                let qt = trig_substitute(&c.q);
                let f = &(&pt * &cos) + &(&qt * &sin);
                let g = &(&qt * &cos).scale(&pw) - &(&pt * &sin).scale(&qw);
                PolarComponent { degree: j, f, g }
            }
            None => PolarComponent { degree: j, f: FourierPoly::zero(), g: FourierPoly::zero() },
        })
        .collect::<Vec<_>>();
    let d = &(&cos * &cos).scale(&pw) + &(&sin * &sin).scale(&qw);
    let g_r = &components[0].g;
    let (omega, orientation) = if g_r.is_zero() {
        (Vec::new(), Orientation::Degenerate)
    } else {
        let omega = circle_roots(g_r, ROOT_TOL).expect("nonzero G_r");
        let orientation = orientation_of(g_r, &omega);
        (omega, orientation)
    };
    Ok(PolarSystem { weight: w, r, components, d, omega, orientation, decomposition })
}

fn orientation_of(g: &FourierPoly<ComplexRational>, omega: &[CircleRoot]) -> Orientation {
    if omega.iter().any(|c| c.multiplicity % 2 == 1) {
        return Orientation::Mixed;
    }
    // Sample away from the (even-order) zeros.
    let mut angles: Vec<f64> = omega.iter().map(|c| c.angle).collect();
    angles.sort_by(f64::total_cmp);
    let probe = match angles.as_slice() {
        [] => 0.0,
        [a] => a + PI,
        [a, b, ..] => 0.5 * (a + b),
    };
    if g.eval(probe) > 0.0 {
        Orientation::Counterclockwise
    } else {
        Orientation::Clockwise
    }
}

impl PolarSystem {
    pub fn f(&self, j: i64) -> Option<&FourierPoly<ComplexRational>> {
        self.components.get((j - self.r) as usize).map(|c| &c.f)
    }

    pub fn g(&self, j: i64) -> Option<&FourierPoly<ComplexRational>> {
        self.components.get((j - self.r) as usize).map(|c| &c.g)
    }

    pub fn j_max(&self) -> i64 {
        self.r + self.components.len() as i64 - 1
    }

    /// `−1` when the canonical orientation requires time reversal, else `+1`.
    pub fn time_sign(&self) -> f64 {
        if self.orientation == Orientation::Clockwise {
            -1.0
        } else {
            1.0
        }
    }

    pub fn d_at(&self, phi: f64) -> f64 {
        let (c, s) = (phi.cos(), phi.sin());
        self.weight.p as f64 * c * c + self.weight.q as f64 * s * s
    }
}

pub fn characteristic_directions(ps: &PolarSystem) -> Result<Vec<CircleRoot>, BlowupError> {
    if ps.orientation == Orientation::Degenerate {
        return Err(BlowupError::DegenerateLeading(ps.weight));
    }
    Ok(ps.omega.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum MoClass {
    InMo,
    NotInMo { witness: f64 },
}

impl MoClass {
    pub fn is_mo(&self) -> bool {
        matches!(self, MoClass::InMo)
    }
}

pub fn mo_class_test(ps: &PolarSystem) -> Result<MoClass, BlowupError> {
    let omega = characteristic_directions(ps)?;
    Ok(match omega.first() {
        None => MoClass::InMo,
        Some(c) => MoClass::NotInMo { witness: c.angle },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::diagram::VectorField;

    fn field(p: &[(u32, u32, Rational)], q: &[(u32, u32, Rational)]) -> VectorField {
        VectorField::from_terms(p, q).unwrap()
    }

    fn andreev() -> VectorField {
        let one = || rat(1, 1);
        field(&[(0, 1, one())], &[(3, 0, rat(-1, 1))])
    }

    #[test]
    fn andreev_leading_components() {
        let ps = polar_components(&andreev(), Weight::new(1, 2).unwrap(), PolarOptions::default()).unwrap();
        assert_eq!(ps.r, 1);
        for k in 0..64 {
            let phi = 0.1 * k as f64;
            let (c, s) = (phi.cos(), phi.sin());
            assert!((ps.f(1).unwrap().eval(phi) - (1.0 - c * c) * c * s).abs() < 1e-14);
            assert!((ps.g(1).unwrap().eval(phi) - (-c.powi(4) - 2.0 * s * s)).abs() < 1e-14);
        }
        assert_eq!(ps.orientation, Orientation::Clockwise);
        assert_eq!(mo_class_test(&ps).unwrap(), MoClass::InMo);
    }

    #[test]
    fn manosa_one_characteristic_directions() {
        let a = rat(1, 1);
        let x = field(
            &[(1, 2, rat(1, 1)), (0, 3, rat(-1, 1)), (5, 0, a)],
            &[(7, 0, rat(2, 1)), (4, 1, rat(-1, 1)), (1, 2, rat(4, 1)), (0, 3, rat(1, 1))],
        );
        let ps = polar_components(&x, Weight::new(1, 1).unwrap(), PolarOptions::default()).unwrap();
        assert_eq!(ps.r, 2);
        for k in 0..64 {
            let phi = 0.1 * k as f64;
            let (c, s) = (phi.cos(), phi.sin());
            assert!((ps.g(2).unwrap().eval(phi) - s * s * (s * s + 4.0 * c * c)).abs() < 1e-14);
            assert!((ps.f(2).unwrap().eval(phi) - s * s * (1.0 + 3.0 * s * c)).abs() < 1e-14);
        }
        let omega = characteristic_directions(&ps).unwrap();
        assert_eq!(omega.len(), 2);
        assert!(omega[0].angle.abs() < 1e-9 && (omega[1].angle - PI).abs() < 1e-9);
        assert_eq!(mo_class_test(&ps).unwrap(), MoClass::NotInMo { witness: omega[0].angle });
    }

    #[test]
    fn linear_field_components() {
        let lam = rat(1, 10);
        let x = field(&[(0, 1, rat(-1, 1)), (1, 0, lam.clone())], &[(1, 0, rat(1, 1)), (0, 1, lam)]);
        let ps = polar_components(&x, Weight::new(1, 1).unwrap(), PolarOptions::default()).unwrap();
        assert_eq!(ps.r, 0);
        assert!((ps.g(0).unwrap().eval(0.3) - 1.0).abs() < 1e-15);
        assert!((ps.f(0).unwrap().eval(0.3) - 0.1).abs() < 1e-15);
        assert_eq!(ps.orientation, Orientation::Counterclockwise);
    }

    #[test]
    fn weight_must_be_in_diagram() {
        let err = polar_components(&andreev(), Weight::new(1, 1).unwrap(), PolarOptions::default()).unwrap_err();
        assert_eq!(err, BlowupError::WeightNotInDiagram(Weight { p: 1, q: 1 }));
        let opts = PolarOptions { allow_any_weight: true, ..Default::default() };
        assert!(polar_components(&andreev(), Weight::new(1, 1).unwrap(), opts).is_ok());
    }
}
