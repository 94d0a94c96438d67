//! Exact and truncated arithmetic kernels.

mod bipoly;
mod expr;
mod fourier;
pub mod quad;
mod roots;
mod scalar;
mod series;
mod unipoly;

pub use bipoly::{bivariate_gcd, BiPoly};
pub use expr::{parse_coefficient_expression, ExprError};
pub use fourier::{circle_roots, normalize_angle, trig_substitute, CircleRoot, CircleRootError, FourierPoly};
pub use roots::{bisect, polynomial_roots};
pub use scalar::{rat, rational_from_f64, rational_to_f64, recognize_rational, ComplexRational, Rational, Scalar};
pub use series::{SeriesError, TruncatedSeries};
pub use unipoly::UniPoly;
