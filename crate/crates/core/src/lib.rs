//! Center-focus analysis of monodromic singularities of planar polynomial vector fields.

pub mod algebra;
pub mod blowup;
pub mod branches;
pub mod classify;
pub mod cofactor;
pub mod diagram;
pub mod flow;
