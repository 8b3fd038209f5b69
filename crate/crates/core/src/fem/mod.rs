//! Reference-element machinery shared by the discretization modules.

pub mod basis;
pub mod coefficient;
pub mod projection;
pub mod quadrature;

pub use basis::{ScaledMonomials, SegmentBasis, SimplexBasis};
pub use coefficient::{make_two_scale, CellGrid, CoefficientField};
pub use projection::{l2_project_face, l2_project_segment};
pub use quadrature::{segment_quadrature, triangle_quadrature, QuadratureRule};

/// A point of the plane.
pub type Point = [f64; 2];
