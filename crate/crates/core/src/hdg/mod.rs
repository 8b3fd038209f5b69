//! Element-level HDG discretization: stabilization policies, local solvers
//! condensed onto face multipliers, and the HDG projection.

pub mod element;
pub mod projection;
pub mod tau;

pub use element::{element_operator, ElementInput, ElementOperator, LocalSolution, SourceFn};
pub use projection::hdg_projection;
pub use tau::{assign_tau, TauAssignment, TauPolicy};

#[cfg(test)]
mod tests;
