//! Multiscale hybridizable discontinuous Galerkin solver for second-order
//! elliptic problems in mixed form on two-level triangular meshes.

pub mod coarse_space;
pub mod error;
pub mod fem;
pub mod harness;
pub mod hdg;
pub mod homogenization;
pub mod mesh;
pub mod upscaled;

pub use error::{Error, Result};
