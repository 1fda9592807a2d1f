//! Continuous Lagrange spaces on curved disk meshes, assembly of the
//! Helmholtz sesquilinear form and error norms.

pub mod assembly;
pub mod norms;
pub mod quadrature;
pub mod reference;
pub mod space;

use thiserror::Error;

pub use assembly::{
    assemble, assemble_load, assemble_mass, assemble_stiffness, assemble_surface_stiffness, assemble_volume,
    boundary_mass, HelmholtzProblem, ProblemError,
};
pub use norms::{energy_projection, error_norms, interpolate, ErrorNorms, Field};
pub use quadrature::{quadrature_triangle, QuadratureRule};
pub use reference::ReferenceElement;
pub use space::{build_space, FeSpace};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("polynomial degree {0} outside 1..=8")]
    DegreeOutOfRange(usize),
    #[error("quadrature order {0} outside 1..=25")]
    UnsupportedQuadratureOrder(usize),
    #[error("non-finite coefficient: {0}")]
    NonFinite(&'static str),
    #[error("exact solution has zero norm")]
    ZeroExactNorm,
    #[error("vector length {found} does not match {expected} degrees of freedom")]
    LengthMismatch { expected: usize, found: usize },
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Boundary(#[from] crate::boundary::BoundaryError),
}

/// Assembly quadrature order for degree `p`.
pub fn assembly_order(p: usize) -> usize {
    2 * p + 3
}

/// Error-norm quadrature order for degree `p`.
pub fn norm_order(p: usize) -> usize {
    (2 * p + 6).min(quadrature::MAX_TRIANGLE_ORDER)
}
