//! High-order finite elements for heterogeneous Helmholtz problems on the
//! unit disk, with the boundary-operator symbols, spectral filters and study
//! harnesses built on top of them.

pub mod linsolve;
pub mod specfun;
pub mod mesh;
pub mod femcore;
pub mod boundary;
pub mod exact;
pub mod filters;
pub mod study;
