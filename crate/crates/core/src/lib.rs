//! Unfitted finite elements with Nitsche boundary conditions on implicitly
//! defined 2D domains.
//!
//! The crate builds a structured background mesh, keeps the elements that
//! intersect the domain, integrates over cut cells with a bisection-based
//! tessellation and imposes Dirichlet data weakly. The Nitsche penalty is
//! chosen per element from a local generalized eigenproblem; an optional cap
//! turns elements with excessive parameters into plain penalty elements.

pub mod assembly;
pub mod diagnostics;
pub mod element;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod solve;
pub mod space;
pub mod stabilization;

pub use error::{Error, Result};
