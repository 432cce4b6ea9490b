//! Numerical toolkit for model domains `{Im z₂ > P(z)}` in ℂ²: weights and potentials,
//! non-isotropic Carnot–Carathéodory geometry, and explicit Szegő/Bergman kernels of tube domains.

pub mod domain;
pub mod error;
pub mod geometry;
pub mod normalize;
pub mod quadrature;
pub mod smooth;
pub mod szego;

pub use error::{Error, Result};

/// Library version recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
