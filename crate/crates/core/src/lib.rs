//! Anisotropic capillary geometry in the upper half-space.
//!
//! The crate provides Minkowski norms with exact derivative jets, capillary
//! Wulff shapes and their translated norms, an admissibility check for the
//! contact parameter `ω₀`, radial-graph geometry with capillary
//! quermassintegrals, and an explicit solver for the locally constrained,
//! volume-preserving anisotropic mean-curvature-type flow with its oblique
//! boundary condition.

pub mod ad;
pub mod condition;
pub mod config;
pub mod error;
pub mod expr;
pub mod flow;
pub mod linalg;
pub mod norms;
pub mod wulff;
pub mod sampling;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
