//! Numerical laboratory for critical circle maps: continued fractions,
//! closest returns, commuting pairs, slit-plane geometry, backward-orbit
//! instrumentation and a Blaschke model for Siegel Julia sets.

pub mod bounds;
pub mod circle_map;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod number_theory;
pub mod renorm;
pub mod siegel;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
