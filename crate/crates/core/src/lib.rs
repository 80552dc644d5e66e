//! Numerical verification engine for locally conformally Kähler geometry.

pub mod calculus;
pub mod error;
pub mod lck;
pub mod manifolds;
pub mod potential;
pub mod report;
pub mod torus;

pub use error::{LckError, Result};
