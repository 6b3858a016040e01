//! Curl-free edge-collocated advection schemes on periodic structured meshes,
//! with a von Neumann stability laboratory built on the same operator.

pub mod basis;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mesh;
pub mod reconstruction;
pub mod scalar;
pub mod semidiscrete;
pub mod timeint;
pub mod upwind;
pub mod vonneumann;

pub use error::{Error, Result};
