//! Frames, invariants and reconstruction for surfaces with parallel normalized
//! mean curvature vector in E⁴ and E⁴₁.

pub mod canonical;
pub mod error;
pub mod frame_invariants;
pub mod meridian;
pub mod numerics;
pub mod pde;
pub mod pseudo_euclidean;
pub mod reconstruct;
pub mod surface;

pub use error::{Error, Result};
