//! Monte Carlo sampling and topology statistics for nodal sets of random
//! band-limited Gaussian functions on the plane, the line and the round sphere.

pub mod campaign;
pub mod construct;
pub mod error;
pub mod field;
pub mod kacrice;
pub mod measures;
pub mod render;
pub mod rng;
pub mod special;
pub mod sphere;
pub mod topology;

pub use error::{Error, Result};
