pub mod bounds;
pub mod error;
pub mod experiments;
pub mod graphs;
pub mod model;
pub mod rng;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
