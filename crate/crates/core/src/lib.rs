pub mod cli;
pub mod error;
pub mod estimates;
pub mod exponents;
pub mod fractal;
pub mod geometry;
pub mod numerics;
pub mod sharpness;

pub use error::{Error, Result};
