pub mod cache;
pub mod config;
pub mod constants;
pub mod error;
pub mod lie;
pub mod lambda;
pub mod linalg;
pub mod modular;
pub mod moyal;
pub mod orbit;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod star;
pub mod suites;
pub mod unitary;

pub use error::{Error, Result};
pub use scalar::{Qi, Rational, Scalar};
