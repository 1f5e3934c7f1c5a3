pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod spectral;
pub mod stepper;
pub mod tableau;
pub mod verification;

pub use error::{Error, ErrorKind, Result};
