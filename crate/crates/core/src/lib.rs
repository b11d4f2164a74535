//! Multirate infinitesimal GARK (MRI-GARK) time integrators.
pub mod cli;
pub mod convergence;
pub mod error;
pub mod field;
pub mod gark_expansion;
pub mod integrator;
pub mod order_conditions;
pub mod phi;
pub mod problems;
pub mod stability;
pub mod tableaux;

pub use error::{Error, Result};
