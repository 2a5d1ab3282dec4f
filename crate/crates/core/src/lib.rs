//! Inverse modified differential equations for numerical integrators, and
//! the neural vector-field training experiments that approximate them.

pub mod algebra;
pub mod bench;
pub mod cli;
pub mod discovery;
pub mod error;
pub mod imde;
pub mod integrators;
pub mod nn;

pub use error::{Error, Result};
