//! Learning mixtures with negative weights through complex tensor decomposition.

pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod linalg;
pub mod power;
pub mod rational;
pub mod rng;
pub mod tensor;
pub mod whitening;

pub use error::{Error, Result};
