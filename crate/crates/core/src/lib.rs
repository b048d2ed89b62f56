//! Explicit Hilbert-space embeddings of free products, amalgams and
//! HNN-extensions, with exhaustive finite-ball verification of their
//! distortion and compression bounds.

pub mod cnd;
pub mod config;
pub mod constructions;
pub mod embeddings;
pub mod error;
pub mod estimator;
pub mod groups;
pub mod hilbert;
pub mod hnn_chains;

pub use error::{Error, Result};
