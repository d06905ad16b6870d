//! Hyper-reduced order modeling of elastoviscoplastic structures.

pub mod behavior;
pub mod csvio;
pub mod error;
pub mod fem;
pub mod fixtures;
pub mod hf;
pub mod hyper;
pub mod indicator;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod pipeline;
pub mod pod;
pub mod rom;
pub mod tensor;

pub use error::{Error, Result};
