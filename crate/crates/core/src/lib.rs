//! Exact verification kernel for deformed q-operators over Novikov rings.

pub mod backend;
pub mod cohomology;
pub mod commands;
pub mod crossratio;
pub mod error;
pub mod linalg;
pub mod model;
pub mod novikov;
pub mod operators;
pub mod report;
pub mod signs;
pub mod structeq;

pub use error::{Error, Result};
