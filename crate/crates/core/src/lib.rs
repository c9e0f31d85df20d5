//! Schema compiler for enriched conceptual data models.
//!
//! The pipeline runs `parser` → `conformance` → `transform` → `tapi` →
//! `sql`, with `migrate` comparing two physical models for incremental
//! builds.

pub mod conformance;
pub mod migrate;
pub mod model;
pub mod parser;
pub mod sql;
pub mod tapi;
pub mod text;
pub mod transform;

#[cfg(feature = "testgen")]
pub mod testgen;

pub use model::*;

pub const GENERATOR_NAME: &str = "mcdforge";
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
