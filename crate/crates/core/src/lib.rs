//! Feature location from execution traces and source identifiers.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`trace`] ingests marked or complete execution traces and compresses
//!    repeated invocations.
//! 2. [`relevance`] scores methods TF-IDF style and drops omnipresent ones.
//! 3. [`lexicon`] tokenizes identifiers and comments from a facts file and
//!    builds the trace-by-identifier matrix.
//! 4. [`topics`] fits LDA with collapsed Gibbs sampling.
//! 5. [`analysis`] groups topics, aggregates class-topic weights and clusters
//!    classes with a fuzzy λ-cut.
//! 6. [`query`] indexes everything for free-text feature queries.
//!
//! [`pipeline`] chains the stages and persists artifacts; [`service`] serves a
//! finished run read-only over HTTP.

pub mod analysis;
pub mod error;
pub mod lexicon;
pub mod pipeline;
pub mod query;
pub mod relevance;
pub mod service;
pub mod topics;
pub mod trace;

pub use error::{Error, Result};
