//! Inductive construction of a platform-specific review dictionary and the
//! adoption, term-frequency-gain and social-score analyses built on it.

pub mod analysis;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod induction;
pub mod manifest;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod taxonomy;

pub use error::{Error, Result};
