//! POS-aware reference-based evaluation for dialogue responses.
//!
//! The main entry points are [`posmetrics::posscore`], the base metrics in
//! [`metrics`], and the meta-evaluation routines in [`metaeval`].

pub mod embed;
pub mod error;
pub mod ingest;
pub mod metaeval;
pub mod metrics;
pub mod pipeline;
pub mod posmetrics;
pub mod tagger;
pub mod tags;
pub mod text;

pub use error::{Error, Result};
pub use tags::{PosTag, TagSet};
pub use text::{EvaluationSet, Slot, TaggedSentence, Token};
