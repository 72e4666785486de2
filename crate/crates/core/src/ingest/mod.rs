//! Building evaluation-set corpora.
//!
//! Canonical JSONL is the interchange format; USR-style and MSDialog-style
//! JSON are converted into it.

mod forum;
mod jsonl;
mod usr;

pub use forum::{build_forum_sets, load_msdialog, read_msdialog, vote_gt_curve, ForumAnswer, ForumDialogue, VoteBin};
pub use jsonl::{load_jsonl, read_jsonl, write_jsonl};
pub use usr::{build_usr_sets, load_usr, read_usr, AnnotatedResponse, UsrContext};

use crate::text::EvaluationSet;

/// Sets produced by a loader or builder, with the number of inputs it
/// skipped (tied scores, too few responses, unusable dialogues).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub sets: Vec<EvaluationSet>,
    pub skipped: usize,
}
