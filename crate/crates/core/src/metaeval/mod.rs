//! Meta-evaluation: how well a metric's preferences agree with humans.

mod analysis;
mod power;
mod stats;

pub use analysis::{duplicate_bad, duplicate_text, pos_distribution};
pub use power::{predictive_power, AgreementVector, PowerResult};
pub use stats::{
    bonferroni, kendall_matrix, kendall_tau, ln_gamma, paired_ttest, regularized_incomplete_beta, student_t_two_sided_p,
};
