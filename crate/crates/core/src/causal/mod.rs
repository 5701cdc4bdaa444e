//! Causal structure over features: DAGs, ordering-restricted Shapley values
//! and linear-Gaussian structural causal models.

mod dag;
mod ordering;
mod scm;

pub use dag::{CausalDag, MAX_ORDERING_FEATURES};
pub use ordering::{ordering_restricted_shapley, symmetric_causal_average};
pub use scm::{do_expectation, Intervention, LinearGaussianScm};
