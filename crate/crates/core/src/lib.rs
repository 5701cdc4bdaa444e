//! Shapley-value feature attribution with pluggable value functions.
//!
//! The crate is organised around one contract, [`ValueFunction`], which maps a
//! [`Coalition`] of "present" features to a real payoff for a fixed explicand.
//! Backends in [`value_functions`] realise it by marginal (interventional) or
//! conditional (observational) averaging over a dataset or a Gaussian source;
//! [`shapley`] turns any of them into attributions, either by exact enumeration
//! or by permutation sampling; [`causal`] restricts the permutation average to
//! orderings consistent with a DAG and simulates linear-Gaussian SCMs under
//! `do`-interventions.
//!
//! Joint Gaussianity is assumed wherever a closed-form conditional expectation
//! is used: zero means, unit variances and a correlation alone do not make the
//! conditional expectation linear.
//!
//! With the default `parallel` feature, inner loops (coalition tables,
//! permutation draws, Monte Carlo blocks) run on rayon. Every random stream is
//! derived from `(seed, index)` so results do not depend on the schedule.

pub mod causal;
pub mod coalition;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod io;
pub mod models;
pub mod par;
pub mod rng;
pub mod shapley;
pub mod value_functions;

pub use coalition::{Coalition, TableValueFunction, ValueFunction, MAX_FEATURES};
pub use error::{Error, Result};
pub use gaussian::Gaussian;
pub use models::Model;
pub use shapley::{AttributionResult, Method};
