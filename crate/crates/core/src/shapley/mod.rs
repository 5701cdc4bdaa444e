//! Shapley attributions from a [`ValueFunction`].

mod axioms;
mod sampling;

pub use axioms::{check_axioms, AxiomCheck, AxiomReport, EQUALITY_TOLERANCE};
pub use sampling::{shapley_permutation_sampling, PermutationConfig};

use serde::{Deserialize, Serialize};

use crate::coalition::{shapley_weights, Coalition, ValueFunction};
use crate::error::{Error, Result};
use crate::par::{self, CompensatedSum};

/// Default cap on `m` for exact enumeration (`2^20` coalitions).
pub const DEFAULT_EXACT_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    PermutationSampling,
    /// Average over orderings consistent with a causal DAG.
    OrderingRestricted,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::PermutationSampling => "permutation_sampling",
            Method::OrderingRestricted => "ordering_restricted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Method::Exact),
            "permutation_sampling" => Some(Method::PermutationSampling),
            "ordering_restricted" => Some(Method::OrderingRestricted),
            _ => None,
        }
    }
}

/// Reference value `phi0 = v(∅)` and per-feature attributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionResult {
    pub phi0: f64,
    pub phi: Vec<f64>,
    /// `v(full) - v(∅) - Σ phi`.
    pub efficiency_residual: f64,
    pub std_errors: Option<Vec<f64>>,
    pub method: Method,
    pub seed: Option<u64>,
}

impl AttributionResult {
    pub(crate) fn new(
        v_empty: f64,
        v_full: f64,
        phi: Vec<f64>,
        std_errors: Option<Vec<f64>>,
        method: Method,
        seed: Option<u64>,
    ) -> Self {
        let total: CompensatedSum = phi.iter().copied().collect();
        AttributionResult {
            phi0: v_empty,
            efficiency_residual: v_full - v_empty - total.value(),
            phi,
            std_errors,
            method,
            seed,
        }
    }

    pub fn num_features(&self) -> usize {
        self.phi.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExactConfig {
    /// Largest `m` accepted for enumeration.
    pub max_features: usize,
    /// Evaluate every coalition once up front. When off, `v` is called for
    /// each term of the sum instead.
    pub cache: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            max_features: DEFAULT_EXACT_CAP,
            cache: true,
        }
    }
}

pub(crate) fn checked_value<V: ValueFunction + ?Sized>(v: &V, s: Coalition) -> Result<f64> {
    let value = v.value(s)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation {
            coalition: s,
            value,
        })
    }
}

/// Exact Shapley values by enumerating all coalitions, with default settings.
pub fn shapley_exact<V: ValueFunction + ?Sized>(v: &V) -> Result<AttributionResult> {
    shapley_exact_with(v, &ExactConfig::default())
}

pub fn shapley_exact_with<V: ValueFunction + ?Sized>(
    v: &V,
    config: &ExactConfig,
) -> Result<AttributionResult> {
    let m = v.num_features();
    if m == 0 {
        return Err(Error::argument("value function has no features"));
    }
    let cap = config.max_features.min(30);
    if m > cap {
        return Err(Error::Capacity {
            what: "features for exact enumeration",
            actual: m,
            limit: cap,
        });
    }
    let v_empty = checked_value(v, Coalition::from_bits_unchecked(m, 0))?;
    let v_full = checked_value(v, Coalition::full(m)?)?;
    let phi = if config.cache {
        let table = coalition_table(v)?;
        phi_from_table(&table, m)?
    } else {
        let weights = shapley_weights(m)?;
        par::try_map_range(m, |j| {
            let bit = 1u64 << j;
            let mut acc = CompensatedSum::default();
            for bits in (0..1u64 << m).filter(|b| b & bit == 0) {
                let s = Coalition::from_bits_unchecked(m, bits);
                let with = checked_value(v, s.with(j))?;
                let without = checked_value(v, s)?;
                acc.add(weights[s.len()] * (with - without));
            }
            Ok(acc.value())
        })?
    };
    Ok(AttributionResult::new(
        v_empty,
        v_full,
        phi,
        None,
        Method::Exact,
        None,
    ))
}

/// `v(S)` for every mask `S` in `0..2^m`, evaluated in parallel.
pub fn coalition_table<V: ValueFunction + ?Sized>(v: &V) -> Result<Vec<f64>> {
    let m = v.num_features();
    par::try_map_range(1usize << m, |bits| {
        checked_value(v, Coalition::from_bits_unchecked(m, bits as u64))
    })
}

/// Weighted sum of marginal contributions over a table indexed by mask.
pub fn phi_from_table(table: &[f64], m: usize) -> Result<Vec<f64>> {
    if table.len() != 1 << m {
        return Err(Error::argument(format!(
            "table length {} does not match {m} features",
            table.len()
        )));
    }
    let weights = shapley_weights(m)?;
    Ok(par::map_range(m, |j| {
        let bit = 1usize << j;
        let mut acc = CompensatedSum::default();
        for bits in (0..table.len()).filter(|b| b & bit == 0) {
            let size = bits.count_ones() as usize;
            acc.add(weights[size] * (table[bits | bit] - table[bits]));
        }
        acc.value()
    }))
}

/// Per-feature standard errors of exact attributions when each `v(S)` is an
/// independent estimate with standard error `se_table[S]`.
pub fn propagated_std_errors(se_table: &[f64], m: usize) -> Result<Vec<f64>> {
    if se_table.len() != 1 << m {
        return Err(Error::argument(format!(
            "standard-error table length {} does not match {m} features",
            se_table.len()
        )));
    }
    let weights = shapley_weights(m)?;
    Ok((0..m)
        .map(|j| {
            let bit = 1usize << j;
            let var: f64 = (0..se_table.len())
                .filter(|b| b & bit == 0)
                .map(|b| {
                    let w = weights[b.count_ones() as usize];
                    w * w * (se_table[b | bit].powi(2) + se_table[b].powi(2))
                })
                .sum();
            var.sqrt()
        })
        .collect())
}
