use super::dag::CausalDag;
use crate::coalition::{Coalition, ValueFunction};
use crate::error::{Error, Result};
use crate::par::{self, CompensatedSum};
use crate::shapley::{checked_value, AttributionResult, Method};

/// Shapley-style attribution averaged only over the orderings consistent
/// with `dag`: a feature's contribution in an ordering is its marginal
/// contribution on joining the features that precede it.
///
/// With a single edge `0 → 1` this is `(v({0}) - v(∅), v({0,1}) - v({0}))`;
/// over the empty graph it is the ordinary Shapley value.
pub fn ordering_restricted_shapley<V: ValueFunction + ?Sized>(
    v: &V,
    dag: &CausalDag,
) -> Result<AttributionResult> {
    let m = v.num_features();
    if m != dag.num_nodes() {
        return Err(Error::argument(format!(
            "value function has {m} features, DAG has {} nodes",
            dag.num_nodes()
        )));
    }
    let orderings = dag.consistent_orderings()?;

    // v is evaluated only on coalitions that occur as ordering prefixes.
    let mut needed = vec![false; 1 << m];
    for order in &orderings {
        let mut bits = 0usize;
        needed[0] = true;
        for &j in order {
            bits |= 1 << j;
            needed[bits] = true;
        }
    }
    let masks: Vec<usize> = (0..1 << m).filter(|&b| needed[b]).collect();
    let values = par::try_map_range(masks.len(), |k| {
        checked_value(v, Coalition::from_bits_unchecked(m, masks[k] as u64))
    })?;
    let mut table = vec![f64::NAN; 1 << m];
    for (b, val) in masks.iter().zip(values) {
        table[*b] = val;
    }

    let mut sums = vec![CompensatedSum::default(); m];
    for order in &orderings {
        let mut bits = 0usize;
        for &j in order {
            let next = bits | (1 << j);
            sums[j].add(table[next] - table[bits]);
            bits = next;
        }
    }
    let count = orderings.len() as f64;
    let phi = sums.iter().map(|s| s.value() / count).collect();
    Ok(AttributionResult::new(
        table[0],
        table[(1 << m) - 1],
        phi,
        None,
        Method::OrderingRestricted,
        None,
    ))
}

/// Componentwise mean of two attributions of the same game, typically the
/// left- and right-directed orderings of a two-feature graph.
pub fn symmetric_causal_average(
    right: &AttributionResult,
    left: &AttributionResult,
) -> Result<AttributionResult> {
    if right.num_features() != left.num_features() {
        return Err(Error::argument(format!(
            "attributions have {} and {} features",
            right.num_features(),
            left.num_features()
        )));
    }
    let scale = right.phi0.abs().max(left.phi0.abs()).max(1.0);
    if (right.phi0 - left.phi0).abs() > 1e-12 * scale {
        return Err(Error::argument(format!(
            "attributions have different reference values ({} vs {})",
            right.phi0, left.phi0
        )));
    }
    let phi = right
        .phi
        .iter()
        .zip(&left.phi)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    Ok(AttributionResult {
        phi0: right.phi0,
        phi,
        efficiency_residual: 0.5 * (right.efficiency_residual + left.efficiency_residual),
        std_errors: None,
        method: right.method,
        seed: None,
    })
}
