use rand::seq::SliceRandom;

use super::{checked_value, AttributionResult, Method};
use crate::coalition::{Coalition, ValueFunction};
use crate::error::{Error, Result};
use crate::{par, rng};

#[derive(Debug, Clone, Copy)]
pub struct PermutationConfig {
    /// Number of sampled orderings. Each is paired with its reverse, so the
    /// value function sees `2 · n_permutations` walks.
    pub n_permutations: usize,
    pub seed: u64,
}

/// Monte Carlo estimate of Shapley values from random orderings.
///
/// Draw `k` shuffles `0..m` with sub-stream `(seed, k)`, then walks the
/// ordering forwards and backwards, recording each feature's marginal
/// contribution on entry. The per-draw statistic is the mean of the two walks,
/// and the reported standard error is the sample standard deviation of that
/// statistic over draws divided by `sqrt(n)`, so the antithetic pairing is
/// accounted for.
pub fn shapley_permutation_sampling<V: ValueFunction + ?Sized>(
    v: &V,
    config: &PermutationConfig,
) -> Result<AttributionResult> {
    let m = v.num_features();
    let n = config.n_permutations;
    if n < 2 {
        return Err(Error::argument(format!(
            "n_permutations must be at least 2, got {n}"
        )));
    }
    if m == 0 {
        return Err(Error::argument("value function has no features"));
    }
    let empty = Coalition::empty(m)?;
    let full = Coalition::full(m)?;
    let v_empty = checked_value(v, empty)?;
    let v_full = checked_value(v, full)?;

    let walk = |order: &mut dyn Iterator<Item = &usize>, out: &mut [f64]| -> Result<()> {
        let mut s = empty;
        let mut prev = v_empty;
        for &j in order {
            s = s.with(j);
            let cur = if s.is_full() { v_full } else { checked_value(v, s)? };
            out[j] += 0.5 * (cur - prev);
            prev = cur;
        }
        Ok(())
    };

    let draws = par::try_map_range(n, |k| {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng::substream(config.seed, k as u64));
        let mut contrib = vec![0.0; m];
        walk(&mut order.iter(), &mut contrib)?;
        walk(&mut order.iter().rev(), &mut contrib)?;
        Ok(contrib)
    })?;

    let nf = n as f64;
    let mut phi = vec![0.0; m];
    let mut std_errors = vec![0.0; m];
    for j in 0..m {
        let mean = draws.iter().map(|d| d[j]).sum::<f64>() / nf;
        let ss: f64 = draws.iter().map(|d| (d[j] - mean).powi(2)).sum();
        phi[j] = mean;
        std_errors[j] = (ss / (nf - 1.0)).sqrt() / nf.sqrt();
    }
    Ok(AttributionResult::new(
        v_empty,
        v_full,
        phi,
        Some(std_errors),
        Method::PermutationSampling,
        Some(config.seed),
    ))
}
