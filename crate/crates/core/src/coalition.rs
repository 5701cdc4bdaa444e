//! Coalitions, the value-function contract, and Shapley weights.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest feature count a [`Coalition`] can represent.
pub const MAX_FEATURES: usize = 64;

/// A subset of the feature indices `0..m`, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coalition {
    bits: u64,
    m: u8,
}

fn mask_for(m: usize) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl Coalition {
    fn check_m(m: usize) -> Result<()> {
        if m == 0 || m > MAX_FEATURES {
            return Err(Error::argument(format!(
                "feature count must be in 1..={MAX_FEATURES}, got {m}"
            )));
        }
        Ok(())
    }

    pub fn empty(m: usize) -> Result<Self> {
        Self::check_m(m)?;
        Ok(Coalition { bits: 0, m: m as u8 })
    }

    pub fn full(m: usize) -> Result<Self> {
        Self::check_m(m)?;
        Ok(Coalition {
            bits: mask_for(m),
            m: m as u8,
        })
    }

    pub fn from_bits(m: usize, bits: u64) -> Result<Self> {
        Self::check_m(m)?;
        if bits & !mask_for(m) != 0 {
            return Err(Error::argument(format!(
                "coalition bits {bits:#b} reference features >= {m}"
            )));
        }
        Ok(Coalition { bits, m: m as u8 })
    }

    pub fn from_indices(m: usize, indices: &[usize]) -> Result<Self> {
        Self::check_m(m)?;
        let mut bits = 0u64;
        for &j in indices {
            if j >= m {
                return Err(Error::argument(format!(
                    "feature index {j} out of range for {m} features"
                )));
            }
            bits |= 1 << j;
        }
        Ok(Coalition { bits, m: m as u8 })
    }

    /// Unchecked constructor for internal loops where `bits < 2^m` is known.
    pub(crate) fn from_bits_unchecked(m: usize, bits: u64) -> Self {
        debug_assert!(bits & !mask_for(m) == 0);
        Coalition { bits, m: m as u8 }
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn num_features(self) -> usize {
        self.m as usize
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn is_full(self) -> bool {
        self.bits == mask_for(self.m as usize)
    }

    pub fn contains(self, j: usize) -> bool {
        j < self.m as usize && self.bits & (1 << j) != 0
    }

    /// `self ∪ {j}`. Panics if `j` is out of range.
    pub fn with(self, j: usize) -> Self {
        assert!(j < self.m as usize, "feature {j} out of range");
        Coalition {
            bits: self.bits | (1 << j),
            ..self
        }
    }

    pub fn without(self, j: usize) -> Self {
        Coalition {
            bits: self.bits & !(1u64.checked_shl(j as u32).unwrap_or(0)),
            ..self
        }
    }

    pub fn complement(self) -> Self {
        Coalition {
            bits: !self.bits & mask_for(self.m as usize),
            ..self
        }
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.bits & !other.bits == 0
    }

    /// Member indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.m as usize).filter(move |&j| bits & (1 << j) != 0)
    }

    /// All `2^m` coalitions in mask order. Requires `m < 64`.
    pub fn all(m: usize) -> Result<impl Iterator<Item = Coalition>> {
        Self::check_m(m)?;
        if m >= 64 {
            return Err(Error::Capacity {
                what: "features for coalition enumeration",
                actual: m,
                limit: 63,
            });
        }
        Ok((0..1u64 << m).map(move |bits| Coalition { bits, m: m as u8 }))
    }

    /// Picks the entries of a full-length vector that belong to this coalition.
    pub fn select(self, full: &[f64]) -> Vec<f64> {
        self.indices().map(|j| full[j]).collect()
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, j) in self.indices().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        f.write_str("}")
    }
}

/// Payoff `v(S)` of every coalition for one fixed explicand.
///
/// Implementations must be pure: the same coalition always yields the same
/// value, from any thread.
pub trait ValueFunction: Sync {
    fn num_features(&self) -> usize;

    fn value(&self, s: Coalition) -> Result<f64>;
}

impl<V: ValueFunction + ?Sized> ValueFunction for &V {
    fn num_features(&self) -> usize {
        (**self).num_features()
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        (**self).value(s)
    }
}

/// Adapts a closure into a [`ValueFunction`].
pub struct FnValueFunction<F> {
    m: usize,
    f: F,
}

impl<F> FnValueFunction<F>
where
    F: Fn(Coalition) -> f64 + Sync,
{
    pub fn new(m: usize, f: F) -> Self {
        FnValueFunction { m, f }
    }
}

impl<F> ValueFunction for FnValueFunction<F>
where
    F: Fn(Coalition) -> f64 + Sync,
{
    fn num_features(&self) -> usize {
        self.m
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        Ok((self.f)(s))
    }
}

/// A game given explicitly by its payoff on all `2^m` coalitions, indexed by
/// coalition bitmask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableValueFunction {
    m: usize,
    values: Vec<f64>,
}

/// Largest feature count for which a full table is accepted.
pub const TABLE_MAX_FEATURES: usize = 24;

impl TableValueFunction {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || m > TABLE_MAX_FEATURES {
            return Err(Error::Capacity {
                what: "table features",
                actual: m,
                limit: TABLE_MAX_FEATURES,
            });
        }
        if values.len() != 1 << m {
            return Err(Error::argument(format!(
                "table for {m} features needs {} values, got {}",
                1usize << m,
                values.len()
            )));
        }
        if let Some((bits, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Evaluation {
                coalition: Coalition::from_bits_unchecked(m, bits as u64),
                value: v,
            });
        }
        Ok(TableValueFunction { m, values })
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(Coalition) -> f64) -> Result<Self> {
        if m == 0 || m > TABLE_MAX_FEATURES {
            return Err(Error::Capacity {
                what: "table features",
                actual: m,
                limit: TABLE_MAX_FEATURES,
            });
        }
        let values = (0..1u64 << m)
            .map(|bits| f(Coalition::from_bits_unchecked(m, bits)))
            .collect();
        Self::new(m, values)
    }

    /// Game with i.i.d. uniform payoffs on `[-1, 1)`.
    pub fn random(m: usize, seed: u64) -> Result<Self> {
        let mut rng = rng::substream(seed, 0);
        Self::from_fn(m, |_| rng.random_range(-1.0..1.0))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: Coalition) -> f64 {
        self.values[s.bits() as usize]
    }

    /// `alpha * a + beta * b`.
    pub fn linear_combination(alpha: f64, a: &Self, beta: f64, b: &Self) -> Result<Self> {
        if a.m != b.m {
            return Err(Error::argument(format!(
                "tables have different feature counts ({} vs {})",
                a.m, b.m
            )));
        }
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        Self::new(a.m, values)
    }
}

impl ValueFunction for TableValueFunction {
    fn num_features(&self) -> usize {
        self.m
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        if s.num_features() != self.m {
            return Err(Error::argument(format!(
                "coalition over {} features passed to a {}-feature table",
                s.num_features(),
                self.m
            )));
        }
        Ok(self.get(s))
    }
}

/// `|S|! (m - |S| - 1)! / m!`, the weight of a marginal contribution to a
/// coalition of size `s_size`.
///
/// Built from `1/m` by the ratio `w(k) = w(k-1) · k / (m-k)`, so no factorial
/// is ever formed.
pub fn shapley_weight(s_size: usize, m: usize) -> Result<f64> {
    if m == 0 || s_size >= m {
        return Err(Error::argument(format!(
            "coalition size {s_size} out of range for {m} features"
        )));
    }
    let mut w = 1.0 / m as f64;
    for k in 1..=s_size {
        w *= k as f64 / (m - k) as f64;
    }
    Ok(w)
}

/// Weights for every coalition size `0..m`.
pub fn shapley_weights(m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::argument("feature count must be positive"));
    }
    let mut out = Vec::with_capacity(m);
    let mut w = 1.0 / m as f64;
    out.push(w);
    for k in 1..m {
        w *= k as f64 / (m - k) as f64;
        out.push(w);
    }
    Ok(out)
}
