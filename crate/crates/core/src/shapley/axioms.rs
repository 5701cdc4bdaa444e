use serde::Serialize;

use super::{shapley_exact, AttributionResult};
use crate::coalition::{Coalition, TableValueFunction, ValueFunction};
use crate::error::{Error, Result};

/// Two payoffs closer than this are treated as equal when deciding whether a
/// player is a dummy or two players are symmetric.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub passed: bool,
    /// Largest violation observed (zero when the axiom's premise never holds).
    pub max_deviation: f64,
    /// Players or pairs the premise applied to.
    pub subjects: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub efficiency: AxiomCheck,
    pub dummy: AxiomCheck,
    pub symmetry: AxiomCheck,
    pub additivity: AxiomCheck,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.efficiency.passed && self.dummy.passed && self.symmetry.passed && self.additivity.passed
    }
}

fn check(deviations: impl IntoIterator<Item = (Vec<usize>, f64)>, tol: f64) -> AxiomCheck {
    let mut subjects = Vec::new();
    let mut max_deviation = 0.0f64;
    for (who, dev) in deviations {
        subjects.push(who);
        max_deviation = max_deviation.max(dev);
    }
    AxiomCheck {
        passed: max_deviation <= tol,
        max_deviation,
        subjects,
    }
}

fn is_dummy(v: &TableValueFunction, m: usize, j: usize) -> bool {
    let bit = 1u64 << j;
    (0..1u64 << m).filter(|b| b & bit == 0).all(|b| {
        let s = Coalition::from_bits_unchecked(m, b);
        (v.get(s.with(j)) - v.get(s)).abs() <= EQUALITY_TOLERANCE
    })
}

fn is_symmetric(v: &TableValueFunction, m: usize, i: usize, j: usize) -> bool {
    let pair = (1u64 << i) | (1u64 << j);
    (0..1u64 << m).filter(|b| b & pair == 0).all(|b| {
        let s = Coalition::from_bits_unchecked(m, b);
        (v.get(s.with(i)) - v.get(s.with(j))).abs() <= EQUALITY_TOLERANCE
    })
}

/// Verifies the four Shapley axioms for the exact attribution of `v1`, using
/// `v2` as the second game for additivity.
///
/// Axioms are properties of the value function, so this only ever inspects
/// the tables, never a model.
pub fn check_axioms(
    v1: &TableValueFunction,
    v2: &TableValueFunction,
    tol: f64,
) -> Result<AxiomReport> {
    let m = v1.num_features();
    if m != v2.num_features() {
        return Err(Error::argument(format!(
            "games have different feature counts ({m} vs {})",
            v2.num_features()
        )));
    }
    let phi1: AttributionResult = shapley_exact(v1)?;
    let phi2 = shapley_exact(v2)?;
    let sum = TableValueFunction::linear_combination(1.0, v1, 1.0, v2)?;
    let phi_sum = shapley_exact(&sum)?;

    let efficiency = check([(Vec::new(), phi1.efficiency_residual.abs())], tol);

    let dummy = check(
        (0..m)
            .filter(|&j| is_dummy(v1, m, j))
            .map(|j| (vec![j], phi1.phi[j].abs())),
        tol,
    );

    let symmetry = check(
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .filter(|&(i, j)| is_symmetric(v1, m, i, j))
            .map(|(i, j)| (vec![i, j], (phi1.phi[i] - phi1.phi[j]).abs())),
        tol,
    );

    let additivity = check(
        (0..m).map(|j| (vec![j], (phi_sum.phi[j] - phi1.phi[j] - phi2.phi[j]).abs())),
        tol,
    );

    Ok(AxiomReport {
        efficiency,
        dummy,
        symmetry,
        additivity,
    })
}
