//! Value-function backends `v(S)` for explaining one explicand.
//!
//! Marginal backends average the model with the coalition columns pinned to
//! the explicand and the remaining columns drawn from their unconditional
//! distribution. Conditional backends average over the distribution of the
//! remaining columns given the coalition's values. Each backend reads from
//! exactly one source, a dataset or a Gaussian, never both.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use ndarray::{Array2, Axis};
use serde::Serialize;

use crate::coalition::{Coalition, ValueFunction};
use crate::dataset::{self, restrict_rows, MatchTolerance, TabularDataset};
use crate::error::{Error, Result};
use crate::gaussian::Gaussian;
use crate::models::{batch_mean_estimate, LinearModel, Model};
use crate::rng;

/// Minimum draws per coalition for the Monte Carlo conditional backend.
pub const MIN_MC_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    MarginalEmpirical,
    MarginalGaussian,
    ConditionalGaussianClosed,
    ConditionalGaussianMc,
    ConditionalEmpirical,
}

impl Backend {
    pub const ALL: [Backend; 5] = [
        Backend::MarginalEmpirical,
        Backend::MarginalGaussian,
        Backend::ConditionalGaussianClosed,
        Backend::ConditionalGaussianMc,
        Backend::ConditionalEmpirical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::MarginalEmpirical => "marginal_empirical",
            Backend::MarginalGaussian => "marginal_gaussian",
            Backend::ConditionalGaussianClosed => "conditional_gaussian_closed",
            Backend::ConditionalGaussianMc => "conditional_gaussian_mc",
            Backend::ConditionalEmpirical => "conditional_empirical",
        }
    }

    pub fn needs_dataset(self) -> bool {
        matches!(self, Backend::MarginalEmpirical | Backend::ConditionalEmpirical)
    }

    pub fn needs_linear_model(self) -> bool {
        matches!(self, Backend::MarginalGaussian | Backend::ConditionalGaussianClosed)
    }

    pub fn is_stochastic(self) -> bool {
        !self.needs_linear_model()
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                Error::argument(format!(
                    "unknown backend {s:?}; expected one of {}",
                    Backend::ALL.map(Backend::name).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    Data(TabularDataset),
    Gaussian(Gaussian),
}

impl Source {
    pub fn dim(&self) -> usize {
        match self {
            Source::Data(d) => d.ncols(),
            Source::Gaussian(g) => g.dim(),
        }
    }
}

/// Everything needed to evaluate `v(S)` for one explicand.
#[derive(Debug, Clone)]
pub struct ValueFunctionSpec {
    pub backend: Backend,
    pub model: Model,
    pub explicand: Vec<f64>,
    pub source: Source,
    /// Draws per coalition for `conditional_gaussian_mc`.
    pub mc_samples: usize,
    pub seed: u64,
    /// Continuous matching band for `conditional_empirical`.
    pub tolerance: MatchTolerance,
    /// Average the matched rows as observed instead of pinning their
    /// coalition columns to the explicand.
    pub raw_matched: bool,
}

impl ValueFunctionSpec {
    pub fn new(backend: Backend, model: Model, explicand: Vec<f64>, source: Source) -> Self {
        ValueFunctionSpec {
            backend,
            model,
            explicand,
            source,
            mc_samples: 10_000,
            seed: 0,
            tolerance: MatchTolerance::default(),
            raw_matched: false,
        }
    }

    pub fn with_mc_samples(mut self, n: usize) -> Self {
        self.mc_samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tol: MatchTolerance) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_raw_matched(mut self, raw: bool) -> Self {
        self.raw_matched = raw;
        self
    }

    pub fn num_features(&self) -> usize {
        self.explicand.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.explicand.len();
        if m == 0 {
            return Err(Error::argument("explicand is empty"));
        }
        if self.explicand.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("explicand must be finite"));
        }
        if self.model.num_features() != m {
            return Err(Error::argument(format!(
                "explicand has {m} features, model expects {}",
                self.model.num_features()
            )));
        }
        if self.source.dim() != m {
            return Err(Error::argument(format!(
                "explicand has {m} features, source has {}",
                self.source.dim()
            )));
        }
        match (&self.source, self.backend.needs_dataset()) {
            (Source::Gaussian(_), true) => {
                return Err(Error::UnsupportedBackend {
                    backend: self.backend.name(),
                    reason: "a Gaussian source; it needs a dataset".into(),
                })
            }
            (Source::Data(_), false) => {
                return Err(Error::UnsupportedBackend {
                    backend: self.backend.name(),
                    reason: "a dataset source; it needs a Gaussian".into(),
                })
            }
            _ => {}
        }
        if self.backend.needs_linear_model() && self.model.as_linear().is_none() {
            return Err(Error::UnsupportedBackend {
                backend: self.backend.name(),
                reason: format!("{:?} models; only linear models have a closed form", self.model.kind()),
            });
        }
        if self.backend == Backend::ConditionalGaussianMc && self.mc_samples < MIN_MC_SAMPLES {
            return Err(Error::argument(format!(
                "mc_samples must be at least {MIN_MC_SAMPLES}, got {}",
                self.mc_samples
            )));
        }
        Ok(())
    }

    fn check_coalition(&self, s: Coalition) -> Result<()> {
        if s.num_features() != self.num_features() {
            return Err(Error::argument(format!(
                "coalition over {} features for a {}-feature explicand",
                s.num_features(),
                self.num_features()
            )));
        }
        Ok(())
    }

    fn f_explicand(&self) -> Result<f64> {
        self.model.evaluate(&self.explicand)
    }

    fn dataset(&self) -> Result<&TabularDataset> {
        match &self.source {
            Source::Data(d) => Ok(d),
            Source::Gaussian(_) => Err(Error::UnsupportedBackend {
                backend: self.backend.name(),
                reason: "a Gaussian source".into(),
            }),
        }
    }

    fn gaussian(&self) -> Result<&Gaussian> {
        match &self.source {
            Source::Gaussian(g) => Ok(g),
            Source::Data(_) => Err(Error::UnsupportedBackend {
                backend: self.backend.name(),
                reason: "a dataset source".into(),
            }),
        }
    }

    fn linear(&self) -> Result<&LinearModel> {
        self.model.as_linear().ok_or_else(|| Error::UnsupportedBackend {
            backend: self.backend.name(),
            reason: format!("{:?} models", self.model.kind()),
        })
    }
}

/// One `v(S)` estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// Monte Carlo / sampling standard error; `None` for closed forms.
    pub std_error: Option<f64>,
    /// Rows averaged over (empirical backends).
    pub rows: Option<usize>,
}

impl Evaluation {
    fn exact(value: f64) -> Self {
        Evaluation {
            value,
            std_error: None,
            rows: None,
        }
    }
}

/// Marginal average over the dataset with the coalition columns pinned.
pub fn v_marginal_empirical(spec: &ValueFunctionSpec, s: Coalition) -> Result<Evaluation> {
    spec.check_coalition(s)?;
    let data = spec.dataset()?;
    if s.is_full() {
        return Ok(Evaluation {
            value: spec.f_explicand()?,
            std_error: Some(0.0),
            rows: Some(data.nrows()),
        });
    }
    let est = if s.is_empty() {
        batch_mean_estimate(&spec.model, data.rows())?
    } else {
        let rows = dataset::replace_columns(data, s, &s.select(&spec.explicand))?;
        batch_mean_estimate(&spec.model, rows.view())?
    };
    Ok(Evaluation {
        value: est.mean,
        std_error: Some(est.std_error),
        rows: Some(est.n),
    })
}

/// Closed-form marginal value of a linear model:
/// `beta0 + Σ_{j∈S} beta_j x*_j + Σ_{j∉S} beta_j mu_j`.
pub fn v_marginal_gaussian(spec: &ValueFunctionSpec, s: Coalition) -> Result<f64> {
    spec.check_coalition(s)?;
    let lin = spec.linear()?;
    let g = spec.gaussian()?;
    if s.is_full() {
        return spec.f_explicand();
    }
    let mu = g.mean();
    Ok(lin.beta0
        + (0..lin.beta.len())
            .map(|j| lin.beta[j] * if s.contains(j) { spec.explicand[j] } else { mu[j] })
            .sum::<f64>())
}

/// Closed-form conditional value of a linear model: the out-of-coalition
/// coefficients applied to the Gaussian conditional mean.
pub fn v_conditional_gaussian_closed(spec: &ValueFunctionSpec, s: Coalition) -> Result<f64> {
    spec.check_coalition(s)?;
    let lin = spec.linear()?;
    let g = spec.gaussian()?;
    if s.is_full() {
        return spec.f_explicand();
    }
    if s.is_empty() {
        return Ok(lin.beta0 + lin.beta.iter().zip(g.mean().iter()).map(|(b, m)| b * m).sum::<f64>());
    }
    let cond_mean = g.conditional_mean(s, &s.select(&spec.explicand))?;
    let inside: f64 = s.indices().map(|j| lin.beta[j] * spec.explicand[j]).sum();
    let outside: f64 = s
        .complement()
        .indices()
        .zip(cond_mean.iter())
        .map(|(j, mu)| lin.beta[j] * mu)
        .sum();
    Ok(lin.beta0 + inside + outside)
}

/// Monte Carlo conditional value for any model. Draws for coalition `S` come
/// from sub-stream `(seed, mask(S))`.
pub fn v_conditional_gaussian_mc(spec: &ValueFunctionSpec, s: Coalition) -> Result<Evaluation> {
    spec.check_coalition(s)?;
    let g = spec.gaussian()?;
    if s.is_full() {
        return Ok(Evaluation {
            value: spec.f_explicand()?,
            std_error: Some(0.0),
            rows: None,
        });
    }
    let n = spec.mc_samples.max(1);
    let seed = rng::mix(spec.seed, s.bits());
    let rows = if s.is_empty() {
        g.sample(n, seed)?
    } else {
        let cond = g.conditional(s, &s.select(&spec.explicand))?;
        let draws = cond.sample(n, seed)?;
        let mut rows = Array2::zeros((n, spec.num_features()));
        for (k, j) in s.complement().indices().enumerate() {
            rows.column_mut(j).assign(&draws.column(k));
        }
        dataset::overwrite_columns(&mut rows, s, &s.select(&spec.explicand));
        rows
    };
    let est = batch_mean_estimate(&spec.model, rows.view())?;
    Ok(Evaluation {
        value: est.mean,
        std_error: Some(est.std_error),
        rows: None,
    })
}

/// Conditional value estimated from the dataset rows that match the
/// explicand on `S`. Fails with [`Error::ConditioningInfeasible`] when no row
/// matches.
pub fn v_conditional_empirical(spec: &ValueFunctionSpec, s: Coalition) -> Result<Evaluation> {
    spec.check_coalition(s)?;
    let data = spec.dataset()?;
    let x_s = s.select(&spec.explicand);
    let matched = restrict_rows(data, s, &x_s, spec.tolerance)?;
    if matched.is_empty() {
        return Err(Error::ConditioningInfeasible { coalition: s });
    }
    let mut rows = data.rows().select(Axis(0), &matched);
    if !spec.raw_matched {
        dataset::overwrite_columns(&mut rows, s, &x_s);
    }
    let est = batch_mean_estimate(&spec.model, rows.view())?;
    Ok(Evaluation {
        value: est.mean,
        std_error: Some(est.std_error),
        rows: Some(matched.len()),
    })
}

/// Standard errors of the exact marginal-empirical attribution.
///
/// The marginal value averages one game per background row, and Shapley
/// values are linear in the game, so the attribution is the mean of per-row
/// attributions. Their spread gives the standard error even though every
/// coalition is estimated from the same rows.
pub fn marginal_empirical_std_errors(spec: &ValueFunctionSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let data = spec.dataset()?;
    let m = spec.num_features();
    if m > crate::shapley::DEFAULT_EXACT_CAP {
        return Err(Error::Capacity {
            what: "features for exact enumeration",
            actual: m,
            limit: crate::shapley::DEFAULT_EXACT_CAP,
        });
    }
    let rows = data.rows();
    let per_row = crate::par::try_map_range(data.nrows(), |i| {
        let row = rows.row(i);
        let mut x = vec![0.0; m];
        let table: Vec<f64> = (0..1u64 << m)
            .map(|bits| {
                for j in 0..m {
                    x[j] = if bits & (1 << j) != 0 { spec.explicand[j] } else { row[j] };
                }
                spec.model.eval_unchecked(&x)
            })
            .collect();
        crate::shapley::phi_from_table(&table, m)
    })?;
    (0..m)
        .map(|j| {
            let col: Vec<f64> = per_row.iter().map(|p| p[j]).collect();
            crate::models::MeanEstimate::from_values(&col).map(|e| e.std_error)
        })
        .collect()
}

/// Evaluates `spec` on any coalition, without memoization.
pub fn evaluate_uncached(spec: &ValueFunctionSpec, s: Coalition) -> Result<Evaluation> {
    match spec.backend {
        Backend::MarginalEmpirical => v_marginal_empirical(spec, s),
        Backend::MarginalGaussian => v_marginal_gaussian(spec, s).map(Evaluation::exact),
        Backend::ConditionalGaussianClosed => {
            v_conditional_gaussian_closed(spec, s).map(Evaluation::exact)
        }
        Backend::ConditionalGaussianMc => v_conditional_gaussian_mc(spec, s),
        Backend::ConditionalEmpirical => v_conditional_empirical(spec, s),
    }
}

/// A validated spec plus its memo table; implements [`ValueFunction`].
#[derive(Debug)]
pub struct ModelValueFunction {
    spec: ValueFunctionSpec,
    memo: RwLock<HashMap<u64, Evaluation>>,
}

impl ModelValueFunction {
    pub fn new(spec: ValueFunctionSpec) -> Result<Self> {
        spec.validate()?;
        Ok(ModelValueFunction {
            spec,
            memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &ValueFunctionSpec {
        &self.spec
    }

    pub fn evaluate(&self, s: Coalition) -> Result<Evaluation> {
        if let Some(e) = self.memo.read().expect("memo lock").get(&s.bits()) {
            return Ok(*e);
        }
        let e = evaluate_uncached(&self.spec, s)?;
        self.memo.write().expect("memo lock").insert(s.bits(), e);
        Ok(e)
    }

    /// Number of distinct coalitions evaluated so far.
    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }

    /// Standard error of every coalition's estimate, indexed by mask; zero
    /// for closed-form backends.
    pub fn std_error_table(&self) -> Result<Vec<f64>> {
        let m = self.spec.num_features();
        Coalition::all(m)?
            .map(|s| self.evaluate(s).map(|e| e.std_error.unwrap_or(0.0)))
            .collect()
    }
}

impl ValueFunction for ModelValueFunction {
    fn num_features(&self) -> usize {
        self.spec.num_features()
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        self.evaluate(s).map(|e| e.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnKind;
    use ndarray::array;

    fn lin12() -> Model {
        Model::linear(0.0, vec![1.0, 2.0]).unwrap()
    }

    fn c(m: usize, idx: &[usize]) -> Coalition {
        Coalition::from_indices(m, idx).unwrap()
    }

    fn centred_data() -> TabularDataset {
        TabularDataset::continuous(array![[1.0, -2.0], [-1.0, 2.0], [0.5, 1.0], [-0.5, -1.0]]).unwrap()
    }

    #[test]
    fn marginal_empirical_examples() {
        let spec = ValueFunctionSpec::new(
            Backend::MarginalEmpirical,
            lin12(),
            vec![1.0, 1.0],
            Source::Data(centred_data()),
        );
        assert!((v_marginal_empirical(&spec, c(2, &[0])).unwrap().value - 1.0).abs() < 1e-15);
        assert_eq!(v_marginal_empirical(&spec, c(2, &[0, 1])).unwrap().value, 3.0);
        let constant = ValueFunctionSpec {
            model: Model::linear(4.0, vec![0.0, 0.0]).unwrap(),
            ..spec.clone()
        };
        for s in Coalition::all(2).unwrap() {
            assert_eq!(v_marginal_empirical(&constant, s).unwrap().value, 4.0);
        }
    }

    #[test]
    fn marginal_gaussian_ignores_correlation() {
        for rho in [-0.7, 0.0, 0.5] {
            let spec = ValueFunctionSpec::new(
                Backend::MarginalGaussian,
                Model::linear(0.25, vec![1.0, 2.0]).unwrap(),
                vec![1.0, 1.0],
                Source::Gaussian(Gaussian::standardized_bivariate(rho).unwrap()),
            );
            assert_eq!(v_marginal_gaussian(&spec, c(2, &[0])).unwrap(), 1.25);
            assert_eq!(v_marginal_gaussian(&spec, c(2, &[])).unwrap(), 0.25);
        }
    }

    #[test]
    fn conditional_closed_examples() {
        let spec = ValueFunctionSpec::new(
            Backend::ConditionalGaussianClosed,
            lin12(),
            vec![1.0, 1.0],
            Source::Gaussian(Gaussian::standardized_bivariate(0.5).unwrap()),
        );
        assert!((v_conditional_gaussian_closed(&spec, c(2, &[0])).unwrap() - 2.0).abs() < 1e-15);
        assert!((v_conditional_gaussian_closed(&spec, c(2, &[1])).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(v_conditional_gaussian_closed(&spec, c(2, &[])).unwrap(), 0.0);
        assert_eq!(v_conditional_gaussian_closed(&spec, c(2, &[0, 1])).unwrap(), 3.0);
    }

    #[test]
    fn closed_forms_need_linear_models() {
        let inter = Model::interaction(0.0, vec![0.0, 0.0], vec![(0, 1, 1.0)]).unwrap();
        for b in [Backend::MarginalGaussian, Backend::ConditionalGaussianClosed] {
            let spec = ValueFunctionSpec::new(
                b,
                inter.clone(),
                vec![1.0, 1.0],
                Source::Gaussian(Gaussian::standardized_bivariate(0.5).unwrap()),
            );
            assert!(matches!(
                ModelValueFunction::new(spec),
                Err(Error::UnsupportedBackend { .. })
            ));
        }
    }

    #[test]
    fn source_must_match_backend() {
        let spec = ValueFunctionSpec::new(
            Backend::MarginalEmpirical,
            lin12(),
            vec![1.0, 1.0],
            Source::Gaussian(Gaussian::standardized_bivariate(0.5).unwrap()),
        );
        assert!(matches!(spec.validate(), Err(Error::UnsupportedBackend { .. })));
        let spec = ValueFunctionSpec::new(
            Backend::ConditionalGaussianMc,
            lin12(),
            vec![1.0, 1.0],
            Source::Data(centred_data()),
        );
        assert!(spec.validate().is_err());
        let spec = ValueFunctionSpec::new(
            Backend::MarginalEmpirical,
            lin12(),
            vec![1.0, 1.0, 0.0],
            Source::Data(centred_data()),
        );
        assert!(matches!(spec.validate(), Err(Error::Argument(_))));
    }

    #[test]
    fn mc_full_coalition_is_exact() {
        let spec = ValueFunctionSpec::new(
            Backend::ConditionalGaussianMc,
            Model::interaction(0.0, vec![0.0, 0.0], vec![(0, 1, 1.0)]).unwrap(),
            vec![2.0, 3.0],
            Source::Gaussian(Gaussian::standardized_bivariate(0.4).unwrap()),
        )
        .with_mc_samples(1000);
        let e = v_conditional_gaussian_mc(&spec, c(2, &[0, 1])).unwrap();
        assert_eq!(e.value, 6.0);
        assert_eq!(e.std_error, Some(0.0));
        let low = spec.clone().with_mc_samples(10);
        assert!(low.validate().is_err());
    }

    #[test]
    fn mc_interaction_recovers_correlation() {
        let rho = 0.6;
        let spec = ValueFunctionSpec::new(
            Backend::ConditionalGaussianMc,
            Model::interaction(0.0, vec![0.0, 0.0], vec![(0, 1, 1.0)]).unwrap(),
            vec![2.0, 3.0],
            Source::Gaussian(Gaussian::standardized_bivariate(rho).unwrap()),
        )
        .with_mc_samples(100_000)
        .with_seed(3);
        let e = v_conditional_gaussian_mc(&spec, c(2, &[])).unwrap();
        assert!((e.value - rho).abs() <= 3.0 * e.std_error.unwrap(), "{e:?}");
    }

    fn binary_data() -> TabularDataset {
        TabularDataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![ColumnKind::Discrete; 3],
            array![
                [1.0, 0.0, 1.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 1.0],
                [1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0]
            ],
        )
        .unwrap()
    }

    #[test]
    fn conditional_empirical_averages_matching_rows_only() {
        let model = Model::linear(0.0, vec![1.0, 10.0, 100.0]).unwrap();
        let spec = ValueFunctionSpec::new(
            Backend::ConditionalEmpirical,
            model.clone(),
            vec![1.0, 0.0, 1.0],
            Source::Data(binary_data()),
        );
        let e = v_conditional_empirical(&spec, c(3, &[0])).unwrap();
        // rows 0, 1, 3
        assert_eq!(e.rows, Some(3));
        assert!((e.value - (101.0 + 11.0 + 1.0) / 3.0).abs() < 1e-12);
        let all = v_conditional_empirical(&spec, c(3, &[])).unwrap();
        assert!((all.value - (101.0 + 11.0 + 110.0 + 1.0 + 100.0) / 5.0).abs() < 1e-12);
        assert_eq!(v_conditional_empirical(&spec, c(3, &[0, 1, 2])).unwrap().value, 101.0);

        let missing = ValueFunctionSpec {
            explicand: vec![0.0, 1.0, 0.0],
            ..spec
        };
        assert!(matches!(
            v_conditional_empirical(&missing, c(3, &[0, 1, 2])),
            Err(Error::ConditioningInfeasible { .. })
        ));
    }

    #[test]
    fn match_count_shrinks_with_larger_coalitions() {
        let spec = ValueFunctionSpec::new(
            Backend::ConditionalEmpirical,
            Model::linear(0.0, vec![1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, 0.0, 1.0],
            Source::Data(binary_data()),
        )
        .with_tolerance(MatchTolerance::Absolute(0.0));
        for s in Coalition::all(3).unwrap() {
            let n = v_conditional_empirical(&spec, s).unwrap().rows.unwrap();
            for j in s.complement().indices() {
                let n2 = v_conditional_empirical(&spec, s.with(j)).unwrap().rows.unwrap();
                assert!(n2 <= n);
            }
        }
    }

    #[test]
    fn memo_evaluates_each_coalition_once() {
        let vf = ModelValueFunction::new(ValueFunctionSpec::new(
            Backend::ConditionalGaussianClosed,
            lin12(),
            vec![1.0, 1.0],
            Source::Gaussian(Gaussian::standardized_bivariate(0.5).unwrap()),
        ))
        .unwrap();
        crate::shapley::shapley_exact(&vf).unwrap();
        assert_eq!(vf.memo_len(), 4);
        assert_eq!(vf.value(c(2, &[1])).unwrap(), 2.5);
    }

    #[test]
    fn backend_names_parse() {
        for b in Backend::ALL {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
        assert!("kernel_shap".parse::<Backend>().is_err());
    }
}
