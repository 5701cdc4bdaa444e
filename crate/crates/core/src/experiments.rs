//! Named end-to-end experiments over fixed parameter grids.
//!
//! Each experiment compares a computed quantity against an independently
//! obtained expected value and records both, so a report can be audited row
//! by row. Algebraic identities are held to [`CLOSED_FORM_TOL`]; Monte Carlo
//! comparisons to [`MC_SIGMAS`] combined standard errors.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::causal::{do_expectation, ordering_restricted_shapley, symmetric_causal_average};
use crate::causal::{CausalDag, LinearGaussianScm};
use crate::coalition::Coalition;
use crate::dataset::{self, ExtrapolationFlag, TabularDataset};
use crate::error::{Error, Result};
use crate::gaussian::Gaussian;
use crate::models::Model;
use crate::shapley::{propagated_std_errors, shapley_exact, AttributionResult};
use crate::value_functions::{
    marginal_empirical_std_errors, v_marginal_empirical, Backend, ModelValueFunction, Source,
    ValueFunctionSpec,
};
use crate::{par, rng};

pub const RHO_GRID: [f64; 7] = [-0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9];

/// `(beta0, beta1, beta2)` for the two-feature linear model.
pub const BETA_GRID: [[f64; 3]; 4] = [
    [0.0, 1.0, 2.0],
    [1.5, -0.5, 2.0],
    [-1.0, 2.0, -3.0],
    [0.25, 0.0, 1.0],
];

/// Coefficient choices with `beta1 = 0`.
pub const DUMMY_BETA_GRID: [[f64; 3]; 3] = [[0.0, 0.0, 1.0], [1.0, 0.0, 2.0], [-0.5, 0.0, -1.5]];

pub const EXPLICAND_GRID: [[f64; 2]; 3] = [[1.0, 1.0], [2.0, -0.5], [-1.5, 0.75]];

pub const CLOSED_FORM_TOL: f64 = 1e-9;
pub const MC_SIGMAS: f64 = 3.0;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DO_EQUIVALENCE_SAMPLES: usize = 200_000;
pub const DO_EQUIVALENCE_RHOS: [f64; 3] = [-0.9, 0.0, 0.9];
pub const DO_EQUIVALENCE_EXPLICAND: [f64; 2] = [2.0, -0.5];
pub const EXTRAPOLATION_SAMPLES: usize = 1000;
pub const EXTRAPOLATION_RHOS: [f64; 2] = [0.9, 0.0];
pub const EXTRAPOLATION_EXPLICAND: [f64; 2] = [2.0, 2.0];
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Eq36,
    DummyViolation,
    Eq44,
    DoEquivalence,
    RhoZero,
    MarginalLinear,
    Extrapolation,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::Eq36,
        ExperimentName::DummyViolation,
        ExperimentName::Eq44,
        ExperimentName::DoEquivalence,
        ExperimentName::RhoZero,
        ExperimentName::MarginalLinear,
        ExperimentName::Extrapolation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentName::Eq36 => "eq36",
            ExperimentName::DummyViolation => "dummy-violation",
            ExperimentName::Eq44 => "eq44",
            ExperimentName::DoEquivalence => "do-equivalence",
            ExperimentName::RhoZero => "rho-zero",
            ExperimentName::MarginalLinear => "marginal-linear",
            ExperimentName::Extrapolation => "extrapolation",
        }
    }

    fn is_stochastic(self) -> bool {
        matches!(
            self,
            ExperimentName::DoEquivalence
                | ExperimentName::RhoZero
                | ExperimentName::MarginalLinear
                | ExperimentName::Extrapolation
        )
    }

    fn default_samples(self) -> usize {
        match self {
            ExperimentName::DoEquivalence => DO_EQUIVALENCE_SAMPLES,
            ExperimentName::Extrapolation => EXTRAPOLATION_SAMPLES,
            _ => DEFAULT_SAMPLES,
        }
    }

    fn default_rhos(self) -> Vec<f64> {
        match self {
            ExperimentName::DoEquivalence => DO_EQUIVALENCE_RHOS.to_vec(),
            ExperimentName::Extrapolation => EXTRAPOLATION_RHOS.to_vec(),
            ExperimentName::RhoZero => vec![0.0],
            _ => RHO_GRID.to_vec(),
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::argument(format!(
                    "unknown experiment {s:?}; expected one of {}",
                    ExperimentName::ALL.map(ExperimentName::name).join(", ")
                ))
            })
    }
}

/// Optional overrides of an experiment's grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    pub rhos: Option<Vec<f64>>,
    pub samples: Option<usize>,
}

impl ExperimentParams {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::argument(format!("params: {e}")))
    }

    fn resolve(&self, name: ExperimentName) -> Result<(Vec<f64>, usize)> {
        if name == ExperimentName::RhoZero && self.rhos.is_some() {
            return Err(Error::argument("params.rhos: rho-zero runs at rho = 0 only"));
        }
        if !name.is_stochastic() && self.samples.is_some() {
            return Err(Error::argument(format!(
                "params.samples: {name} is deterministic and draws no samples"
            )));
        }
        let rhos = self.rhos.clone().unwrap_or_else(|| name.default_rhos());
        if rhos.is_empty() {
            return Err(Error::argument("params.rhos: must not be empty"));
        }
        for (i, &r) in rhos.iter().enumerate() {
            if r.is_nan() || r.abs() >= 1.0 {
                return Err(Error::argument(format!(
                    "params.rhos[{i}]: correlation must satisfy |rho| < 1, got {r}"
                )));
            }
        }
        let samples = self.samples.unwrap_or_else(|| name.default_samples());
        if samples < MIN_SAMPLES {
            return Err(Error::argument(format!(
                "params.samples: must be at least {MIN_SAMPLES}, got {samples}"
            )));
        }
        if name == ExperimentName::Extrapolation {
            let a = rhos.iter().map(|r| r.abs());
            let lo = a.clone().fold(f64::INFINITY, f64::min);
            let hi = a.fold(0.0, f64::max);
            if hi == lo {
                return Err(Error::argument(
                    "params.rhos: extrapolation needs at least two distinct |rho| values",
                ));
            }
        }
        Ok((rhos, samples))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|computed - expected| <= tolerance`.
    AbsDiff,
    /// `computed > expected`; the tolerance is unused and zero.
    GreaterThan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub point: String,
    pub expected: f64,
    pub computed: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl ReportRow {
    pub fn within(point: impl Into<String>, expected: f64, computed: f64, tolerance: f64) -> Self {
        let abs_diff = (computed - expected).abs();
        ReportRow {
            point: point.into(),
            expected,
            computed,
            abs_diff,
            tolerance,
            comparison: Comparison::AbsDiff,
            pass: abs_diff <= tolerance,
        }
    }

    pub fn greater_than(point: impl Into<String>, expected: f64, computed: f64) -> Self {
        ReportRow {
            point: point.into(),
            expected,
            computed,
            abs_diff: (computed - expected).abs(),
            tolerance: 0.0,
            comparison: Comparison::GreaterThan,
            pass: computed > expected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: Value,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub passed: bool,
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["point", "expected", "computed", "abs_diff", "tolerance", "comparison", "pass"])
            .map_err(csv_err)?;
        for r in &self.rows {
            let cmp = match r.comparison {
                Comparison::AbsDiff => "abs_diff",
                Comparison::GreaterThan => "greater_than",
            };
            w.write_record([
                r.point.clone(),
                r.expected.to_string(),
                r.computed.to_string(),
                r.abs_diff.to_string(),
                r.tolerance.to_string(),
                cmp.to_string(),
                r.pass.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Conditional Shapley values of `beta0 + beta1 x1 + beta2 x2` under a
/// standardized bivariate Gaussian with correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormAttribution {
    pub phi0: f64,
    pub phi: [f64; 2],
    /// `f(x*) - phi0 - phi1 - phi2`; zero up to rounding.
    pub efficiency_residual: f64,
}

pub fn eq36_closed_form(beta: [f64; 3], rho: f64, x_star: [f64; 2]) -> Result<ClosedFormAttribution> {
    if rho.is_nan() || rho.abs() >= 1.0 {
        return Err(Error::argument(format!("correlation must satisfy |rho| < 1, got {rho}")));
    }
    let [b0, b1, b2] = beta;
    let [x1, x2] = x_star;
    let phi1 = b1 * x1 + rho / 2.0 * (b2 * x1 - b1 * x2);
    let phi2 = b2 * x2 + rho / 2.0 * (b1 * x2 - b2 * x1);
    let f = b0 + b1 * x1 + b2 * x2;
    Ok(ClosedFormAttribution {
        phi0: b0,
        phi: [phi1, phi2],
        efficiency_residual: f - b0 - phi1 - phi2,
    })
}

pub fn run_experiment(name: ExperimentName, params: &ExperimentParams, seed: u64) -> Result<ExperimentReport> {
    let (rhos, samples) = params.resolve(name)?;
    let start = Instant::now();
    let rows = match name {
        ExperimentName::Eq36 => eq36(&rhos)?,
        ExperimentName::DummyViolation => dummy_violation(&rhos)?,
        ExperimentName::Eq44 => eq44(&rhos)?,
        ExperimentName::DoEquivalence => do_equivalence(&rhos, samples, seed)?,
        ExperimentName::RhoZero => rho_zero(samples, seed)?,
        ExperimentName::MarginalLinear => marginal_linear(&rhos, samples, seed)?,
        ExperimentName::Extrapolation => extrapolation(&rhos, samples, seed)?,
    };
    let mut used = serde_json::json!({ "rhos": rhos });
    if name.is_stochastic() {
        used["samples"] = samples.into();
    }
    Ok(ExperimentReport {
        name: name.name().to_string(),
        params: used,
        seed,
        passed: rows.iter().all(|r| r.pass),
        rows,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Grid points in row-major order of `(a, b, c)`.
fn grid3<A: Copy, B: Copy, C: Copy>(a: &[A], b: &[B], c: &[C]) -> Vec<(A, B, C)> {
    let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
    for &i in a {
        for &j in b {
            for &k in c {
                out.push((i, j, k));
            }
        }
    }
    out
}

/// Runs `f` on every grid point, possibly in parallel, keeping grid order.
fn fan_out<P: Sync, F>(points: &[P], f: F) -> Result<Vec<ReportRow>>
where
    F: Fn(usize, &P) -> Result<Vec<ReportRow>> + Sync,
{
    let chunks = par::try_map_range(points.len(), |k| f(k, &points[k]))?;
    Ok(chunks.into_iter().flatten().collect())
}

fn linear(beta: [f64; 3]) -> Result<Model> {
    Model::linear(beta[0], vec![beta[1], beta[2]])
}

fn label(rho: f64, beta: [f64; 3], x: [f64; 2]) -> String {
    format!("rho={rho} beta=({},{},{}) x=({},{})", beta[0], beta[1], beta[2], x[0], x[1])
}

fn value_function(backend: Backend, model: Model, x: &[f64], source: Source) -> Result<ModelValueFunction> {
    ModelValueFunction::new(ValueFunctionSpec::new(backend, model, x.to_vec(), source))
}

fn gaussian_attribution(backend: Backend, beta: [f64; 3], rho: f64, x: [f64; 2]) -> Result<AttributionResult> {
    let g = Gaussian::standardized_bivariate(rho)?;
    let v = value_function(backend, linear(beta)?, &x, Source::Gaussian(g))?;
    shapley_exact(&v)
}

fn sample_dataset(g: &Gaussian, n: usize, seed: u64) -> Result<TabularDataset> {
    TabularDataset::continuous(g.sample(n, seed)?)
}

fn eq36(rhos: &[f64]) -> Result<Vec<ReportRow>> {
    let points = grid3(rhos, &BETA_GRID, &EXPLICAND_GRID);
    fan_out(&points, |_, &(rho, beta, x)| {
        let want = eq36_closed_form(beta, rho, x)?;
        let got = gaussian_attribution(Backend::ConditionalGaussianClosed, beta, rho, x)?;
        let at = label(rho, beta, x);
        Ok(vec![
            ReportRow::within(format!("{at} phi0"), want.phi0, got.phi0, CLOSED_FORM_TOL),
            ReportRow::within(format!("{at} phi1"), want.phi[0], got.phi[0], CLOSED_FORM_TOL),
            ReportRow::within(format!("{at} phi2"), want.phi[1], got.phi[1], CLOSED_FORM_TOL),
        ])
    })
}

fn dummy_violation(rhos: &[f64]) -> Result<Vec<ReportRow>> {
    let points = grid3(rhos, &DUMMY_BETA_GRID, &EXPLICAND_GRID);
    fan_out(&points, |_, &(rho, beta, x)| {
        let conditional = gaussian_attribution(Backend::ConditionalGaussianClosed, beta, rho, x)?;
        let marginal = gaussian_attribution(Backend::MarginalGaussian, beta, rho, x)?;
        let at = label(rho, beta, x);
        Ok(vec![
            ReportRow::within(
                format!("{at} conditional phi1"),
                rho / 2.0 * beta[2] * x[0],
                conditional.phi[0],
                CLOSED_FORM_TOL,
            ),
            ReportRow::within(format!("{at} marginal phi1"), 0.0, marginal.phi[0], CLOSED_FORM_TOL),
        ])
    })
}

fn eq44(rhos: &[f64]) -> Result<Vec<ReportRow>> {
    let points = grid3(rhos, &BETA_GRID, &EXPLICAND_GRID);
    let right_dag = CausalDag::chain(2)?;
    let left_dag = CausalDag::reverse_chain(2)?;
    fan_out(&points, |_, &(rho, beta, x)| {
        let g = Gaussian::standardized_bivariate(rho)?;
        let v = value_function(Backend::ConditionalGaussianClosed, linear(beta)?, &x, Source::Gaussian(g))?;
        let right = ordering_restricted_shapley(&v, &right_dag)?;
        let left = ordering_restricted_shapley(&v, &left_dag)?;
        let avg = symmetric_causal_average(&right, &left)?;
        let exact = shapley_exact(&v)?;
        let at = label(rho, beta, x);
        Ok((0..2)
            .map(|j| {
                ReportRow::within(
                    format!("{at} phi{} chain average", j + 1),
                    exact.phi[j],
                    avg.phi[j],
                    CLOSED_FORM_TOL,
                )
            })
            .collect())
    })
}

fn do_equivalence_models() -> Result<[(&'static str, Model); 2]> {
    Ok([
        ("linear", Model::linear(0.5, vec![1.0, 2.0])?),
        ("interaction", Model::interaction(0.5, vec![1.0, 2.0], vec![(0, 1, 1.5)])?),
    ])
}

fn do_equivalence(rhos: &[f64], n: usize, seed: u64) -> Result<Vec<ReportRow>> {
    let models = do_equivalence_models()?;
    let mut points = Vec::new();
    for &rho in rhos {
        for (name, model) in &models {
            points.push((rho, *name, model.clone()));
        }
    }
    let x = DO_EQUIVALENCE_EXPLICAND;
    fan_out(&points, |k, (rho, name, model)| {
        let scm = LinearGaussianScm::standardized_chain(*rho)?;
        let observed = TabularDataset::continuous(scm.sample(n, rng::mix(seed, 2 * k as u64 + 1), None)?)?;
        let spec = ValueFunctionSpec::new(Backend::MarginalEmpirical, model.clone(), x.to_vec(), Source::Data(observed));
        spec.validate()?;
        let do_seed = rng::mix(seed, 2 * k as u64);
        Coalition::all(2)?
            .map(|s| {
                let by_do = do_expectation(&scm, model, s, &s.select(&x), n, do_seed)?;
                let marginal = v_marginal_empirical(&spec, s)?;
                let se = marginal.std_error.unwrap_or(0.0);
                let tol = MC_SIGMAS * (by_do.std_error.powi(2) + se * se).sqrt();
                Ok(ReportRow::within(
                    format!("rho={rho} model={name} S={s}"),
                    by_do.mean,
                    marginal.value,
                    tol,
                ))
            })
            .collect()
    })
}

fn rho_zero(n: usize, seed: u64) -> Result<Vec<ReportRow>> {
    let points: Vec<_> = grid3(&[0.0], &BETA_GRID, &EXPLICAND_GRID);
    fan_out(&points, |k, &(rho, beta, x)| {
        let g = Gaussian::standardized_bivariate(rho)?;
        let model = linear(beta)?;
        let reference = value_function(Backend::MarginalGaussian, model.clone(), &x, Source::Gaussian(g.clone()))?;
        let closed = value_function(Backend::ConditionalGaussianClosed, model.clone(), &x, Source::Gaussian(g.clone()))?;
        let mc = ModelValueFunction::new(
            ValueFunctionSpec::new(Backend::ConditionalGaussianMc, model.clone(), x.to_vec(), Source::Gaussian(g.clone()))
                .with_mc_samples(n)
                .with_seed(rng::mix(seed, 2 * k as u64 + 1)),
        )?;
        let data = sample_dataset(&g, n, rng::mix(seed, 2 * k as u64))?;
        let empirical = value_function(Backend::MarginalEmpirical, model, &x, Source::Data(data))?;
        let at = label(rho, beta, x);

        let mut rows = Vec::new();
        for s in Coalition::all(2)? {
            let want = reference.evaluate(s)?.value;
            rows.push(ReportRow::within(
                format!("{at} S={s} conditional_gaussian_closed"),
                want,
                closed.evaluate(s)?.value,
                CLOSED_FORM_TOL,
            ));
            for (name, v) in [("conditional_gaussian_mc", &mc), ("marginal_empirical", &empirical)] {
                let e = v.evaluate(s)?;
                rows.push(ReportRow::within(
                    format!("{at} S={s} {name}"),
                    want,
                    e.value,
                    MC_SIGMAS * e.std_error.unwrap_or(0.0),
                ));
            }
        }

        let want = shapley_exact(&reference)?;
        let closed_phi = shapley_exact(&closed)?;
        let mc_phi = shapley_exact(&mc)?;
        let mc_se = propagated_std_errors(&mc.std_error_table()?, 2)?;
        let emp_phi = shapley_exact(&empirical)?;
        let emp_se = marginal_empirical_std_errors(empirical.spec())?;
        for j in 0..2 {
            let w = want.phi[j];
            let p = j + 1;
            rows.push(ReportRow::within(
                format!("{at} phi{p} conditional_gaussian_closed"),
                w,
                closed_phi.phi[j],
                CLOSED_FORM_TOL,
            ));
            rows.push(ReportRow::within(
                format!("{at} phi{p} conditional_gaussian_mc"),
                w,
                mc_phi.phi[j],
                MC_SIGMAS * mc_se[j],
            ));
            rows.push(ReportRow::within(
                format!("{at} phi{p} marginal_empirical"),
                w,
                emp_phi.phi[j],
                MC_SIGMAS * emp_se[j],
            ));
        }
        Ok(rows)
    })
}

fn marginal_linear(rhos: &[f64], n: usize, seed: u64) -> Result<Vec<ReportRow>> {
    let closed_points = grid3(rhos, &BETA_GRID, &EXPLICAND_GRID);
    let mut rows = fan_out(&closed_points, |_, &(rho, beta, x)| {
        let got = gaussian_attribution(Backend::MarginalGaussian, beta, rho, x)?;
        let at = label(rho, beta, x);
        // standardized source: mu = 0
        Ok((0..2)
            .map(|j| {
                ReportRow::within(
                    format!("{at} phi{} marginal_gaussian", j + 1),
                    beta[j + 1] * x[j],
                    got.phi[j],
                    CLOSED_FORM_TOL,
                )
            })
            .collect())
    })?;

    // One sample per (rho, beta); explicands cycle so each is exercised.
    let mut points = Vec::new();
    for &rho in rhos {
        for &beta in &BETA_GRID {
            points.push((rho, beta, EXPLICAND_GRID[points.len() % EXPLICAND_GRID.len()]));
        }
    }
    let empirical = fan_out(&points, |k, &(rho, beta, x)| {
        let g = Gaussian::standardized_bivariate(rho)?;
        let data = sample_dataset(&g, n, rng::mix(seed, k as u64))?;
        let means = data.column_means();
        let v = value_function(Backend::MarginalEmpirical, linear(beta)?, &x, Source::Data(data))?;
        let got = shapley_exact(&v)?;
        let se = marginal_empirical_std_errors(v.spec())?;
        let at = label(rho, beta, x);
        let mut out = Vec::new();
        for j in 0..2 {
            let b = beta[j + 1];
            out.push(ReportRow::within(
                format!("{at} phi{} marginal_empirical vs sample mean", j + 1),
                b * (x[j] - means[j]),
                got.phi[j],
                CLOSED_FORM_TOL,
            ));
            out.push(ReportRow::within(
                format!("{at} phi{} marginal_empirical vs population mean", j + 1),
                b * (x[j] - g.mean()[j]),
                got.phi[j],
                MC_SIGMAS * se[j],
            ));
        }
        Ok(out)
    })?;
    rows.extend(empirical);
    Ok(rows)
}

/// Replaced-column evaluation rows for one coalition, with their
/// extrapolation flags.
#[derive(Debug, Clone)]
pub struct EvalSamples {
    pub names: Vec<String>,
    pub rows: Array2<f64>,
    pub flags: Vec<ExtrapolationFlag>,
    pub threshold: f64,
}

impl EvalSamples {
    pub fn flagged_fraction(&self) -> f64 {
        self.flags.iter().filter(|f| f.flagged).count() as f64 / self.flags.len() as f64
    }

    /// One row per evaluation sample: feature columns, `mahalanobis_sq`,
    /// `flagged`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.names.clone();
        header.push("mahalanobis_sq".into());
        header.push("flagged".into());
        w.write_record(&header).map_err(csv_err)?;
        for (row, flag) in self.rows.rows().into_iter().zip(&self.flags) {
            let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
            rec.push(flag.mahalanobis_sq.to_string());
            rec.push(flag.flagged.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The rows a marginal backend evaluates for `s`: the data with the
/// coalition columns set to the explicand's values.
pub fn eval_samples(
    data: &TabularDataset,
    explicand: &[f64],
    s: Coalition,
    threshold: Option<f64>,
) -> Result<EvalSamples> {
    if explicand.len() != data.ncols() {
        return Err(Error::argument(format!(
            "explicand has {} features, data has {}",
            explicand.len(),
            data.ncols()
        )));
    }
    let rows = dataset::replace_columns(data, s, &s.select(explicand))?;
    let threshold = threshold.unwrap_or_else(|| dataset::default_flag_threshold(data.ncols()));
    let flags = dataset::extrapolation_flags(data, rows.view(), Some(threshold))?;
    Ok(EvalSamples {
        names: data.names().to_vec(),
        rows,
        flags,
        threshold,
    })
}

fn extrapolation(rhos: &[f64], n: usize, seed: u64) -> Result<Vec<ReportRow>> {
    let s = Coalition::from_indices(2, &[0])?;
    let fractions = par::try_map_range(rhos.len(), |k| {
        let g = Gaussian::standardized_bivariate(rhos[k])?;
        let data = sample_dataset(&g, n, rng::mix(seed, k as u64))?;
        Ok(eval_samples(&data, &EXTRAPOLATION_EXPLICAND, s, None)?.flagged_fraction())
    })?;
    let base = (0..rhos.len())
        .min_by(|&a, &b| rhos[a].abs().total_cmp(&rhos[b].abs()))
        .expect("rhos is non-empty");
    Ok((0..rhos.len())
        .filter(|&k| rhos[k].abs() > rhos[base].abs())
        .map(|k| {
            ReportRow::greater_than(
                format!("flagged fraction S={s} rho={} exceeds rho={}", rhos[k], rhos[base]),
                fractions[base],
                fractions[k],
            )
        })
        .collect())
}
