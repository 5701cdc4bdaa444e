//! Prediction functions `f(x)` that attributions explain.

use ndarray::ArrayView2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, CompensatedSum};

/// `beta0 + Σ beta_j x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub beta0: f64,
    pub beta: Vec<f64>,
}

impl LinearModel {
    pub fn new(beta0: f64, beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::argument("linear model needs at least one coefficient"));
        }
        if !beta0.is_finite() || beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::argument("linear model coefficients must be finite"));
        }
        Ok(LinearModel { beta0, beta })
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.beta0 + self.beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

/// Linear part plus pairwise products `Σ gamma_ij x_i x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionModel {
    pub linear: LinearModel,
    pub gamma: Vec<(usize, usize, f64)>,
}

impl InteractionModel {
    pub fn new(beta0: f64, beta: Vec<f64>, gamma: Vec<(usize, usize, f64)>) -> Result<Self> {
        let linear = LinearModel::new(beta0, beta)?;
        let m = linear.beta.len();
        for &(i, j, g) in &gamma {
            if i >= m || j >= m {
                return Err(Error::argument(format!(
                    "interaction term ({i}, {j}) out of range for {m} features"
                )));
            }
            if !g.is_finite() {
                return Err(Error::argument("interaction coefficients must be finite"));
            }
        }
        Ok(InteractionModel { linear, gamma })
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.linear.eval(x) + self.gamma.iter().map(|&(i, j, g)| g * x[i] * x[j]).sum::<f64>()
    }
}

/// Nearest-neighbour lookup over a fixed table of `(point, value)` pairs.
/// Ties go to the earliest point. Flat between table points, so it
/// extrapolates poorly by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupModel {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl LookupModel {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if points.is_empty() || dim == 0 {
            return Err(Error::argument("lookup model needs at least one non-empty point"));
        }
        if points.len() != values.len() {
            return Err(Error::argument("lookup model needs one value per point"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::argument("lookup points have inconsistent dimensions"));
        }
        if points.iter().flatten().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::argument("lookup table entries must be finite"));
        }
        Ok(LookupModel { points, values })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, p) in self.points.iter().enumerate() {
            let d: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        self.values[best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Interaction,
    Lookup,
}

/// Deterministic, immutable prediction function.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Interaction(InteractionModel),
    Lookup(LookupModel),
}

impl Model {
    pub fn linear(beta0: f64, beta: Vec<f64>) -> Result<Self> {
        LinearModel::new(beta0, beta).map(Model::Linear)
    }

    pub fn interaction(beta0: f64, beta: Vec<f64>, gamma: Vec<(usize, usize, f64)>) -> Result<Self> {
        InteractionModel::new(beta0, beta, gamma).map(Model::Interaction)
    }

    pub fn lookup(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        LookupModel::new(points, values).map(Model::Lookup)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Linear(_) => ModelKind::Linear,
            Model::Interaction(_) => ModelKind::Interaction,
            Model::Lookup(_) => ModelKind::Lookup,
        }
    }

    pub fn num_features(&self) -> usize {
        match self {
            Model::Linear(l) => l.beta.len(),
            Model::Interaction(i) => i.linear.beta.len(),
            Model::Lookup(l) => l.points[0].len(),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearModel> {
        match self {
            Model::Linear(l) => Some(l),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_features() {
            return Err(Error::argument(format!(
                "model expects {} features, got {}",
                self.num_features(),
                x.len()
            )));
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::argument(format!("input feature {j} is not finite")));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without length or finiteness checks.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Model::Linear(l) => l.eval(x),
            Model::Interaction(i) => i.eval(x),
            Model::Lookup(l) => l.eval(x),
        }
    }

    /// Predictions for every row, in row order.
    pub fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let (n, m) = rows.dim();
        if m != self.num_features() {
            return Err(Error::argument(format!(
                "model expects {} features, rows have {m} columns",
                self.num_features()
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("rows contain non-finite values"));
        }
        Ok(par::map_range(n, |i| {
            let row = rows.row(i);
            match row.as_slice() {
                Some(x) => self.eval_unchecked(x),
                None => self.eval_unchecked(&row.to_vec()),
            }
        }))
    }
}

/// Mean of predictions with its standard error, `sd / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::argument("cannot average zero rows"));
        }
        let total: CompensatedSum = values.iter().copied().collect();
        let mean = total.value() / n as f64;
        let std_error = if n > 1 {
            let ss: CompensatedSum = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (ss.value() / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Ok(MeanEstimate { mean, std_error, n })
    }
}

/// Compensated mean of `model` over the rows of `rows`.
pub fn batch_mean(model: &Model, rows: ArrayView2<'_, f64>) -> Result<f64> {
    batch_mean_estimate(model, rows).map(|e| e.mean)
}

pub fn batch_mean_estimate(model: &Model, rows: ArrayView2<'_, f64>) -> Result<MeanEstimate> {
    if rows.nrows() == 0 {
        return Err(Error::argument("cannot average zero rows"));
    }
    MeanEstimate::from_values(&model.predict_rows(rows)?)
}
