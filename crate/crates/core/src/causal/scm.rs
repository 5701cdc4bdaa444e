use nalgebra::DMatrix;
use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use super::dag::CausalDag;
use crate::coalition::Coalition;
use crate::dataset;
use crate::error::{Error, Result};
use crate::gaussian::{Gaussian, SAMPLE_BLOCK};
use crate::models::{batch_mean_estimate, MeanEstimate, Model};
use crate::{par, rng};

/// `do(X_S = values)`; `values` lists the members of `S` in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Intervention {
    pub coalition: Coalition,
    pub values: Vec<f64>,
}

impl Intervention {
    pub fn new(coalition: Coalition, values: Vec<f64>) -> Result<Self> {
        if values.len() != coalition.len() {
            return Err(Error::argument(format!(
                "{} values for intervention on {coalition}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("intervention values must be finite"));
        }
        Ok(Intervention { coalition, values })
    }
}

/// Linear-Gaussian structural causal model:
/// `X_j = c_j + Σ_{p ∈ pa(j)} w_pj X_p + sd_j ε_j` with independent standard
/// normal `ε`. For root nodes `c_j` is the mean.
#[derive(Debug, Clone)]
pub struct LinearGaussianScm {
    dag: CausalDag,
    /// Per child: `(parent, weight)`.
    coef: Vec<Vec<(usize, f64)>>,
    noise_sd: Vec<f64>,
    intercept: Vec<f64>,
}

impl LinearGaussianScm {
    /// `coefficients` holds `(parent, child, weight)` and must cover exactly
    /// the edges of `dag`.
    pub fn new(
        dag: CausalDag,
        coefficients: &[(usize, usize, f64)],
        noise_sd: Vec<f64>,
        intercept: Vec<f64>,
    ) -> Result<Self> {
        let m = dag.num_nodes();
        if noise_sd.len() != m || intercept.len() != m {
            return Err(Error::argument(format!(
                "{m} nodes but {} noise scales and {} root means",
                noise_sd.len(),
                intercept.len()
            )));
        }
        if noise_sd.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::argument("noise standard deviations must be positive and finite"));
        }
        if intercept.iter().any(|c| !c.is_finite()) {
            return Err(Error::argument("root means must be finite"));
        }
        let mut coef = vec![Vec::new(); m];
        for &(p, c, w) in coefficients {
            if !dag.has_edge(p, c) {
                return Err(Error::argument(format!("coefficient for ({p}, {c}) has no edge")));
            }
            if !w.is_finite() {
                return Err(Error::argument(format!("coefficient for ({p}, {c}) is not finite")));
            }
            if coef[c].iter().any(|&(q, _)| q == p) {
                return Err(Error::argument(format!("duplicate coefficient for ({p}, {c})")));
            }
            coef[c].push((p, w));
        }
        if let Some((p, c)) = dag.edges().find(|&(p, c)| !coef[c].iter().any(|&(q, _)| q == p)) {
            return Err(Error::argument(format!("edge ({p}, {c}) has no coefficient")));
        }
        Ok(LinearGaussianScm {
            dag,
            coef,
            noise_sd,
            intercept,
        })
    }

    /// `X0 ~ N(0, 1)`, `X1 = rho X0 + sqrt(1 - rho²) ε`: unit variances,
    /// correlation `rho`.
    pub fn standardized_chain(rho: f64) -> Result<Self> {
        if rho.is_nan() || rho.abs() >= 1.0 {
            return Err(Error::argument(format!("correlation must satisfy |rho| < 1, got {rho}")));
        }
        Self::new(
            CausalDag::chain(2)?,
            &[(0, 1, rho)],
            vec![1.0, (1.0 - rho * rho).sqrt()],
            vec![0.0, 0.0],
        )
    }

    /// Node 0 is a common cause of nodes 1 and 2:
    /// `X_k = w_k X0 + sqrt(1 - w_k²) ε_k`, so all variances are one and
    /// `corr(X1, X2) = w_1 w_2`.
    pub fn standardized_confounder(w1: f64, w2: f64) -> Result<Self> {
        if !(w1.abs() < 1.0 && w2.abs() < 1.0) {
            return Err(Error::argument("confounder loadings must satisfy |w| < 1"));
        }
        Self::new(
            CausalDag::fork(3, 0)?,
            &[(0, 1, w1), (0, 2, w2)],
            vec![1.0, (1.0 - w1 * w1).sqrt(), (1.0 - w2 * w2).sqrt()],
            vec![0.0; 3],
        )
    }

    pub fn dag(&self) -> &CausalDag {
        &self.dag
    }

    pub fn num_nodes(&self) -> usize {
        self.dag.num_nodes()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coef
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&(p, w)| (p, c, w)))
    }

    pub fn noise_sd(&self) -> &[f64] {
        &self.noise_sd
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercept
    }

    /// Implied joint distribution of all nodes without intervention.
    pub fn observational_gaussian(&self) -> Result<Gaussian> {
        let m = self.num_nodes();
        let mut i_minus_b = DMatrix::<f64>::identity(m, m);
        for (p, c, w) in self.coefficients() {
            i_minus_b[(c, p)] -= w;
        }
        let a = i_minus_b
            .try_inverse()
            .ok_or_else(|| Error::LinearAlgebra("I - B is singular".into()))?;
        let mean = &a * nalgebra::DVector::from_column_slice(&self.intercept);
        let d2 = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            m,
            self.noise_sd.iter().map(|s| s * s),
        ));
        let cov = &a * d2 * a.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        Gaussian::new(mean.iter().copied().collect(), cov)
    }

    /// Ancestral sampling in topological order. Under an intervention the
    /// intervened nodes ignore their structural equation and take the given
    /// values, which their descendants then read as parent inputs. Every
    /// node consumes one noise draw per row either way, so block `b` of
    /// [`SAMPLE_BLOCK`] rows uses sub-stream `(seed, b)` consistently.
    pub fn sample(
        &self,
        n: usize,
        seed: u64,
        intervention: Option<&Intervention>,
    ) -> Result<Array2<f64>> {
        if n == 0 {
            return Err(Error::argument("sample size must be at least 1"));
        }
        let m = self.num_nodes();
        let mut pinned: Vec<Option<f64>> = vec![None; m];
        if let Some(iv) = intervention {
            if iv.coalition.num_features() != m {
                return Err(Error::argument(format!(
                    "intervention over {} nodes for a {m}-node SCM",
                    iv.coalition.num_features()
                )));
            }
            for (j, &v) in iv.coalition.indices().zip(&iv.values) {
                pinned[j] = Some(v);
            }
        }
        let order = self.dag.topological_order();
        let blocks = n.div_ceil(SAMPLE_BLOCK);
        let chunks = par::map_range(blocks, |b| {
            let rows = SAMPLE_BLOCK.min(n - b * SAMPLE_BLOCK);
            let mut rng = rng::substream(seed, b as u64);
            let mut out = vec![0.0; rows * m];
            for row in out.chunks_exact_mut(m) {
                for &j in order {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    row[j] = match pinned[j] {
                        Some(v) => v,
                        None => {
                            self.intercept[j]
                                + self.coef[j].iter().map(|&(p, w)| w * row[p]).sum::<f64>()
                                + self.noise_sd[j] * eps
                        }
                    };
                }
            }
            out
        });
        let flat: Vec<f64> = chunks.into_iter().flatten().collect();
        Ok(Array2::from_shape_vec((n, m), flat).expect("shape matches"))
    }
}

/// `E[f(X) | do(X_S = x_s)]` where the SCM generates latent causes and each
/// model feature reads its own cause. Intervening on a feature cuts only the
/// cause → feature arrow, so the features outside `S` keep their
/// observational joint distribution.
pub fn do_expectation(
    scm: &LinearGaussianScm,
    model: &Model,
    s: Coalition,
    x_s: &[f64],
    n: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    let m = scm.num_nodes();
    if model.num_features() != m || s.num_features() != m {
        return Err(Error::argument(format!(
            "SCM has {m} nodes, model {} features, coalition {} features",
            model.num_features(),
            s.num_features()
        )));
    }
    let iv = Intervention::new(s, x_s.to_vec())?;
    if s.is_full() {
        return Ok(MeanEstimate {
            mean: model.evaluate(x_s)?,
            std_error: 0.0,
            n: 0,
        });
    }
    let causes = scm.sample(n, seed, None)?;
    let mut features = causes;
    dataset::overwrite_columns(&mut features, iv.coalition, &iv.values);
    batch_mean_estimate(model, features.view())
}
