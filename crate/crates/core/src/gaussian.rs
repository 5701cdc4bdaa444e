//! Multivariate normal distributions: conditioning, sampling, Mahalanobis
//! distance. All solves go through a Cholesky factor; nothing is inverted
//! explicitly and no jitter is ever added.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use ndarray::{Array2, ArrayView2};
use rand_distr::{Distribution, StandardNormal};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::{par, rng};

const SYMMETRY_TOL: f64 = 1e-12;

/// Rows drawn from one random sub-stream in [`Gaussian::sample`].
pub const SAMPLE_BLOCK: usize = 1024;

#[derive(Debug, Clone)]
pub struct Gaussian {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

fn cholesky(a: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(a.clone())
        .ok_or_else(|| Error::LinearAlgebra(format!("{what} is not positive definite")))
}

fn submatrix(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

impl Gaussian {
    pub fn new(mu: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let m = mu.len();
        if m == 0 {
            return Err(Error::argument("Gaussian needs at least one dimension"));
        }
        if sigma.nrows() != m || sigma.ncols() != m {
            return Err(Error::argument(format!(
                "covariance is {}x{}, mean has length {m}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::argument("Gaussian parameters must be finite"));
        }
        for i in 0..m {
            for j in 0..i {
                let (a, b) = (sigma[(i, j)], sigma[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::argument(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let chol = cholesky(&sigma, "covariance")?;
        Ok(Gaussian {
            mu: DVector::from_vec(mu),
            sigma,
            chol,
        })
    }

    pub fn from_rows(mu: Vec<f64>, sigma: &[Vec<f64>]) -> Result<Self> {
        let m = mu.len();
        if sigma.len() != m || sigma.iter().any(|r| r.len() != m) {
            return Err(Error::argument(format!("covariance must be {m}x{m}")));
        }
        Self::new(mu, DMatrix::from_fn(m, m, |i, j| sigma[i][j]))
    }

    /// Zero means, unit variances, correlation `rho`.
    pub fn standardized_bivariate(rho: f64) -> Result<Self> {
        Self::standardized(2, rho)
    }

    /// `m`-dimensional equicorrelated standard Gaussian.
    pub fn standardized(m: usize, rho: f64) -> Result<Self> {
        if rho.is_nan() || rho.abs() >= 1.0 {
            return Err(Error::argument(format!("correlation must satisfy |rho| < 1, got {rho}")));
        }
        let sigma = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { rho });
        Self::new(vec![0.0; m], sigma)
    }

    /// Sample mean and unbiased sample covariance of `rows`.
    pub fn fit(rows: ArrayView2<'_, f64>) -> Result<Self> {
        let (n, m) = rows.dim();
        if n <= m {
            return Err(Error::argument(format!(
                "need more rows than columns to estimate a covariance ({n} rows, {m} columns)"
            )));
        }
        let mu: Vec<f64> = (0..m).map(|j| rows.column(j).sum() / n as f64).collect();
        let mut sigma = DMatrix::zeros(m, m);
        for row in rows.rows() {
            for i in 0..m {
                let di = row[i] - mu[i];
                for j in 0..=i {
                    sigma[(i, j)] += di * (row[j] - mu[j]);
                }
            }
        }
        for i in 0..m {
            for j in 0..=i {
                let v = sigma[(i, j)] / (n - 1) as f64;
                sigma[(i, j)] = v;
                sigma[(j, i)] = v;
            }
        }
        Self::new(mu, sigma).map_err(|e| match e {
            Error::LinearAlgebra(_) => {
                Error::LinearAlgebra("empirical covariance is singular".into())
            }
            e => e,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// The correlation when this is a standardized equicorrelated Gaussian.
    pub fn standardized_correlation(&self) -> Option<f64> {
        let m = self.dim();
        if self.mu.iter().any(|&v| v != 0.0) || (0..m).any(|i| self.sigma[(i, i)] != 1.0) {
            return None;
        }
        if m == 1 {
            return Some(0.0);
        }
        let rho = self.sigma[(1, 0)];
        let all_equal = (0..m).all(|i| (0..m).all(|j| i == j || self.sigma[(i, j)] == rho));
        (all_equal && rho.abs() < 1.0).then_some(rho)
    }

    fn split(&self, s: Coalition, x_s: &[f64]) -> Result<(Vec<usize>, Vec<usize>)> {
        if s.num_features() != self.dim() {
            return Err(Error::argument(format!(
                "coalition over {} features for a {}-dimensional Gaussian",
                s.num_features(),
                self.dim()
            )));
        }
        if s.is_empty() || s.is_full() {
            return Err(Error::argument(format!(
                "conditioning set {s} must be non-empty and proper"
            )));
        }
        if x_s.len() != s.len() {
            return Err(Error::argument(format!(
                "{} conditioning values for coalition {s}",
                x_s.len()
            )));
        }
        if x_s.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("conditioning values must be finite"));
        }
        Ok((s.indices().collect(), s.complement().indices().collect()))
    }

    /// `E[X_rest | X_S = x_s]`, rest in ascending index order.
    pub fn conditional_mean(&self, s: Coalition, x_s: &[f64]) -> Result<DVector<f64>> {
        let (given, rest) = self.split(s, x_s)?;
        let chol_ss = cholesky(&submatrix(&self.sigma, &given, &given), &format!("Sigma_SS for {s}"))?;
        let resid = DVector::from_fn(given.len(), |i, _| x_s[i] - self.mu[given[i]]);
        let alpha = chol_ss.solve(&resid);
        let cross = submatrix(&self.sigma, &rest, &given);
        let mu_rest = DVector::from_fn(rest.len(), |i, _| self.mu[rest[i]]);
        Ok(mu_rest + cross * alpha)
    }

    /// Distribution of the features outside `s` given `X_S = x_s`. `x_s`
    /// lists the values of the members of `s` in ascending index order.
    pub fn conditional(&self, s: Coalition, x_s: &[f64]) -> Result<Gaussian> {
        let (given, rest) = self.split(s, x_s)?;
        let chol_ss = cholesky(&submatrix(&self.sigma, &given, &given), &format!("Sigma_SS for {s}"))?;
        let resid = DVector::from_fn(given.len(), |i, _| x_s[i] - self.mu[given[i]]);
        let alpha = chol_ss.solve(&resid);
        let cross = submatrix(&self.sigma, &rest, &given);
        let mu_rest = DVector::from_fn(rest.len(), |i, _| self.mu[rest[i]]);
        let mean = mu_rest + &cross * alpha;

        let k = chol_ss.solve(&cross.transpose());
        let mut cov = submatrix(&self.sigma, &rest, &rest) - &cross * k;
        let sym = (&cov + cov.transpose()) * 0.5;
        cov = sym;
        let chol = cholesky(&cov, "conditional covariance")?;
        Ok(Gaussian {
            mu: mean,
            sigma: cov,
            chol,
        })
    }

    /// `n` i.i.d. draws as rows. Block `b` of [`SAMPLE_BLOCK`] rows uses
    /// sub-stream `(seed, b)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Array2<f64>> {
        if n == 0 {
            return Err(Error::argument("sample size must be at least 1"));
        }
        let m = self.dim();
        let l = self.chol.l();
        let blocks = n.div_ceil(SAMPLE_BLOCK);
        let chunks = par::map_range(blocks, |b| {
            let rows = SAMPLE_BLOCK.min(n - b * SAMPLE_BLOCK);
            let mut rng = rng::substream(seed, b as u64);
            let mut out = Vec::with_capacity(rows * m);
            let mut z = DVector::zeros(m);
            for _ in 0..rows {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                let x = &self.mu + &l * &z;
                out.extend(x.iter());
            }
            out
        });
        let flat: Vec<f64> = chunks.into_iter().flatten().collect();
        Ok(Array2::from_shape_vec((n, m), flat).expect("shape matches"))
    }

    /// `(x - mu)' Sigma^{-1} (x - mu)`.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::argument(format!(
                "point has {} coordinates, distribution has {}",
                x.len(),
                self.dim()
            )));
        }
        let d = DVector::from_fn(x.len(), |i, _| x[i] - self.mu[i]);
        let y = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&d)
            .ok_or_else(|| Error::LinearAlgebra("triangular solve failed".into()))?;
        Ok(y.norm_squared())
    }
}
