//! Tabular background data and the row operations behind the empirical
//! value functions.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::gaussian::Gaussian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Discrete,
}

impl ColumnKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "continuous" => Some(ColumnKind::Continuous),
            "discrete" => Some(ColumnKind::Discrete),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Continuous => "continuous",
            ColumnKind::Discrete => "discrete",
        }
    }
}

/// How close a continuous value must be to count as a match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchTolerance {
    /// Same band for every continuous column.
    Absolute(f64),
    /// Band of this many sample standard deviations of each column.
    StdDevs(f64),
}

/// Default band for continuous matching.
pub const DEFAULT_TOL_STD_DEVS: f64 = 0.1;

impl Default for MatchTolerance {
    fn default() -> Self {
        MatchTolerance::StdDevs(DEFAULT_TOL_STD_DEVS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    rows: Array2<f64>,
}

impl TabularDataset {
    pub fn new(names: Vec<String>, kinds: Vec<ColumnKind>, rows: Array2<f64>) -> Result<Self> {
        let (n, m) = rows.dim();
        if n == 0 || m == 0 {
            return Err(Error::argument("dataset needs at least one row and one column"));
        }
        if names.len() != m || kinds.len() != m {
            return Err(Error::argument(format!(
                "{m} columns but {} names and {} kinds",
                names.len(),
                kinds.len()
            )));
        }
        if let Some(((i, j), _)) = rows.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::argument(format!("non-finite value at row {i}, column {j}")));
        }
        Ok(TabularDataset { names, kinds, rows })
    }

    /// All-continuous dataset with columns named `x0, x1, ...`.
    pub fn continuous(rows: Array2<f64>) -> Result<Self> {
        let m = rows.ncols();
        Self::new(
            (0..m).map(|j| format!("x{j}")).collect(),
            vec![ColumnKind::Continuous; m],
            rows,
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.rows.ncols()
    }

    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    /// Sorted distinct values of column `j`.
    pub fn support(&self, j: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.column(j).to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn column_means(&self) -> Vec<f64> {
        (0..self.ncols())
            .map(|j| self.rows.column(j).sum() / self.nrows() as f64)
            .collect()
    }

    /// Sample standard deviation (n - 1 denominator); zero for one row.
    pub fn column_std_devs(&self) -> Vec<f64> {
        let n = self.nrows();
        if n < 2 {
            return vec![0.0; self.ncols()];
        }
        self.column_means()
            .iter()
            .enumerate()
            .map(|(j, mu)| {
                let ss: f64 = self.rows.column(j).iter().map(|v| (v - mu).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            })
            .collect()
    }

    /// Reads the CSV layout: a header of column names, an optional second
    /// header whose cells are all `continuous`/`discrete`, then numeric rows.
    /// Without the kinds row every column is continuous.
    pub fn read_csv<R: Read>(reader: R) -> std::result::Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| format!("header: {e}"))?
            .iter()
            .map(str::to_owned)
            .collect();
        let m = names.len();
        let mut kinds = None;
        let mut flat = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| format!("row {}: {e}", line + 1))?;
            if rec.len() != m {
                return Err(format!("row {}: expected {m} fields, found {}", line + 1, rec.len()));
            }
            if line == 0 {
                let parsed: Option<Vec<ColumnKind>> = rec.iter().map(ColumnKind::parse).collect();
                if let Some(k) = parsed {
                    kinds = Some(k);
                    continue;
                }
            }
            for (j, cell) in rec.iter().enumerate() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| format!("row {}, column {}: not a number: {cell:?}", line + 1, names[j]))?;
                flat.push(v);
            }
        }
        let n = flat.len() / m.max(1);
        let rows = Array2::from_shape_vec((n, m), flat).map_err(|e| e.to_string())?;
        let kinds = kinds.unwrap_or_else(|| vec![ColumnKind::Continuous; m]);
        TabularDataset::new(names, kinds, rows).map_err(|e| e.to_string())
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::input(path, e.to_string()))?;
        Self::read_csv(file).map_err(|msg| Error::input(path, msg))
    }

    pub fn write_csv<W: Write>(&self, writer: W, with_kinds: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.names).map_err(io)?;
        if with_kinds {
            w.write_record(self.kinds.iter().map(|k| k.as_str())).map_err(io)?;
        }
        for row in self.rows.rows() {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    fn check_coalition(&self, s: Coalition, x_s: &[f64]) -> Result<()> {
        if s.num_features() != self.ncols() {
            return Err(Error::argument(format!(
                "coalition over {} features for a {}-column dataset",
                s.num_features(),
                self.ncols()
            )));
        }
        if x_s.len() != s.len() {
            return Err(Error::argument(format!(
                "{} values supplied for coalition {s}",
                x_s.len()
            )));
        }
        Ok(())
    }
}

/// Indices of rows whose coalition columns match `x_s` (values for the
/// members of `s`, ascending). Discrete columns must match exactly,
/// continuous ones within `tol`. Row order is preserved; an empty result is
/// not an error.
pub fn restrict_rows(
    data: &TabularDataset,
    s: Coalition,
    x_s: &[f64],
    tol: MatchTolerance,
) -> Result<Vec<usize>> {
    data.check_coalition(s, x_s)?;
    let members: Vec<usize> = s.indices().collect();
    let sds = match tol {
        MatchTolerance::StdDevs(_) => data.column_std_devs(),
        MatchTolerance::Absolute(_) => Vec::new(),
    };
    let bands: Vec<f64> = members
        .iter()
        .map(|&j| match data.kinds[j] {
            ColumnKind::Discrete => 0.0,
            ColumnKind::Continuous => match tol {
                MatchTolerance::Absolute(t) => t,
                MatchTolerance::StdDevs(k) => k * sds[j],
            },
        })
        .collect();
    Ok(data
        .rows
        .rows()
        .into_iter()
        .enumerate()
        .filter(|(_, row)| {
            members
                .iter()
                .zip(x_s)
                .zip(&bands)
                .all(|((&j, &x), &band)| match data.kinds[j] {
                    ColumnKind::Discrete => row[j] == x,
                    ColumnKind::Continuous => (row[j] - x).abs() <= band,
                })
        })
        .map(|(i, _)| i)
        .collect())
}

/// Copy of the rows with the coalition columns overwritten by `x_s`.
pub fn replace_columns(data: &TabularDataset, s: Coalition, x_s: &[f64]) -> Result<Array2<f64>> {
    data.check_coalition(s, x_s)?;
    let mut out = data.rows.clone();
    overwrite_columns(&mut out, s, x_s);
    Ok(out)
}

pub(crate) fn overwrite_columns(rows: &mut Array2<f64>, s: Coalition, x_s: &[f64]) {
    for (j, &x) in s.indices().zip(x_s) {
        rows.column_mut(j).fill(x);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtrapolationFlag {
    pub mahalanobis_sq: f64,
    pub flagged: bool,
}

/// 99th percentile of the chi-square distribution with `m` degrees of freedom.
pub fn default_flag_threshold(m: usize) -> f64 {
    ChiSquared::new(m as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.99)
}

/// Squared Mahalanobis distance of every evaluation row to the data's
/// empirical mean and covariance, flagged when it exceeds `threshold`
/// (default [`default_flag_threshold`]).
pub fn extrapolation_flags(
    data: &TabularDataset,
    eval_rows: ArrayView2<'_, f64>,
    threshold: Option<f64>,
) -> Result<Vec<ExtrapolationFlag>> {
    if eval_rows.ncols() != data.ncols() {
        return Err(Error::argument(format!(
            "evaluation rows have {} columns, data has {}",
            eval_rows.ncols(),
            data.ncols()
        )));
    }
    let fit = Gaussian::fit(data.rows())?;
    let threshold = threshold.unwrap_or_else(|| default_flag_threshold(data.ncols()));
    eval_rows
        .rows()
        .into_iter()
        .map(|row| {
            let d2 = fit.mahalanobis_sq(&row.to_vec())?;
            Ok(ExtrapolationFlag {
                mahalanobis_sq: d2,
                flagged: d2 > threshold,
            })
        })
        .collect()
}
