//! JSON and CSV formats: model, Gaussian and SCM specifications in; attributions out.
//!
//! Model: `{"schema":1,"kind":"linear","beta0":r,"beta":[...]}`,
//! `{"kind":"interaction","beta0":r,"beta":[...],"gamma":[[i,j,r],...]}` or
//! `{"kind":"lookup","points":[[x...,y],...]}`; `schema` is optional and must
//! be 1 when present.
//!
//! Gaussian: `{"mu":[...],"sigma":[[...],...]}`.
//!
//! SCM: `{"nodes":m,"edges":[[p,c],...],"coef":{"c":[[p,w],...]},
//! "noise_sd":[...],"root_mean":[...]}` where `coef` is keyed by child index.
//!
//! Attribution CSV: `feature_index,feature_name,phi,std_error`, one row per
//! feature, then footer rows keyed in the first column: `phi0` and
//! `efficiency_residual` (value under `phi`), `method` (tag under
//! `feature_name`) and `seed` (value under `phi`, blank when unseeded).

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::causal::{CausalDag, LinearGaussianScm};
use crate::error::{Error, Result};
use crate::gaussian::Gaussian;
use crate::models::Model;
use crate::shapley::{AttributionResult, Method};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModelDoc {
    Linear {
        #[serde(default)]
        schema: Option<u32>,
        beta0: f64,
        beta: Vec<f64>,
    },
    Interaction {
        #[serde(default)]
        schema: Option<u32>,
        beta0: f64,
        beta: Vec<f64>,
        gamma: Vec<(usize, usize, f64)>,
    },
    Lookup {
        #[serde(default)]
        schema: Option<u32>,
        points: Vec<Vec<f64>>,
    },
}

fn check_schema(schema: Option<u32>) -> std::result::Result<(), String> {
    match schema {
        None | Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(format!("field `schema`: unsupported version {v}")),
    }
}

pub fn parse_model(text: &str) -> std::result::Result<Model, String> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let built = match doc {
        ModelDoc::Linear { schema, beta0, beta } => {
            check_schema(schema)?;
            Model::linear(beta0, beta)
        }
        ModelDoc::Interaction {
            schema,
            beta0,
            beta,
            gamma,
        } => {
            check_schema(schema)?;
            Model::interaction(beta0, beta, gamma)
        }
        ModelDoc::Lookup { schema, points } => {
            check_schema(schema)?;
            let mut xs = Vec::with_capacity(points.len());
            let mut ys = Vec::with_capacity(points.len());
            for (k, mut p) in points.into_iter().enumerate() {
                let y = p
                    .pop()
                    .ok_or_else(|| format!("field `points`: entry {k} is empty"))?;
                xs.push(p);
                ys.push(y);
            }
            Model::lookup(xs, ys)
        }
    };
    built.map_err(|e| e.to_string())
}

pub fn model_to_json(model: &Model) -> String {
    let doc = match model {
        Model::Linear(l) => ModelDoc::Linear {
            schema: Some(SCHEMA_VERSION),
            beta0: l.beta0,
            beta: l.beta.clone(),
        },
        Model::Interaction(i) => ModelDoc::Interaction {
            schema: Some(SCHEMA_VERSION),
            beta0: i.linear.beta0,
            beta: i.linear.beta.clone(),
            gamma: i.gamma.clone(),
        },
        Model::Lookup(l) => ModelDoc::Lookup {
            schema: Some(SCHEMA_VERSION),
            points: l
                .points()
                .iter()
                .zip(l.values())
                .map(|(p, &y)| p.iter().copied().chain([y]).collect())
                .collect(),
        },
    };
    serde_json::to_string_pretty(&doc).expect("model serializes")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianDoc {
    mu: Vec<f64>,
    sigma: Vec<Vec<f64>>,
}

pub fn parse_gaussian(text: &str) -> std::result::Result<Gaussian, String> {
    let doc: GaussianDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Gaussian::from_rows(doc.mu, &doc.sigma).map_err(|e| e.to_string())
}

pub fn gaussian_to_json(g: &Gaussian) -> String {
    let m = g.dim();
    let doc = GaussianDoc {
        mu: g.mean().iter().copied().collect(),
        sigma: (0..m)
            .map(|i| (0..m).map(|j| g.covariance()[(i, j)]).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("gaussian serializes")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScmDoc {
    nodes: usize,
    #[serde(default)]
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    coef: BTreeMap<String, Vec<(usize, f64)>>,
    noise_sd: Vec<f64>,
    root_mean: Vec<f64>,
}

pub fn parse_scm(text: &str) -> std::result::Result<LinearGaussianScm, String> {
    let doc: ScmDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let dag = CausalDag::new(doc.nodes, doc.edges.iter().copied()).map_err(|e| e.to_string())?;
    let mut coefficients = Vec::new();
    for (child, parents) in &doc.coef {
        let c: usize = child
            .parse()
            .map_err(|_| format!("field `coef`: key {child:?} is not a node index"))?;
        coefficients.extend(parents.iter().map(|&(p, w)| (p, c, w)));
    }
    LinearGaussianScm::new(dag, &coefficients, doc.noise_sd, doc.root_mean)
        .map_err(|e| e.to_string())
}

pub fn scm_to_json(scm: &LinearGaussianScm) -> String {
    let mut coef: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (p, c, w) in scm.coefficients() {
        coef.entry(c.to_string()).or_default().push((p, w));
    }
    let doc = ScmDoc {
        nodes: scm.num_nodes(),
        edges: scm.dag().edges().collect(),
        coef,
        noise_sd: scm.noise_sd().to_vec(),
        root_mean: scm.intercepts().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("scm serializes")
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::input(path, e.to_string()))
}

pub fn load_model(path: &Path) -> Result<Model> {
    parse_model(&read_file(path)?).map_err(|m| Error::input(path, m))
}

pub fn load_gaussian(path: &Path) -> Result<Gaussian> {
    parse_gaussian(&read_file(path)?).map_err(|m| Error::input(path, m))
}

pub fn load_scm(path: &Path) -> Result<LinearGaussianScm> {
    parse_scm(&read_file(path)?).map_err(|m| Error::input(path, m))
}

/// An attribution together with the feature names it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedAttribution {
    pub feature_names: Vec<String>,
    #[serde(flatten)]
    pub result: AttributionResult,
}

impl NamedAttribution {
    pub fn new(result: AttributionResult, feature_names: Option<&[String]>) -> Self {
        let feature_names = match feature_names {
            Some(n) => n.to_vec(),
            None => (0..result.num_features()).map(|j| format!("x{j}")).collect(),
        };
        NamedAttribution {
            feature_names,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("attribution serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let r = &self.result;
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["feature_index", "feature_name", "phi", "std_error"])
            .map_err(io)?;
        for (j, phi) in r.phi.iter().enumerate() {
            let se = r
                .std_errors
                .as_ref()
                .map(|s| s[j].to_string())
                .unwrap_or_default();
            w.write_record([j.to_string(), self.feature_names[j].clone(), phi.to_string(), se])
                .map_err(io)?;
        }
        let footer = [
            ["phi0".to_string(), String::new(), r.phi0.to_string(), String::new()],
            [
                "efficiency_residual".into(),
                String::new(),
                r.efficiency_residual.to_string(),
                String::new(),
            ],
            ["method".into(), r.method.as_str().into(), String::new(), String::new()],
            [
                "seed".into(),
                String::new(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                String::new(),
            ],
        ];
        for row in footer {
            w.write_record(row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> std::result::Result<Self, String> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut names = Vec::new();
        let mut phi = Vec::new();
        let mut ses: Vec<Option<f64>> = Vec::new();
        let (mut phi0, mut residual, mut method, mut seed) = (None, None, None, None);
        let num = |s: &str, what: &str| -> std::result::Result<f64, String> {
            s.parse().map_err(|_| format!("{what}: not a number: {s:?}"))
        };
        for rec in rdr.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let get = |i: usize| rec.get(i).unwrap_or("");
            match get(0) {
                "phi0" => phi0 = Some(num(get(2), "phi0")?),
                "efficiency_residual" => residual = Some(num(get(2), "efficiency_residual")?),
                "method" => {
                    method = Some(
                        Method::parse(get(1)).ok_or_else(|| format!("unknown method {:?}", get(1)))?,
                    )
                }
                "seed" => {
                    seed = match get(2) {
                        "" => None,
                        s => Some(s.parse().map_err(|_| format!("seed: bad value {s:?}"))?),
                    }
                }
                idx => {
                    let j: usize = idx.parse().map_err(|_| format!("unexpected row key {idx:?}"))?;
                    if j != phi.len() {
                        return Err(format!("feature rows out of order at index {j}"));
                    }
                    names.push(get(1).to_string());
                    phi.push(num(get(2), "phi")?);
                    ses.push(match get(3) {
                        "" => None,
                        s => Some(num(s, "std_error")?),
                    });
                }
            }
        }
        let std_errors = if ses.iter().all(Option::is_some) && !ses.is_empty() {
            Some(ses.into_iter().flatten().collect())
        } else {
            None
        };
        Ok(NamedAttribution {
            feature_names: names,
            result: AttributionResult {
                phi0: phi0.ok_or("missing phi0 row")?,
                phi,
                efficiency_residual: residual.ok_or("missing efficiency_residual row")?,
                std_errors,
                method: method.ok_or("missing method row")?,
                seed,
            },
        })
    }
}
