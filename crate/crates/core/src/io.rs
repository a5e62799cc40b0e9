//! File formats: JSON documents for graphs, matrices and reports, CSV for data
//! and tables. Vertex labels are 1-based in every file.
//!
//! Floats go through `serde_json` / `f64::to_string`, both of which print the
//! shortest representation that parses back to the same bits.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chol::CholeskyFactor;
use crate::completion::IncompleteMatrix;
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::estimators::{Estimator, EstimatorReport, Hyper, ImprovementRow, Losses, Target};
use crate::linalg::SpdMatrix;
use crate::select::{Confusion, RestartSummary, SearchResult};
use crate::wishart::{AlphaRule, DagWishartParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub p: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphJson {
    pub fn from_dag(dag: &Dag) -> Self {
        GraphJson {
            p: dag.p(),
            edges: dag.edges().map(|(i, j)| [i + 1, j + 1]).collect(),
        }
    }

    pub fn to_dag(&self) -> Result<Dag> {
        let labels: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Dag::from_labels(self.p, &labels)
    }
}

/// One off-diagonal entry `(i, j)` with `i > j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub i: usize,
    pub j: usize,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub p: usize,
    pub values: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let p = m.nrows();
        MatrixJson {
            p,
            values: (0..p)
                .flat_map(|r| (0..p).map(move |c| (r, c)))
                .map(|(r, c)| m[(r, c)])
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.values.len() != self.p * self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p * self.p,
                found: self.values.len(),
            });
        }
        Ok(DMatrix::from_row_slice(self.p, self.p, &self.values))
    }

    pub fn to_spd(&self) -> Result<SpdMatrix> {
        SpdMatrix::new(self.to_matrix()?)
    }
}

/// `L` entries are listed per edge as `L[i][j]` (parent `i`, child `j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CholeskyJson {
    pub graph: GraphJson,
    pub d: Vec<f64>,
    pub l: Vec<EntryJson>,
}

impl CholeskyJson {
    pub fn from_factor(theta: &CholeskyFactor) -> Self {
        let dag = theta.dag();
        let mut l = Vec::new();
        for j in 0..dag.p() {
            for (parent, &v) in dag.parents(j).zip(theta.l_column(j)) {
                l.push(EntryJson {
                    i: parent + 1,
                    j: j + 1,
                    v,
                });
            }
        }
        CholeskyJson {
            graph: GraphJson::from_dag(dag),
            d: theta.d().to_vec(),
            l,
        }
    }

    pub fn to_factor(&self) -> Result<CholeskyFactor> {
        let dag = self.graph.to_dag()?;
        let mut cols: Vec<Vec<f64>> = (0..dag.p()).map(|j| vec![0.0; dag.parent_count(j)]).collect();
        let mut seen = vec![0usize; dag.p()];
        for e in &self.l {
            let (i, j) = label_pair(e, dag.p())?;
            let pos = dag
                .parents(j)
                .position(|v| v == i)
                .ok_or_else(|| Error::Parse(format!("L entry ({}, {}) is not an edge", e.i, e.j)))?;
            cols[j][pos] = e.v;
            seen[j] += 1;
        }
        if seen.iter().zip(&cols).any(|(s, c)| *s != c.len()) {
            return Err(Error::Parse("L must list every edge exactly once".into()));
        }
        CholeskyFactor::new(dag, self.d.clone(), cols)
    }
}

fn label_pair(e: &EntryJson, p: usize) -> Result<(usize, usize)> {
    for v in [e.i, e.j] {
        if v == 0 || v > p {
            return Err(Error::VertexOutOfRange { vertex: v, p });
        }
    }
    Ok((e.i - 1, e.j - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompleteJson {
    pub graph: GraphJson,
    pub diag: Vec<f64>,
    pub off: Vec<EntryJson>,
}

impl IncompleteJson {
    pub fn from_incomplete(m: &IncompleteMatrix) -> Self {
        let off = m
            .entries()
            .filter(|(i, j, _)| i != j)
            .map(|(i, j, v)| EntryJson { i: i + 1, j: j + 1, v })
            .collect();
        IncompleteJson {
            graph: GraphJson::from_dag(m.dag()),
            diag: m.diag().to_vec(),
            off,
        }
    }

    pub fn to_incomplete(&self) -> Result<IncompleteMatrix> {
        let dag = self.graph.to_dag()?;
        let entries = self
            .off
            .iter()
            .map(|e| label_pair(e, dag.p()).map(|(i, j)| (i, j, e.v)))
            .collect::<Result<Vec<_>>>()?;
        IncompleteMatrix::from_entries(dag, self.diag.clone(), &entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleJson {
    ScaledIdentity { scaled_identity: f64 },
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaJson {
    Rule { rule: AlphaRule },
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    /// May be left out when the graph comes from elsewhere.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub graph: Option<GraphJson>,
    #[serde(rename = "U")]
    pub u: ScaleJson,
    pub alpha: AlphaJson,
}

impl ParamsJson {
    pub fn from_params(params: &DagWishartParams) -> Self {
        let u = MatrixJson::from_matrix(params.u().as_matrix()).values;
        ParamsJson {
            graph: Some(GraphJson::from_dag(params.dag())),
            u: ScaleJson::Values(u),
            alpha: AlphaJson::Values(params.alpha().to_vec()),
        }
    }

    /// Resolves `alpha` against `dag` (the file's own graph unless overridden).
    pub fn to_params_for(&self, dag: Dag) -> Result<DagWishartParams> {
        let p = dag.p();
        let u = match &self.u {
            ScaleJson::ScaledIdentity { scaled_identity } => SpdMatrix::scaled_identity(p, *scaled_identity)?,
            ScaleJson::Values(v) => MatrixJson { p, values: v.clone() }.to_spd()?,
        };
        match &self.alpha {
            AlphaJson::Rule { rule } => DagWishartParams::with_rule(dag, u, *rule),
            AlphaJson::Values(a) => DagWishartParams::new(dag, u, a.clone()),
        }
    }

    pub fn to_params(&self) -> Result<DagWishartParams> {
        let g = self
            .graph
            .as_ref()
            .ok_or_else(|| Error::Parse("params file has no graph".into()))?;
        self.to_params_for(g.to_dag()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub estimator: Estimator,
    pub target: Target,
    pub graph: GraphJson,
    pub estimate: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub losses: Option<Losses>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hyper: Option<Hyper>,
}

impl ReportJson {
    pub fn from_report(r: &EstimatorReport, dag: &Dag) -> Self {
        ReportJson {
            estimator: r.estimator,
            target: r.target,
            graph: GraphJson::from_dag(dag),
            estimate: MatrixJson::from_matrix(r.estimate.as_matrix()),
            losses: r.losses,
            hyper: r.hyper,
        }
    }

    pub fn to_report(&self) -> Result<EstimatorReport> {
        Ok(EstimatorReport {
            estimator: self.estimator,
            target: self.target,
            estimate: self.estimate.to_spd()?,
            losses: self.losses,
            hyper: self.hyper,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredGraphJson {
    pub graph: GraphJson,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchJson {
    pub best: ScoredGraphJson,
    pub visited_count: usize,
    pub recorded_count: usize,
    pub per_restart: Vec<RestartSummary>,
}

impl SearchJson {
    pub fn from_result(r: &SearchResult) -> Self {
        SearchJson {
            best: ScoredGraphJson {
                graph: GraphJson::from_dag(&r.best.dag),
                score: r.best.score,
            },
            visited_count: r.visited.len(),
            recorded_count: r.recorded,
            per_restart: r.per_restart.clone(),
        }
    }
}

/// Pulls a graph out of any document that carries one: a bare graph, a
/// Cholesky factor, params, an estimator report or a search result.
pub fn graph_from_value(v: &serde_json::Value) -> Result<Dag> {
    let g = if v.get("edges").is_some() {
        v
    } else if let Some(g) = v.get("graph") {
        g
    } else if let Some(g) = v.get("best").and_then(|b| b.get("graph")) {
        g
    } else {
        return Err(Error::Parse("document does not contain a graph".into()));
    };
    GraphJson::deserialize(g)?.to_dag()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Numeric CSV, one observation per row. A first row that does not parse as
/// numbers is taken as a header.
pub fn read_data_csv<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", k + 1))),
        }
    }
    let p = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().find(|r| r.len() != p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: r.len(),
        });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse("data contains non-finite values".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), p, |r, c| rows[r][c]))
}

pub fn read_data_file(path: &Path) -> Result<DMatrix<f64>> {
    read_data_csv(fs::File::open(path)?)
}

/// Writes `x1,...,xp` as a header followed by the rows.
pub fn write_data_csv<W: Write>(writer: W, data: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((1..=data.ncols()).map(|j| format!("x{j}")))?;
    for r in 0..data.nrows() {
        w.write_record(data.row(r).iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRecord {
    pub estimator: String,
    pub target: Target,
    pub n: usize,
    pub loss: String,
    pub improvement_pct: f64,
    pub mc_se: f64,
    pub c: f64,
    pub u: f64,
    pub replications: usize,
    pub failures: usize,
}

impl From<&ImprovementRow> for ImprovementRecord {
    fn from(r: &ImprovementRow) -> Self {
        ImprovementRecord {
            estimator: r.estimator.clone(),
            target: r.target,
            n: r.n,
            loss: r.loss.clone(),
            improvement_pct: r.improvement_pct,
            mc_se: r.mc_se,
            c: r.c,
            u: r.u,
            replications: r.replications,
            failures: r.failures,
        }
    }
}

impl From<ImprovementRecord> for ImprovementRow {
    fn from(r: ImprovementRecord) -> Self {
        ImprovementRow {
            c: r.c,
            u: r.u,
            estimator: r.estimator,
            target: r.target,
            n: r.n,
            loss: r.loss,
            improvement_pct: r.improvement_pct,
            mc_se: r.mc_se,
            replications: r.replications,
            failures: r.failures,
        }
    }
}

/// Serializes records with a header row taken from the field names.
pub fn write_records<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read, T: DeserializeOwned>(reader: R) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// One row of `evaluate` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub sensitivity: f64,
    pub specificity: f64,
    pub stein: Option<f64>,
    pub l2: Option<f64>,
    pub score: Option<f64>,
}

impl EvaluationRecord {
    pub fn new(c: &Confusion) -> Self {
        EvaluationRecord {
            tp: c.tp,
            fp: c.fp,
            tn: c.tn,
            fn_: c.fn_,
            sensitivity: c.sensitivity,
            specificity: c.specificity,
            stein: None,
            l2: None,
            score: None,
        }
    }
}
