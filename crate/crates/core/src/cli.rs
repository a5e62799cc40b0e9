//! The `dagw` command line.
//!
//! Every command that writes to a file also writes `<out>.manifest.json`
//! (or the path given by `--manifest`) recording the argument vector, the
//! resolved configuration and digests of the inputs. `dagw replay` re-runs a
//! manifest.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chol::{precision_from_cholesky, sample_data, sigma_from_xi, CholeskyFactor};
use crate::dag::random_dag;
use crate::error::Error;
use crate::estimators::{self, Estimator, Hyper, ImprovementConfig, Target};
use crate::io::{
    self, CholeskyJson, EvaluationRecord, GraphJson, ImprovementRecord, ParamsJson, ReportJson, SearchJson,
};
use crate::rng::substream;
use crate::select::{
    confusion, default_kappa_grid, graph_score, lasso_dag, shotgun_search, RestartSummary, SampleFrom, SearchConfig,
};
use crate::wishart::{sample_prior, AlphaRule, SuffStats};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "dagw", version, about = "DAG-Wishart priors for Gaussian DAG models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Random parent-ordered DAG with unit noise and uniform edge weights.
    Generate(GenerateArgs),
    /// Gaussian data from a fixed Cholesky factor or from a prior draw.
    Sample(SampleArgs),
    /// Covariance or precision estimate for a known graph.
    Fit(FitArgs),
    /// Structure learning with the fixed vertex ordering.
    Select(SelectArgs),
    /// Recovery metrics and losses of an estimate against the truth.
    Evaluate(EvaluateArgs),
    /// Lasso versus DAG-Wishart structure recovery over replicated data sets.
    Table1(Table1Args),
    /// Relative risk improvement of the Bayes estimators over maximum likelihood.
    Table2(Table2Args),
    /// Re-runs the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0.01)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0.2)]
    weight_min: f64,
    #[arg(long, default_value_t = 0.8)]
    weight_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the Cholesky factor here.
    #[arg(long)]
    theta: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Cholesky factor to sample from.
    #[arg(long, conflicts_with_all = ["graph", "params"])]
    theta: Option<PathBuf>,
    /// Graph for a prior draw; may also be any document containing a graph.
    #[arg(long, requires = "params")]
    graph: Option<PathBuf>,
    /// Prior parameters; the factor is drawn from this prior.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Where to save the drawn factor.
    #[arg(long)]
    theta_out: Option<PathBuf>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum EstimatorArg {
    Mle,
    Map,
    BayesSigma,
    BayesOmega,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Mle => Estimator::Mle,
            EstimatorArg::Map => Estimator::Map,
            EstimatorArg::BayesSigma => Estimator::BayesSigma,
            EstimatorArg::BayesOmega => Estimator::BayesOmega,
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    #[arg(long, default_value_t = 3.0)]
    c: f64,
    #[arg(long, default_value_t = 3.0)]
    b: f64,
    #[arg(long, default_value_t = 3.0)]
    u: f64,
    /// Cholesky factor of the truth, for losses.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Lasso,
    Dagw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleFromArg {
    Latest,
    Accumulated,
}

/// Search settings; unset values take the defaults for the data dimension.
#[derive(Debug, Args, Clone)]
struct SearchArgs {
    /// Lasso level; for the search, a comma-separated starting grid.
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    neighborhood: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long, value_enum)]
    sample_from: Option<SampleFromArg>,
}

impl SearchArgs {
    fn resolve(&self, p: usize, seed: u64) -> Result<SearchConfig, CliError> {
        let mut cfg = SearchConfig::for_dimension(p, seed);
        if let Some(r) = self.restarts {
            cfg.restarts = r;
            if r > 1 {
                cfg.kappa_grid = default_kappa_grid(r, p);
            } else {
                cfg.kappa_grid = vec![0.1];
            }
        }
        if let Some(k) = &self.kappa {
            if self.restarts.is_none() {
                cfg.restarts = k.len();
            }
            cfg.kappa_grid = k.clone();
        }
        cfg.steps = self.steps.unwrap_or(cfg.steps);
        cfg.neighborhood = self.neighborhood.unwrap_or(cfg.neighborhood);
        cfg.gamma = self.gamma.unwrap_or(cfg.gamma);
        cfg.b = self.b.unwrap_or(cfg.b);
        cfg.c = self.c.unwrap_or(cfg.c);
        cfg.u = self.u.unwrap_or(cfg.u);
        if let Some(s) = self.sample_from {
            cfg.sample_from = match s {
                SampleFromArg::Latest => SampleFrom::Latest,
                SampleFromArg::Accumulated => SampleFrom::Accumulated,
            };
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "dagw")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Any document with the true graph; a Cholesky factor when `--losses` is set.
    #[arg(long)]
    truth: PathBuf,
    /// Any document with the estimated graph; an estimator report when `--losses` is set.
    #[arg(long)]
    estimate: PathBuf,
    /// Add Stein and L2 losses of the reported matrix.
    #[arg(long)]
    losses: bool,
    /// Add the graph score of the estimate on these data.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    u: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct Table1Args {
    #[arg(long, default_value_t = 50)]
    p: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.01)]
    edge_prob: f64,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Level of the lasso baseline.
    #[arg(long, default_value_t = 0.1)]
    lasso_kappa: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TargetArg {
    Sigma,
    Omega,
}

#[derive(Debug, Args)]
struct Table2Args {
    #[arg(long, default_value_t = 50)]
    p: usize,
    #[arg(long, value_delimiter = ',', default_value = "30,100")]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 0.01)]
    edge_prob: f64,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    c: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    u: Vec<f64>,
    #[arg(long, default_value_t = 3.0)]
    b: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "omega,sigma")]
    targets: Vec<TargetArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Fail if an input no longer matches its recorded digest.
    #[arg(long)]
    check_inputs: bool,
}

/// Written next to every file output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// Path to hex SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub version: String,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Compute(e.into())
    }
}

/// Accumulates what a command read and wrote.
struct Run {
    command: &'static str,
    argv: Vec<String>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| {
            CliError::Compute(Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            )))
        })?;
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Compute(e.into()))
    }

    fn read_data(&mut self, path: &Path) -> Result<nalgebra::DMatrix<f64>, CliError> {
        let bytes = self.read(path)?;
        Ok(io::read_data_csv(bytes.as_slice())?)
    }

    fn write(&mut self, path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
        match path {
            Some(p) => {
                fs::write(p, bytes)?;
                self.outputs.push(p.display().to_string());
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
            }
        }
        Ok(())
    }

    fn finish<C: Serialize>(self, output: &Output, config: &C, seed: Option<u64>) -> Result<(), CliError> {
        let path = match (&output.manifest, &output.out) {
            (Some(m), _) => m.clone(),
            (None, Some(o)) => {
                let mut s = o.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            }
            (None, None) => return Ok(()),
        };
        let manifest = RunManifest {
            command: self.command.into(),
            argv: self.argv,
            config: serde_json::to_value(config).map_err(Error::from)?,
            seed,
            inputs: self.inputs,
            outputs: self.outputs,
            version: VERSION.into(),
        };
        fs::write(path, io::to_json_string(&manifest)?)?;
        Ok(())
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            report_error("usage", &e.render().to_string());
            return 2;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, args) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            report_error("usage", &m);
            2
        }
        Err(CliError::Compute(e)) => {
            report_error(e.kind(), &e.to_string());
            1
        }
    }
}

fn report_error(kind: &str, message: &str) {
    let v = serde_json::json!({ "error": kind, "message": message.trim_end() });
    eprintln!("{v}");
}

fn dispatch(command: Command, argv: Vec<String>) -> Result<(), CliError> {
    let name = match &command {
        Command::Generate(_) => "generate",
        Command::Sample(_) => "sample",
        Command::Fit(_) => "fit",
        Command::Select(_) => "select",
        Command::Evaluate(_) => "evaluate",
        Command::Table1(_) => "table1",
        Command::Table2(_) => "table2",
        Command::Replay(_) => "replay",
    };
    let run = Run {
        command: name,
        argv,
        inputs: BTreeMap::new(),
        outputs: Vec::new(),
    };
    match command {
        Command::Generate(a) => generate(a, run),
        Command::Sample(a) => sample(a, run),
        Command::Fit(a) => fit(a, run),
        Command::Select(a) => select(a, run),
        Command::Evaluate(a) => evaluate(a, run),
        Command::Table1(a) => table1(a, run),
        Command::Table2(a) => table2(a, run),
        Command::Replay(a) => replay(a),
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    Ok(io::to_json_string(v)?.into_bytes())
}

fn generate(a: GenerateArgs, mut run: Run) -> Result<(), CliError> {
    let (dag, theta) = random_dag(
        a.p,
        a.edge_prob,
        (a.weight_min, a.weight_max),
        &mut substream("generate", a.seed, &[]),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    log::info!("generated {} edges on {} vertices", dag.edge_count(), a.p);
    run.write(a.output.out.as_deref(), &json_bytes(&GraphJson::from_dag(&dag))?)?;
    if let Some(t) = &a.theta {
        run.write(Some(t), &json_bytes(&CholeskyJson::from_factor(&theta))?)?;
    }
    let config = serde_json::json!({
        "p": a.p, "edge_prob": a.edge_prob, "weight_min": a.weight_min, "weight_max": a.weight_max,
    });
    run.finish(&a.output, &config, Some(a.seed))
}

fn sample(a: SampleArgs, mut run: Run) -> Result<(), CliError> {
    let theta: CholeskyFactor = if let Some(t) = &a.theta {
        run.read_json::<CholeskyJson>(t)?.to_factor()?
    } else if let Some(pp) = &a.params {
        let pj: ParamsJson = run.read_json(pp)?;
        let params = match &a.graph {
            Some(g) => {
                let v: serde_json::Value = run.read_json(g)?;
                pj.to_params_for(io::graph_from_value(&v)?)?
            }
            None => pj.to_params()?,
        };
        let theta = sample_prior(&params, &mut substream("sample-theta", a.seed, &[]))?;
        if let Some(out) = &a.theta_out {
            run.write(Some(out), &json_bytes(&CholeskyJson::from_factor(&theta))?)?;
        }
        theta
    } else {
        return Err(CliError::Usage("sample needs --theta or --params".into()));
    };
    let data = sample_data(&theta, a.n, &mut substream("sample-data", a.seed, &[]));
    let mut buf = Vec::new();
    io::write_data_csv(&mut buf, &data)?;
    run.write(a.output.out.as_deref(), &buf)?;
    let config = serde_json::json!({
        "n": a.n,
        "source": if a.theta.is_some() { "theta" } else { "prior" },
    });
    run.finish(&a.output, &config, Some(a.seed))
}

fn fit(a: FitArgs, mut run: Run) -> Result<(), CliError> {
    let data = run.read_data(&a.data)?;
    let gv: serde_json::Value = run.read_json(&a.graph)?;
    let dag = io::graph_from_value(&gv)?;
    if data.ncols() != dag.p() {
        return Err(Error::DimensionMismatch {
            expected: dag.p(),
            found: data.ncols(),
        }
        .into());
    }
    let estimator = Estimator::from(a.estimator);
    let truth = match &a.truth {
        Some(t) => {
            let theta = run.read_json::<CholeskyJson>(t)?.to_factor()?;
            if theta.dag().p() != dag.p() {
                return Err(Error::DimensionMismatch {
                    expected: dag.p(),
                    found: theta.dag().p(),
                }
                .into());
            }
            Some(match estimator.target() {
                Target::Sigma => sigma_from_xi(&theta.to_xi()).into_matrix(),
                Target::Omega => precision_from_cholesky(&theta).into_matrix(),
            })
        }
        None => None,
    };
    let hyper = Hyper { c: a.c, b: a.b, u: a.u };
    let stats = SuffStats::from_data(&data);
    let report = estimators::estimate(estimator, &stats, &dag, hyper, truth.as_ref())?;
    run.write(
        a.output.out.as_deref(),
        &json_bytes(&ReportJson::from_report(&report, &dag))?,
    )?;
    let config = serde_json::json!({ "estimator": a.estimator, "c": a.c, "b": a.b, "u": a.u });
    run.finish(&a.output, &config, None)
}

#[derive(Serialize)]
struct LassoConfig {
    method: Method,
    kappa: f64,
    b: f64,
    c: f64,
    u: f64,
}

#[derive(Serialize)]
struct SearchManifestConfig {
    method: Method,
    #[serde(flatten)]
    search: SearchConfig,
}

fn select(a: SelectArgs, mut run: Run) -> Result<(), CliError> {
    let data = run.read_data(&a.data)?;
    let p = data.ncols();
    let doc = match a.method {
        Method::Lasso => {
            let kappa = match a.search.kappa.as_deref() {
                None => 0.1,
                Some([k]) => *k,
                Some(_) => return Err(CliError::Usage("lasso takes a single --kappa".into())),
            };
            let cfg = LassoConfig {
                method: a.method,
                kappa,
                b: a.search.b.unwrap_or(3.0),
                c: a.search.c.unwrap_or(1.0),
                u: a.search.u.unwrap_or(1.0),
            };
            let dag = lasso_dag(&data, kappa)?;
            let score = graph_score(
                &dag,
                &SuffStats::from_data(&data),
                AlphaRule { b: cfg.b, c: cfg.c },
                cfg.u,
            )?;
            let doc = SearchJson {
                best: io::ScoredGraphJson {
                    graph: GraphJson::from_dag(&dag),
                    score,
                },
                visited_count: 1,
                recorded_count: 1,
                per_restart: vec![RestartSummary {
                    kappa,
                    start_score: score,
                    best_score: score,
                    recorded: 1,
                }],
            };
            run.write(a.output.out.as_deref(), &json_bytes(&doc)?)?;
            return run.finish(&a.output, &cfg, Some(a.seed));
        }
        Method::Dagw => {
            let cfg = a.search.resolve(p, a.seed)?;
            let result = shotgun_search(&data, &cfg)?;
            log::info!(
                "best score {} over {} distinct graphs",
                result.best.score,
                result.visited.len()
            );
            (
                SearchJson::from_result(&result),
                SearchManifestConfig {
                    method: a.method,
                    search: cfg,
                },
            )
        }
    };
    run.write(a.output.out.as_deref(), &json_bytes(&doc.0)?)?;
    run.finish(&a.output, &doc.1, Some(a.seed))
}

fn evaluate(a: EvaluateArgs, mut run: Run) -> Result<(), CliError> {
    let tv: serde_json::Value = run.read_json(&a.truth)?;
    let ev: serde_json::Value = run.read_json(&a.estimate)?;
    let truth = io::graph_from_value(&tv)?;
    let est = io::graph_from_value(&ev)?;
    let mut rec = EvaluationRecord::new(&confusion(&truth, &est)?);
    if a.losses {
        let theta = CholeskyJson::deserialize(&tv)
            .map_err(|_| CliError::Usage("--losses needs a Cholesky factor as --truth".into()))?
            .to_factor()?;
        let report = ReportJson::deserialize(&ev)
            .map_err(|_| CliError::Usage("--losses needs an estimator report as --estimate".into()))?
            .to_report()?;
        let m = match report.target {
            Target::Sigma => sigma_from_xi(&theta.to_xi()).into_matrix(),
            Target::Omega => precision_from_cholesky(&theta).into_matrix(),
        };
        rec.stein = Some(estimators::loss_stein(report.estimate.as_matrix(), &m)?);
        rec.l2 = Some(estimators::loss_l2(&m, report.estimate.as_matrix(), theta.dag())?);
    }
    if let Some(d) = &a.data {
        let data = run.read_data(d)?;
        rec.score = Some(graph_score(
            &est,
            &SuffStats::from_data(&data),
            AlphaRule { b: a.b, c: a.c },
            a.u,
        )?);
    }
    let mut buf = Vec::new();
    io::write_records(&mut buf, &[rec])?;
    run.write(a.output.out.as_deref(), &buf)?;
    let config = serde_json::json!({ "losses": a.losses, "b": a.b, "c": a.c, "u": a.u });
    run.finish(&a.output, &config, None)
}

/// One row of `table1`; `replicate` is `mean` on the summary rows.
#[derive(Debug, Serialize)]
struct Table1Record {
    replicate: String,
    method: &'static str,
    true_edges: f64,
    edges: f64,
    sensitivity: f64,
    specificity: f64,
}

fn table1(a: Table1Args, mut run: Run) -> Result<(), CliError> {
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let base = a.search.resolve(a.p, a.seed)?;
    let mut rows = Vec::new();
    for rep in 0..a.reps {
        let (truth, theta) = random_dag(
            a.p,
            a.edge_prob,
            (0.2, 0.8),
            &mut substream("table1-graph", a.seed, &[rep as u64]),
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        let data = sample_data(&theta, a.n, &mut substream("table1-data", a.seed, &[rep as u64]));
        let lasso = lasso_dag(&data, a.lasso_kappa)?;
        let mut cfg = base.clone();
        cfg.seed = substream("table1-search", a.seed, &[rep as u64]).random();
        let found = shotgun_search(&data, &cfg)?.best.dag;
        for (method, est) in [("lasso", &lasso), ("dagw", &found)] {
            let c = confusion(&truth, est)?;
            rows.push(Table1Record {
                replicate: (rep + 1).to_string(),
                method,
                true_edges: truth.edge_count() as f64,
                edges: est.edge_count() as f64,
                sensitivity: c.sensitivity,
                specificity: c.specificity,
            });
        }
        log::info!("table1 replicate {}/{} done", rep + 1, a.reps);
    }
    let reps = a.reps as f64;
    let mut means = Vec::new();
    for method in ["lasso", "dagw"] {
        let mine: Vec<&Table1Record> = rows.iter().filter(|r| r.method == method).collect();
        let mean = |f: fn(&Table1Record) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / reps;
        means.push(Table1Record {
            replicate: "mean".into(),
            method,
            true_edges: mean(|r| r.true_edges),
            edges: mean(|r| r.edges),
            sensitivity: mean(|r| r.sensitivity),
            specificity: mean(|r| r.specificity),
        });
    }
    rows.extend(means);
    let mut buf = Vec::new();
    io::write_records(&mut buf, &rows)?;
    run.write(a.output.out.as_deref(), &buf)?;
    let config = serde_json::json!({
        "p": a.p, "n": a.n, "edge_prob": a.edge_prob, "reps": a.reps,
        "lasso_kappa": a.lasso_kappa, "search": base,
    });
    run.finish(&a.output, &config, Some(a.seed))
}

fn table2(a: Table2Args, mut run: Run) -> Result<(), CliError> {
    let (_, theta) = random_dag(
        a.p,
        a.edge_prob,
        (0.2, 0.8),
        &mut substream("table2-graph", a.seed, &[]),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut hypers = Vec::new();
    for &c in &a.c {
        for &u in &a.u {
            hypers.push(Hyper { c, b: a.b, u });
        }
    }
    let config = ImprovementConfig {
        hypers,
        ns: a.ns.clone(),
        replications: a.reps,
        targets: a
            .targets
            .iter()
            .map(|t| match t {
                TargetArg::Sigma => Target::Sigma,
                TargetArg::Omega => Target::Omega,
            })
            .collect(),
        seed: a.seed,
    };
    let rows = estimators::improvement_table(&theta, &config).map_err(|e| match e {
        Error::InvalidArgument(m) => CliError::Usage(m),
        e => CliError::Compute(e),
    })?;
    let recs: Vec<ImprovementRecord> = rows.iter().map(ImprovementRecord::from).collect();
    let mut buf = Vec::new();
    io::write_records(&mut buf, &recs)?;
    run.write(a.output.out.as_deref(), &buf)?;
    let manifest_config = serde_json::json!({
        "p": a.p, "edge_prob": a.edge_prob, "true_edges": theta.dag().edge_count(), "design": config,
    });
    run.finish(&a.output, &manifest_config, Some(a.seed))
}

fn replay(a: ReplayArgs) -> Result<(), CliError> {
    let m: RunManifest = io::read_json(&a.manifest)?;
    if m.command == "replay" {
        return Err(CliError::Usage("a replay manifest cannot be replayed".into()));
    }
    if a.check_inputs {
        for (path, digest) in &m.inputs {
            let now = hex::encode(Sha256::digest(fs::read(path)?));
            if &now != digest {
                return Err(
                    Error::InvalidArgument(format!("input {path} changed since the manifest was written")).into(),
                );
            }
        }
    }
    let argv: Vec<OsString> = std::iter::once(OsString::from("dagw"))
        .chain(m.argv.iter().map(OsString::from))
        .collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(e.render().to_string()))?;
    dispatch(cli.command, m.argv)
}

/// Sizes the global thread pool from `DAGW_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("DAGW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
}
