use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shapcause::causal::{ordering_restricted_shapley, LinearGaussianScm};
use shapcause::dataset::{MatchTolerance, TabularDataset};
use shapcause::experiments::{self, ExperimentName, ExperimentParams};
use shapcause::io::{load_gaussian, load_model, load_scm, NamedAttribution};
use shapcause::shapley::{
    propagated_std_errors, shapley_exact, shapley_permutation_sampling, PermutationConfig,
};
use shapcause::value_functions::{
    marginal_empirical_std_errors, Backend, ModelValueFunction, Source, ValueFunctionSpec,
};
use shapcause::{par, Coalition, Error, Gaussian, Result};

const THREADS_ENV: &str = "SHAPCAUSE_THREADS";

#[derive(Parser)]
#[command(name = "shapcause", version, about = "Shapley-value attributions with marginal, conditional and causal value functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Attribute one prediction to its features.
    Explain(ExplainArgs),
    /// Run a named experiment and report every comparison.
    Experiment(ExperimentArgs),
    /// Write plot-ready intermediate data.
    #[command(subcommand)]
    Emit(EmitCommand),
}

#[derive(Subcommand)]
enum EmitCommand {
    /// Replaced-column rows a marginal backend evaluates, with Mahalanobis flags.
    EvalSamples(EvalSamplesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Permutation,
    /// Orderings consistent with the DAG of `--scm`.
    Ordering,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// CSV dataset; an optional second header row gives column kinds.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Gaussian JSON `{"mu":[...],"sigma":[[...]]}`.
    #[arg(long)]
    gaussian: Option<PathBuf>,
    /// Linear-Gaussian SCM JSON.
    #[arg(long)]
    scm: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated feature values.
    #[arg(long, allow_hyphen_values = true)]
    explicand: String,
    #[arg(long, value_parser = parse_backend)]
    backend: Backend,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "exact")]
    method: MethodArg,
    /// Monte Carlo draws per coalition; also the sample size drawn from an
    /// SCM for dataset backends.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Sampled orderings for `--method permutation`.
    #[arg(long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Half-width of the continuous matching band in column standard deviations.
    #[arg(long)]
    tol_continuous: Option<f64>,
    /// Average matched rows as observed instead of pinning coalition columns.
    #[arg(long)]
    raw_matched: bool,
    #[arg(long, value_enum, default_value = "json")]
    output: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_parser = parse_experiment)]
    name: ExperimentName,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    /// JSON object, or `@path` to read one: `{"rhos":[...],"samples":N}`.
    #[arg(long)]
    params: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    output: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalSamplesArgs {
    #[arg(long, conflicts_with = "gaussian", required_unless_present = "gaussian")]
    data: Option<PathBuf>,
    /// Draw `--samples` rows from this Gaussian instead of reading data.
    #[arg(long)]
    gaussian: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    explicand: String,
    /// Comma-separated feature indices held at the explicand.
    #[arg(long, default_value = "")]
    coalition: String,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Squared-distance cut-off; defaults to the chi-square 99th percentile.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_backend(s: &str) -> std::result::Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_experiment(s: &str) -> std::result::Result<ExperimentName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_floats(flag: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::argument(format!("--{flag}: {t:?} is not a number")))
        })
        .collect()
}

fn parse_coalition(m: usize, s: &str) -> Result<Coalition> {
    let idx = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::argument(format!("--coalition: {t:?} is not a feature index")))
        })
        .collect::<Result<Vec<_>>>()?;
    Coalition::from_indices(m, &idx)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn explain(args: &ExplainArgs) -> Result<ExitCode> {
    let model = load_model(&args.model)?;
    let explicand = parse_floats("explicand", &args.explicand)?;
    let mut names = None;
    let mut scm: Option<LinearGaussianScm> = None;
    let source = if let Some(p) = &args.source.data {
        let d = TabularDataset::from_csv_path(p)?;
        names = Some(d.names().to_vec());
        Source::Data(d)
    } else if let Some(p) = &args.source.gaussian {
        Source::Gaussian(load_gaussian(p)?)
    } else {
        let p = args.source.scm.as_ref().expect("clap requires one source");
        let s = load_scm(p)?;
        let src = if args.backend.needs_dataset() {
            Source::Data(TabularDataset::continuous(s.sample(args.samples, args.seed, None)?)?)
        } else {
            Source::Gaussian(s.observational_gaussian()?)
        };
        scm = Some(s);
        src
    };
    let mut spec = ValueFunctionSpec::new(args.backend, model, explicand, source)
        .with_mc_samples(args.samples)
        .with_seed(args.seed)
        .with_raw_matched(args.raw_matched);
    if let Some(t) = args.tol_continuous {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::argument(format!("--tol-continuous must be non-negative, got {t}")));
        }
        spec = spec.with_tolerance(MatchTolerance::StdDevs(t));
    }
    let v = ModelValueFunction::new(spec)?;
    let m = v.spec().num_features();

    let result = match args.method {
        MethodArg::Exact => {
            let mut r = shapley_exact(&v)?;
            if args.backend.is_stochastic() {
                r.std_errors = Some(if args.backend == Backend::MarginalEmpirical {
                    marginal_empirical_std_errors(v.spec())?
                } else {
                    propagated_std_errors(&v.std_error_table()?, m)?
                });
            }
            r
        }
        MethodArg::Permutation => shapley_permutation_sampling(
            &v,
            &PermutationConfig {
                n_permutations: args.permutations,
                seed: args.seed,
            },
        )?,
        MethodArg::Ordering => {
            let s = scm.as_ref().ok_or_else(|| {
                Error::argument("--method ordering needs --scm for the causal ordering")
            })?;
            ordering_restricted_shapley(&v, s.dag())?
        }
    };

    let named = NamedAttribution::new(result, names.as_deref());
    let mut out = open_out(args.out.as_deref())?;
    match args.output {
        Format::Json => writeln!(out, "{}", named.to_json())?,
        Format::Csv => named.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    let mut params = match &args.params {
        None => ExperimentParams::default(),
        Some(p) => match p.strip_prefix('@') {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::input(path, e.to_string()))?;
                ExperimentParams::from_json(&text)?
            }
            None => ExperimentParams::from_json(p)?,
        },
    };
    if args.samples.is_some() {
        params.samples = args.samples;
    }
    let report = experiments::run_experiment(args.name, &params, args.seed)?;
    let mut out = open_out(args.out.as_deref())?;
    match args.output {
        Format::Json => writeln!(out, "{}", report.to_json())?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    let failed = report.failures().count();
    eprintln!(
        "{}: {} rows, {} failed, {:.3}s",
        report.name,
        report.rows.len(),
        failed,
        report.wall_time_secs
    );
    for r in report.failures() {
        eprintln!(
            "  FAIL {}: expected {} computed {} (|diff| {:.3e}, tol {:.3e})",
            r.point, r.expected, r.computed, r.abs_diff, r.tolerance
        );
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn emit_eval_samples(args: &EvalSamplesArgs) -> Result<ExitCode> {
    let data = match (&args.data, &args.gaussian) {
        (Some(p), _) => TabularDataset::from_csv_path(p)?,
        (None, Some(p)) => {
            let g: Gaussian = load_gaussian(p)?;
            TabularDataset::continuous(g.sample(args.samples, args.seed)?)?
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let explicand = parse_floats("explicand", &args.explicand)?;
    let s = parse_coalition(data.ncols(), &args.coalition)?;
    let e = experiments::eval_samples(&data, &explicand, s, args.threshold)?;
    let mut out = open_out(args.out.as_deref())?;
    e.write_csv(&mut out)?;
    out.flush()?;
    eprintln!(
        "flagged {:.4} of {} rows (threshold {:.4})",
        e.flagged_fraction(),
        e.flags.len(),
        e.threshold
    );
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> Result<()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::argument(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
            par::init_global_threads(n)
        }
        Err(_) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = configure_threads().and_then(|()| match &cli.command {
        Command::Explain(a) => explain(a),
        Command::Experiment(a) => experiment(a),
        Command::Emit(EmitCommand::EvalSamples(a)) => emit_eval_samples(a),
    });
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
