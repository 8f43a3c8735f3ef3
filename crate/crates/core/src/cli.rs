//! `granred` command line: discretize, label, reduce, evaluate, compare.
//!
//! Exit codes: 0 success, 1 runtime error, 2 configuration or usage error.
//! Every failure is reported as one line on stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{self, ExperimentSpec, Method, SplitSpec};
use crate::proxy::{self, ProxyParams};
use crate::reduction::{self, ReduceOptions};
use crate::report::{self, ProxyEcho, ReportParams};
use crate::tabular::{self, DecisionTable, RawTable};

pub const THREADS_ENV: &str = "GRANRED_THREADS";

#[derive(Debug, Parser)]
#[command(name = "granred", version, about = "Semi-supervised attribute reduction for partially labeled tables")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equal-frequency binning of numeric columns; writes the same CSV shape.
    Discretize(DiscretizeArgs),
    /// Assign proxy labels to unlabeled rows and write the completed table.
    Label(LabelArgs),
    /// Compute a reduct and write its JSON trace report.
    Reduce(ReduceArgs),
    /// Run an experiment described by a key = value config file.
    Evaluate(EvaluateArgs),
    /// Compare reduction methods on one dataset from command-line settings.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file; header first, decision in the last column.
    #[arg(long)]
    pub input: PathBuf,
    /// Decision token that marks an unlabeled row.
    #[arg(long, default_value = "?")]
    pub missing_label: String,
    /// Equal-frequency bins for numeric columns.
    #[arg(long, default_value = "3")]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct ProxyArgs {
    /// Boosting factor of the proxy-label prior.
    #[arg(long, default_value = "0.0002")]
    pub epsilon: f64,
    /// Labeled-row count above which the labeled class ratio is ignored.
    #[arg(long, default_value = "500")]
    pub delta: usize,
    /// Positive-class prior over the whole table; required unless every row
    /// is labeled.
    #[arg(long)]
    pub prior_pos: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub proxy: ProxyArgs,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub proxy: ProxyArgs,
    /// Hide all labels except a random labeled subset of this rate.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Positive-share multiplier for the labeled subset (with --alpha).
    #[arg(long, default_value = "1.0")]
    pub beta: f64,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    /// Disable example and attribute pruning.
    #[arg(long)]
    pub no_accelerate: bool,
    /// Drop attributes that are redundant after the greedy search.
    #[arg(long)]
    pub enforce_min: bool,
    /// Absolute tolerance for entropy comparisons, in bits.
    #[arg(long, default_value = "1e-10")]
    pub tolerance: f64,
    /// JSON report file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Experiment config (key = value lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Per-cell CSV report.
    #[arg(long)]
    pub output: PathBuf,
    /// Summary table file (stdout when absent).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Add wall-clock timings to the reports.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "0.0002")]
    pub epsilon: f64,
    #[arg(long, default_value = "500")]
    pub delta: usize,
    /// Label rate of the random splits.
    #[arg(long, default_value = "0.1")]
    pub alpha: f64,
    #[arg(long, default_value = "1.0")]
    pub beta: f64,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    /// Cross-validation folds.
    #[arg(long, default_value = "10")]
    pub folds: usize,
    /// Random splits per setting.
    #[arg(long, default_value = "10")]
    pub repeats: usize,
    /// Shuffled cross-validation runs per reduct.
    #[arg(long, default_value = "10")]
    pub cv_repeats: usize,
    /// Neighbours for the k-NN classifier.
    #[arg(long, default_value = "3")]
    pub knn_k: usize,
    #[arg(long, default_value = "gce,gce-l,fisher,laplacian,gt,raw")]
    pub methods: String,
    /// Per-cell CSV report.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn open_sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(e).context(format!("creating {}", p.display())))?,
        )),
        None => Box::new(stdout),
    })
}

fn read_raw(args: &InputArgs) -> Result<RawTable> {
    let file = File::open(&args.input).map_err(|e| Error::Io(e).context(format!("opening {}", args.input.display())))?;
    tabular::load_csv(BufReader::new(file), &args.missing_label)
        .map_err(|e| e.context(args.input.display().to_string()))
}

fn read_table(args: &InputArgs) -> Result<DecisionTable> {
    tabular::prepare(&read_raw(args)?, args.bins)
}

fn proxy_params(args: &ProxyArgs, prior: f64) -> Result<ProxyParams> {
    ProxyParams::new(args.epsilon, args.delta, prior).map_err(|e| Error::Config(e.to_string()))
}

fn decision_line(d: &proxy::ProxyDecision) -> String {
    format!(
        "gamma={} p_init={} p_prior={} lambda={} label={} assigned={}",
        d.gamma, d.p_init, d.p_prior, d.lambda, d.label, d.assigned
    )
}

fn discretize(args: &DiscretizeArgs, stdout: &mut dyn Write) -> Result<()> {
    let raw = read_raw(&args.input)?;
    let binned = tabular::discretize_equal_frequency(&raw, args.input.bins)?;
    let mut sink = open_sink(args.output.as_deref(), stdout)?;
    binned.write_csv(&mut sink, &args.input.missing_label)?;
    sink.flush()?;
    Ok(())
}

fn label(args: &LabelArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let table = read_table(&args.input)?;
    let prior = tabular::resolve_prior(&table, args.proxy.prior_pos)?;
    let (proxied, decision) = proxy::assign_proxy_labels(&table, &proxy_params(&args.proxy, prior)?)?;
    let line = decision_line(&decision);
    match &args.output {
        Some(_) => writeln!(stdout, "{line}")?,
        // keep stdout a clean CSV stream
        None => writeln!(stderr, "{line}")?,
    }
    let mut sink = open_sink(args.output.as_deref(), stdout)?;
    proxied.write_csv(&mut sink, &args.input.missing_label)?;
    sink.flush()?;
    Ok(())
}

fn reduce(args: &ReduceArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut table = read_table(&args.input)?;
    let mut prior = args.proxy.prior_pos;
    let mut split = None;
    if let Some(alpha) = args.alpha {
        let truth = table.full_labels().map_err(|_| {
            Error::Config("--alpha needs a fully labeled input to draw the labeled subset from".into())
        })?;
        if prior.is_none() {
            prior = Some(tabular::prior_positive_probability(&table, Some(&truth))?);
        }
        let spec = SplitSpec {
            alpha,
            beta: args.beta,
            seed: args.seed,
        };
        table = harness::make_split(&table, &spec)?;
        split = Some(spec);
    }

    let mut proxy_echo = None;
    if !table.is_fully_labeled() {
        let prior = tabular::resolve_prior(&table, prior)?;
        let params = proxy_params(&args.proxy, prior)?;
        let (proxied, decision) = proxy::assign_proxy_labels(&table, &params)?;
        table = proxied;
        proxy_echo = Some(ProxyEcho { params, decision });
    }

    let options = ReduceOptions {
        accelerate: !args.no_accelerate,
        enforce_min: args.enforce_min,
        tolerance: args.tolerance,
    };
    let trace = reduction::reduce(&table, &options)?;
    let params = ReportParams {
        input: Some(args.input.input.display().to_string()),
        rows: table.n_rows(),
        attributes: table.n_attributes(),
        bins: Some(args.input.bins),
        options,
        split,
        proxy: proxy_echo,
    };
    let mut sink = open_sink(args.output.as_deref(), stdout)?;
    report::write_reduct_report(&mut sink, &trace, &table, &params)?;
    sink.flush()?;
    Ok(())
}

fn write_experiment(
    report: &harness::ExperimentReport,
    output: Option<&Path>,
    summary: Option<&Path>,
    timing: bool,
    stdout: &mut dyn Write,
) -> Result<()> {
    if let Some(path) = output {
        let file = File::create(path).map_err(|e| Error::Io(e).context(format!("creating {}", path.display())))?;
        let mut sink = BufWriter::new(file);
        report.write_cells_csv(&mut sink, timing)?;
        sink.flush()?;
    }
    let mut sink = open_sink(summary, stdout)?;
    sink.write_all(report.render_summary(timing).as_bytes())?;
    sink.flush()?;
    Ok(())
}

fn evaluate(args: &EvaluateArgs, stdout: &mut dyn Write) -> Result<()> {
    let spec = ExperimentSpec::from_config_file(&args.config)?;
    let report = harness::run_experiment(&spec)?;
    write_experiment(&report, Some(&args.output), args.summary.as_deref(), args.timing, stdout)
}

fn compare(args: &CompareArgs, stdout: &mut dyn Write) -> Result<()> {
    let spec = ExperimentSpec {
        dataset: args.input.input.clone(),
        alphas: vec![args.alpha],
        betas: vec![args.beta],
        repeats: args.repeats,
        folds: args.folds,
        cv_repeats: args.cv_repeats,
        knn_k: args.knn_k,
        methods: harness::parse_methods(&args.methods)?,
        epsilon: args.epsilon,
        delta: args.delta,
        bins: args.input.bins,
        missing_token: args.input.missing_label.clone(),
        seed: args.seed,
        ..ExperimentSpec::default()
    };
    spec.validate()?;
    if spec.methods.contains(&Method::Gce) {
        ProxyParams::new(spec.epsilon, spec.delta, 0.5).map_err(|e| Error::Config(e.to_string()))?;
    }
    let report = harness::run_experiment(&spec)?;
    write_experiment(&report, args.output.as_deref(), None, false, stdout)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    #[cfg(feature = "parallel")]
    {
        // a pool built earlier in the same process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn execute(config: &CliConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    configure_threads()?;
    match &config.command {
        Command::Discretize(a) => discretize(a, stdout),
        Command::Label(a) => label(a, stdout, stderr),
        Command::Reduce(a) => reduce(a, stdout),
        Command::Evaluate(a) => evaluate(a, stdout),
        Command::Compare(a) => compare(a, stdout),
    }
}

fn single_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses `argv` (program name first) and runs the subcommand, writing to
/// the given streams. Returns the process exit code.
pub fn run_with_io<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = write!(stderr, "{e}");
                return 2;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("usage error");
            let _ = writeln!(stderr, "granred: {}", single_line(first.trim_start_matches("error: ")));
            return 2;
        }
    };
    match execute(&config, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "granred: {}", single_line(&e.to_string()));
            if e.is_configuration() {
                2
            } else {
                1
            }
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run_with_io(argv, &mut out, &mut err);
    let _ = out.flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        CliConfig::command().debug_assert();
    }

    #[test]
    fn help_lists_defaults() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run_with_io(["granred", "label", "--help"], &mut out, &mut err), 0);
        let help = String::from_utf8(out).unwrap();
        for default in ["[default: 0.0002]", "[default: 500]", "[default: 3]"] {
            assert!(help.contains(default), "{help}");
        }
        let mut out = Vec::new();
        assert_eq!(run_with_io(["granred", "compare", "--help"], &mut out, &mut err), 0);
        let help = String::from_utf8(out).unwrap();
        assert!(help.contains("[default: 10]"), "{help}");
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run_with_io(["granred", "reduce", "--input", "x.csv", "--bogus"], &mut out, &mut err), 2);
        let msg = String::from_utf8(err).unwrap();
        assert_eq!(msg.lines().count(), 1, "{msg}");
        assert!(msg.contains("--bogus"));
    }

    #[test]
    fn missing_file_is_runtime_error() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with_io(["granred", "reduce", "--input", "/nonexistent/t.csv"], &mut out, &mut err);
        assert_eq!(code, 1);
        let msg = String::from_utf8(err).unwrap();
        assert!(msg.contains("/nonexistent/t.csv"), "{msg}");
    }
}
