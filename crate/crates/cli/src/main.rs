//! `pidforest` command-line front end.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::{Failure, Kind};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  internal error
  2  usage error (unknown flag, bad value, invalid parameter)
  3  i/o error (missing or unreadable file)
  4  schema mismatch (columns differ from the model or the schema file)
  5  invalid data (unparseable cell, out-of-domain value, degenerate input)
  6  model format error (malformed or unsupported model document)

Errors are reported on stderr as one line:
  error: code=<name> message=<text>";

#[derive(Parser, Debug)]
#[command(name = "pidforest", version, about = "Partial-identification forest anomaly detection", after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads for fitting and scoring (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a forest on a CSV file and write the model document.
    Fit(FitArgs),
    /// Score rows with a fitted model.
    Score(ScoreArgs),
    /// Evaluate a score file against labels.
    Eval(EvalArgs),
    /// Generate a synthetic benchmark dataset.
    Synth(SynthArgs),
    /// Exact brute-force scores for small inputs.
    Oracle(OracleArgs),
    /// Baseline detectors.
    Baseline(BaselineArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON schema naming and typing the columns; without it every non-label column is continuous.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    trees: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Maximum number of children per split.
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ScoreBy {
    Sparsity,
    Depth,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Needed only when the model was fitted with named categories.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScoreBy::Sparsity)]
    score_by: ScoreBy,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Witness coordinates per row in CSV output, narrowest first.
    #[arg(long, default_value_t = 3)]
    witness: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Metric {
    Auc,
    Topfrac,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// CSV with a `score` column, higher meaning more anomalous.
    #[arg(long)]
    scores: PathBuf,
    /// CSV with an `anomaly` or `label` column of 0/1 values, row-aligned with the scores.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Auc)]
    metric: Metric,
    /// Share of rows flagged by `topfrac`.
    #[arg(long, default_value_t = 0.05)]
    fraction: f64,
    /// Also write the ROC curve as `threshold,fpr,tpr`.
    #[arg(long)]
    roc_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(subcommand)]
    generator: Generator,
}

#[derive(Args, Debug)]
struct SynthCommon {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; metadata goes to `<out>.meta.json` and the column schema to `<out>.schema.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Generator {
    /// Random hypercube corners plus a clump of identical all-zero anomalies.
    Masking {
        #[arg(long, default_value_t = 970)]
        normal: usize,
        #[arg(long, default_value_t = 30)]
        anomalies: usize,
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[command(flatten)]
        common: SynthCommon,
    },
    /// Two planar Gaussians plus uniform noise coordinates; lowest-density points are anomalies.
    Gaussian {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        anomalies: usize,
        #[arg(long, default_value_t = 0)]
        d_noise: usize,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        noise_lo: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        noise_hi: f64,
        #[arg(long, default_value_t = 5.0)]
        mean_distance: f64,
        #[command(flatten)]
        common: SynthCommon,
    },
    /// Sine wave with frozen segments; shingled into windows when `--window` is given.
    Sine {
        #[arg(long, default_value_t = 4000)]
        length: usize,
        #[arg(long, default_value_t = 40.0)]
        period: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 10)]
        segments: usize,
        #[arg(long, default_value_t = 20)]
        segment_length: usize,
        #[arg(long, default_value_t = 0.05)]
        noise_sigma: f64,
        #[arg(long)]
        window: Option<usize>,
        #[command(flatten)]
        common: SynthCommon,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    /// Exact 1-d scores; one column of values in [0, 1].
    Pid1d,
    /// Boolean ID and partial-ID lengths; 0/1 columns, at most 20.
    Boolean,
    /// Exhaustive subcube search; at most 3 columns of values in [0, 1].
    Subcube,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(value_enum)]
    kind: OracleKind,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(subcommand)]
    detector: Detector,
}

#[derive(Subcommand, Debug)]
enum Detector {
    /// Isolation forest: fit on `--input`, score `--score-input` (default: the same file).
    Iforest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        score_input: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::new(Kind::Usage, "--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(Kind::Internal, e.to_string()))?;
    }
    match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Score(a) => commands::score(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Synth(a) => commands::synth(&a.generator),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Baseline(a) => commands::baseline(&a.detector),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                    ExitCode::from(Kind::Usage.exit_code())
                } else {
                    ExitCode::SUCCESS
                };
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return Failure::new(Kind::Usage, first).report();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
