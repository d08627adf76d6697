//! Command-line front door for the pnml learners.
//!
//! Subcommands: `predict` (single prediction as JSON), `tu` (twice-universal
//! report), `curve` (regret-versus-feature CSV), `sweep` (lambda-spectrum
//! CSV), `loo` (leave-one-out bound decay CSV), and `capacity` (channel
//! capacity as JSON). All values are in nats unless `--bits` is given;
//! floats render at 12 significant digits so repeated invocations are
//! byte-identical.
//!
//! Exit status: 0 on success, 2 on validation errors (bad arguments, bad
//! dataset files, enumeration guards), 1 on runtime failures (I/O,
//! non-convergence). Errors print one machine-parsable line to stderr.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use pnml_core::harness::{
    config_sidecar_json, curve_csv, decay_csv, format_value, run_lambda_sweep, run_loo_decay,
    run_regret_curve, sweep_csv, ClassSpec, ExperimentConfig, HarnessError, LearnerSpec,
};
use pnml_core::models::ThresholdTheta;
use pnml_core::pnml::{glambda_predict, pnml_predict, Lambda, PnmlError};
use pnml_core::stochastic::{ba_capacity, Channel, StochasticError};
use pnml_core::twice_universal::{tu_predict, ClassBank};
use pnml_core::sequence::SequenceError;
use pnml_core::{DataError, Dataset, ModelError, Prediction};

/// Seed precedence: `--seed` flag, then this variable, then the config file.
pub const SEED_ENV: &str = "PNML_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad_header: expected \"x,y\", found {0:?}")]
    BadHeader(String),
    #[error("malformed_row: line {line}: {detail}")]
    MalformedRow { line: usize, detail: String },
    #[error("non_binary_label: line {line}: label {found:?} is not 0 or 1")]
    NonBinaryLabel { line: usize, found: String },
    #[error("invalid_argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pnml(#[from] PnmlError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

/// 2 for validation problems the caller can fix, 1 for runtime failures.
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Io(_) => 1,
        CliError::Stochastic(StochasticError::NotConverged { .. }) => 1,
        CliError::Stochastic(StochasticError::ZeroEvidence) => 1,
        CliError::Data(DataError::AllZeroScores) => 1,
        _ => 2,
    }
}

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

/// Reads a `x,y` CSV into a binary-label dataset, preserving row order.
/// An empty file after the header is a valid empty dataset.
pub fn read_dataset(path: &std::path::Path) -> Result<Dataset, CliError> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text)
}

pub fn parse_dataset(text: &str) -> Result<Dataset, CliError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == "x,y" => {}
        Some((_, header)) => return Err(CliError::BadHeader(header.to_string())),
        None => return Err(CliError::BadHeader(String::new())),
    }

    let mut pairs = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim_end_matches('\r');
        if row.is_empty() {
            continue;
        }
        let mut fields = row.split(',');
        let (x_str, y_str) = match (fields.next(), fields.next(), fields.next()) {
            (Some(x), Some(y), None) => (x, y),
            _ => {
                return Err(CliError::MalformedRow {
                    line,
                    detail: format!("expected two fields, found {row:?}"),
                })
            }
        };
        let x: f64 = x_str.trim().parse().map_err(|_| CliError::MalformedRow {
            line,
            detail: format!("bad feature {x_str:?}"),
        })?;
        if !x.is_finite() {
            return Err(CliError::MalformedRow {
                line,
                detail: format!("feature {x} is not finite"),
            });
        }
        let y = match y_str.trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(CliError::NonBinaryLabel { line, found: other.to_string() })
            }
        };
        pairs.push((x, y));
    }
    Ok(Dataset::binary(&pairs)?)
}

/// Renders a dataset back to the `x,y` CSV format; `parse_dataset` on the
/// result reproduces the dataset exactly.
pub fn write_dataset(data: &Dataset) -> String {
    let mut out = String::from("x,y\n");
    for s in data.samples() {
        out.push_str(&format!("{},{}\n", s.x, s.y));
    }
    out
}

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(name = "pnml", version, about = "Universal prediction under log-loss")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predict the label distribution at one test feature.
    Predict(PredictArgs),
    /// Twice-universal prediction over a bank of classes.
    Tu(TuArgs),
    /// Mean regret as a function of the test feature.
    Curve(CurveArgs),
    /// Regret curves across a list of lambda values (common random numbers).
    Sweep(SweepArgs),
    /// Leave-one-out bound decay table over growing sequence lengths.
    Loo(LooArgs),
    /// Capacity of a built-in channel, with the capacity-achieving prior.
    Capacity(CapacityArgs),
}

fn parse_class(s: &str) -> Result<ClassSpec, String> {
    ClassSpec::from_str(s)
}

fn parse_learner(s: &str) -> Result<LearnerSpec, String> {
    LearnerSpec::from_str(s)
}

fn parse_lambda(s: &str) -> Result<Lambda, String> {
    if s == "inf" {
        return Ok(Lambda::infinity());
    }
    s.parse::<f64>()
        .map_err(|_| format!("bad lambda {s:?}"))
        .and_then(|v| Lambda::new(v).map_err(|e| e.to_string()))
}

fn parse_generator(s: &str) -> Result<ThresholdTheta, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected b,p1,p2 but found {s:?}"));
    }
    let vals: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?}")))
        .collect::<Result<_, _>>()?;
    ThresholdTheta::new(vals[0], vals[1], vals[2]).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model class: bernoulli, threshold, or segment<k>.
    #[arg(long, value_parser = parse_class)]
    pub class: ClassSpec,
    /// Training dataset CSV with header x,y.
    #[arg(long)]
    pub train: PathBuf,
    /// Test feature.
    #[arg(long)]
    pub x: f64,
    /// Training weight: omit for the plain learner, `inf` for ERM.
    #[arg(long, value_parser = parse_lambda)]
    pub lambda: Option<Lambda>,
    /// Report gamma in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Args)]
pub struct TuArgs {
    /// Comma-separated class bank, e.g. bernoulli,threshold,segment2.
    #[arg(long)]
    pub bank: String,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// JSON config file (the same shape the sidecar records).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Generator parameters b,p1,p2.
    #[arg(long, value_parser = parse_generator)]
    pub generator: Option<ThresholdTheta>,
    /// Training set size per run.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of evaluation points on [0,1] (default 101).
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Learner: pnml[:class], glambda:<l>[:class], palg:<alg>, tu:<bank>, mixture.
    #[arg(long, value_parser = parse_learner)]
    pub learner: Option<LearnerSpec>,
    /// Write CSV here (plus a .json config sidecar) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated lambda values; `inf` is allowed.
    #[arg(long)]
    pub lambdas: String,
    #[command(flatten)]
    pub curve: CurveArgs,
}

#[derive(Debug, Args)]
pub struct LooArgs {
    #[arg(long, value_parser = parse_class)]
    pub class: ClassSpec,
    /// Largest sequence length (table covers 2..=max_n).
    #[arg(long)]
    pub max_n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Channel family: bsc, identity, or uniform.
    #[arg(long)]
    pub channel: String,
    /// Crossover probability (bsc only).
    #[arg(long)]
    pub crossover: Option<f64>,
    /// Alphabet size (identity and uniform; default 2).
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long)]
    pub bits: bool,
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

const NATS_PER_BIT: f64 = std::f64::consts::LN_2;

fn unit_scale(bits: bool) -> f64 {
    if bits {
        NATS_PER_BIT
    } else {
        1.0
    }
}

fn prediction_json(p: &Prediction, scale: f64) -> String {
    let q: Vec<String> = p.probs().iter().map(|&v| format_value(v)).collect();
    format!("{{\"q\":[{}],\"gamma\":{}}}", q.join(","), format_value(p.gamma() / scale))
}

fn resolve_seed(flag: Option<u64>, config_seed: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Ok(text) = std::env::var(SEED_ENV) {
        return text
            .parse::<u64>()
            .map_err(|_| CliError::InvalidArgument(format!("bad {SEED_ENV} value {text:?}")));
    }
    Ok(config_seed.unwrap_or(0))
}

fn assemble_config(args: &CurveArgs) -> Result<ExperimentConfig, CliError> {
    let from_file: Option<ExperimentConfig> = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::InvalidArgument(format!("bad config JSON: {e}")))?;
            // Accept either a bare config or the sidecar shape that wraps it.
            let node = if doc.get("config").is_some() { doc["config"].clone() } else { doc };
            Some(
                serde_json::from_value(node)
                    .map_err(|e| CliError::InvalidArgument(format!("bad config: {e}")))?,
            )
        }
        None => None,
    };

    let seed = resolve_seed(args.seed, from_file.as_ref().map(|c| c.seed))?;
    let base = from_file.unwrap_or_else(|| ExperimentConfig {
        generator: ThresholdTheta::new(0.5, 0.2, 0.8).expect("valid default"),
        n_train: 100,
        runs: 100,
        seed,
        x_grid: ExperimentConfig::default_grid(),
        learner: LearnerSpec::Pnml { class: ClassSpec::Threshold },
    });

    let x_grid = match args.grid_points {
        None => base.x_grid,
        Some(0) => return Err(CliError::InvalidArgument("grid_points must be >= 1".into())),
        Some(1) => vec![0.5],
        Some(k) => (0..k).map(|i| i as f64 / (k - 1) as f64).collect(),
    };

    Ok(ExperimentConfig {
        generator: args.generator.unwrap_or(base.generator),
        n_train: args.n.unwrap_or(base.n_train),
        runs: args.runs.unwrap_or(base.runs),
        seed,
        x_grid,
        learner: args.learner.clone().unwrap_or(base.learner),
    })
}

fn emit(out: &Option<PathBuf>, csv: String, sidecar: Option<String>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, csv)?;
            if let Some(json) = sidecar {
                let mut sidecar_path = path.clone().into_os_string();
                sidecar_path.push(".json");
                fs::write(PathBuf::from(sidecar_path), json)?;
            }
            Ok(())
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn build_bank(spec: &str) -> Result<ClassBank, CliError> {
    let classes = spec
        .split(',')
        .map(|token| {
            let class: ClassSpec = token
                .trim()
                .parse()
                .map_err(CliError::InvalidArgument)?;
            Ok((class.name(), class.instantiate()? as Arc<dyn pnml_core::ModelClass>))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(ClassBank::new(classes)?)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Predict(args) => {
            let class = args.class.instantiate()?;
            let train = read_dataset(&args.train)?;
            let prediction = match args.lambda {
                None => pnml_predict(class.as_ref(), &train, args.x)?,
                Some(lam) => glambda_predict(class.as_ref(), &train, args.x, lam)?,
            };
            println!("{}", prediction_json(&prediction, unit_scale(args.bits)));
            Ok(())
        }
        Command::Tu(args) => {
            let bank = build_bank(&args.bank)?;
            let train = read_dataset(&args.train)?;
            let report = tu_predict(&bank, &train, args.x)?;
            let scale = unit_scale(args.bits);
            let per_class: Vec<String> = report
                .per_class
                .iter()
                .map(|(name, p)| format!("\"{name}\":{}", prediction_json(p, scale)))
                .collect();
            let rbar: Vec<String> =
                report.rbar.iter().map(|&v| format_value(v / scale)).collect();
            println!(
                "{{\"q\":[{}],\"overhead\":{},\"per_class\":{{{}}},\"rbar\":[{}]}}",
                report
                    .prediction
                    .probs()
                    .iter()
                    .map(|&v| format_value(v))
                    .collect::<Vec<_>>()
                    .join(","),
                format_value(report.overhead / scale),
                per_class.join(","),
                rbar.join(",")
            );
            Ok(())
        }
        Command::Curve(args) => {
            let cfg = assemble_config(args)?;
            let mut rows = run_regret_curve(&cfg)?;
            let scale = unit_scale(args.bits);
            for row in rows.iter_mut() {
                row.mean_gamma /= scale;
                row.std_gamma /= scale;
            }
            let units = if args.bits { "bits" } else { "nats" };
            emit(&args.out, curve_csv(&rows), Some(config_sidecar_json(&cfg, units)))
        }
        Command::Sweep(args) => {
            let cfg = assemble_config(&args.curve)?;
            let lambdas = args
                .lambdas
                .split(',')
                .map(|token| parse_lambda(token.trim()).map_err(CliError::InvalidArgument))
                .collect::<Result<Vec<_>, _>>()?;
            let mut rows = run_lambda_sweep(&cfg, &lambdas)?;
            let scale = unit_scale(args.curve.bits);
            for row in rows.iter_mut() {
                row.mean_gamma /= scale;
            }
            let units = if args.curve.bits { "bits" } else { "nats" };
            emit(&args.curve.out, sweep_csv(&rows), Some(config_sidecar_json(&cfg, units)))
        }
        Command::Loo(args) => {
            let seed = resolve_seed(args.seed, None)?;
            let mut rows = run_loo_decay(&args.class, args.max_n, seed)?;
            let scale = unit_scale(args.bits);
            for row in rows.iter_mut() {
                row.nml_bound /= scale;
                row.pnml_loo /= scale;
            }
            emit(&args.out, decay_csv(&rows), None)
        }
        Command::Capacity(args) => {
            let channel = match args.channel.as_str() {
                "bsc" => {
                    let crossover = args.crossover.ok_or_else(|| {
                        CliError::InvalidArgument("bsc needs --crossover".into())
                    })?;
                    Channel::binary_symmetric(crossover)?
                }
                "identity" => {
                    let size = args.size.unwrap_or(2);
                    identity_channel(size)?
                }
                "uniform" => {
                    let size = args.size.unwrap_or(2);
                    uniform_channel(size)?
                }
                other => {
                    return Err(CliError::InvalidArgument(format!(
                        "unknown channel {other:?} (expected bsc, identity, or uniform)"
                    )))
                }
            };
            let result = ba_capacity(&channel, args.tol, args.max_iter)?;
            let scale = unit_scale(args.bits);
            let prior: Vec<String> =
                result.prior.iter().map(|&w| format_value(w)).collect();
            println!(
                "{{\"capacity\":{},\"prior\":[{}],\"iterations\":{},\"gap\":{}}}",
                format_value(result.capacity_nats / scale),
                prior.join(","),
                result.iterations,
                format_value(result.gap / scale)
            );
            Ok(())
        }
    }
}

fn placeholder_params(size: usize) -> Result<Vec<pnml_core::Theta>, CliError> {
    (0..size)
        .map(|i| {
            let p = if size == 1 { 0.5 } else { i as f64 / (size - 1) as f64 };
            Ok(pnml_core::Theta::Bernoulli(
                pnml_core::models::BernoulliTheta::new(p).map_err(CliError::Model)?,
            ))
        })
        .collect()
}

fn identity_channel(size: usize) -> Result<Channel, CliError> {
    if size < 2 {
        return Err(CliError::InvalidArgument("identity channel needs size >= 2".into()));
    }
    let rows = (0..size)
        .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(Channel::new(placeholder_params(size)?, rows)?)
}

fn uniform_channel(size: usize) -> Result<Channel, CliError> {
    if size < 2 {
        return Err(CliError::InvalidArgument("uniform channel needs size >= 2".into()));
    }
    let rows = vec![vec![1.0 / size as f64; size]; size];
    Ok(Channel::new(placeholder_params(size)?, rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_round_trip_is_exact() {
        let data = Dataset::binary(&[(0.1, 1), (0.9, 0), (0.30000000000000004, 1)]).unwrap();
        let text = write_dataset(&data);
        let back = parse_dataset(&text).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn parse_dataset_accepts_empty_body() {
        let data = parse_dataset("x,y\n").unwrap();
        assert!(data.is_empty());
    }

    #[test]
    fn parse_dataset_reports_line_numbers() {
        let err = parse_dataset("x,y\nabc,1\n").unwrap_err();
        match err {
            CliError::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_dataset("x,y\n0.5,1\n0.6,2\n").unwrap_err();
        match err {
            CliError::NonBinaryLabel { line, found } => {
                assert_eq!(line, 3);
                assert_eq!(found, "2");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_dataset_rejects_wrong_header() {
        assert!(matches!(parse_dataset("a,b\n"), Err(CliError::BadHeader(_))));
    }

    #[test]
    fn exit_codes_partition_errors() {
        assert_eq!(exit_code(&CliError::InvalidArgument("x".into())), 2);
        assert_eq!(
            exit_code(&CliError::MalformedRow { line: 2, detail: "x".into() }),
            2
        );
        assert_eq!(exit_code(&CliError::Io(std::io::Error::other("x"))), 1);
    }

    #[test]
    fn seed_resolution_prefers_flag() {
        // No env manipulation here: flag beats config regardless.
        assert_eq!(resolve_seed(Some(7), Some(3)).unwrap(), 7);
    }
}
