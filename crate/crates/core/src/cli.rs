//! Command-line driver: `synth`, `train`, `eval`, `weights`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::fusion::{self, Calibration, CalibrationSettings, Strategy, DEFAULT_LAMBDA};
use crate::io::{self, ModelDocument, ReportDocument, RunConfig};
use crate::metrics::{self, format_rate};
use crate::model::Label;
use crate::reliability::ReliabilityModel;
use crate::{synth, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fusebench",
    version,
    about = "Decision-level fusion of verification classifiers by decision reliability ratio"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a train/test score benchmark from a synthetic spec
    Synth(SynthArgs),
    /// Build a reliability model and calibration from training scores
    Train(TrainArgs),
    /// Evaluate individual classifiers and fusion strategies on test scores
    Eval(EvalArgs),
    /// Print inverse-EER integration weights
    Weights(WeightsArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out_train: PathBuf,
    #[arg(long)]
    out_test: PathBuf,
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated subset of mdrr,vote,wvote,sum,wsum
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    /// Gap threshold for MDRR's weighted-voting fallback
    #[arg(long, value_parser = parse_lambda)]
    lambda: Option<f64>,
    /// Write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write one ROC CSV per score-output entry into this directory
    #[arg(long)]
    roc_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct WeightsSource {
    /// Training score CSV to measure EERs from
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Comma-separated training EERs, as fractions
    #[arg(long, value_delimiter = ',')]
    eers: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct WeightsArgs {
    #[command(flatten)]
    source: WeightsSource,
}

fn parse_lambda(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 => Ok(v),
        _ => Err(format!("lambda must be a positive number, got `{s}`")),
    }
}

/// Parses `argv` (program name first) and runs the selected subcommand.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let rendered = e.render().to_string();
            if informational {
                let _ = write!(out, "{rendered}");
                return EXIT_OK;
            }
            let _ = write!(err, "{rendered}");
            return EXIT_USAGE;
        }
    };

    let result = match cli.command {
        Command::Synth(a) => run_synth(a, out),
        Command::Train(a) => run_train(a, out),
        Command::Eval(a) => run_eval(a, out),
        Command::Weights(a) => run_weights(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

type CliResult = Result<(), Error>;

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn run_synth(a: SynthArgs, out: &mut dyn Write) -> CliResult {
    let mut spec = io::load_synth_spec(&a.spec)?;
    if let Some(seed) = a.seed_override {
        spec.seed = seed;
    }
    let (train, test) = synth::generate(&spec)?;
    io::save_scores(&train, &a.out_train)?;
    io::save_scores(&test, &a.out_test)?;
    writeln!(
        out,
        "seed {}: train {} genuine / {} imposter, test {} genuine / {} imposter",
        spec.seed,
        train.genuine_count(),
        train.imposter_count(),
        test.genuine_count(),
        test.imposter_count()
    )
    .map_err(stdout_err)
}

fn train_settings(config: &RunConfig) -> CalibrationSettings {
    CalibrationSettings {
        weights: config.weights.clone().unwrap_or_default(),
        vote_thresholds: config.vote_thresholds.clone().unwrap_or_default(),
        sum_threshold: config.sum_threshold.clone().unwrap_or_default(),
    }
}

fn load_optional_config(path: Option<&PathBuf>) -> Result<RunConfig, Error> {
    path.map(io::load_config).transpose().map(Option::unwrap_or_default)
}

fn run_train(a: TrainArgs, out: &mut dyn Write) -> CliResult {
    let config = load_optional_config(a.config.as_ref())?;
    let train = io::load_scores(&a.scores)?;
    let model = ReliabilityModel::build(&train)?;
    let calibration = Calibration::fit(&train, &train_settings(&config))?;

    writeln!(out, "classifier  training EER  threshold  weight").map_err(stdout_err)?;
    for (i, name) in model.names().iter().enumerate() {
        writeln!(
            out,
            "{name:<10}  {:>12}  {:>9.6}  {:.6}",
            format_rate(calibration.training_eers[i]),
            calibration.thresholds[i],
            calibration.weights[i]
        )
        .map_err(stdout_err)?;
    }
    io::save_model(&ModelDocument::new(&model, calibration), &a.model)
}

fn run_eval(a: EvalArgs, out: &mut dyn Write) -> CliResult {
    let config = load_optional_config(a.config.as_ref())?;
    let (model, calibration) = io::load_model(&a.model)?.into_parts()?;

    // Weights and thresholds are fitted at train time; a config that asks for
    // different ones cannot be honoured without the training scores.
    let fitted = calibration.settings();
    let wanted = train_settings(&config);
    if config.weights.is_some() && wanted.weights != fitted.weights
        || config.vote_thresholds.is_some() && wanted.vote_thresholds != fitted.vote_thresholds
        || config.sum_threshold.is_some() && wanted.sum_threshold != fitted.sum_threshold
    {
        return Err(Error::InvalidConfig(
            "weights and thresholds differ from those the model was trained with; \
             rerun `train --config` with this file"
                .into(),
        ));
    }

    let strategies = a
        .strategies
        .or(config.strategies)
        .unwrap_or_else(|| Strategy::ALL.to_vec());
    let lambda = a.lambda.or(config.lambda).unwrap_or(DEFAULT_LAMBDA);
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig("lambda must be positive".into()));
    }

    let test = io::load_scores(&a.scores)?;
    let report = fusion::evaluate_all(&test, &model, &calibration, &strategies, lambda)?;

    write!(out, "{}", report.render_table()).map_err(stdout_err)?;
    writeln!(out).map_err(stdout_err)?;
    for s in &report.strategies {
        if let Some(eer) = s.eer {
            writeln!(out, "test EER {:<8} {}", s.name, format_rate(eer)).map_err(stdout_err)?;
        }
        if let Some(n) = s.fallbacks {
            writeln!(out, "mdrr fallbacks (gap <= {lambda}): {n}").map_err(stdout_err)?;
        }
    }

    if let Some(path) = &a.report {
        io::save_report(&ReportDocument::new(&report, lambda), path)?;
    }
    if let Some(dir) = &a.roc_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for s in &report.strategies {
            if let Some(roc) = &s.roc {
                io::save_roc_csv(roc, dir.join(format!("roc_{}.csv", s.name)))?;
            }
        }
    }
    Ok(())
}

fn run_weights(a: WeightsArgs, out: &mut dyn Write) -> CliResult {
    let (names, eers): (Vec<String>, Vec<f64>) = match (a.source.scores, a.source.eers) {
        (Some(path), _) => {
            let train = io::load_scores(path)?;
            let mut eers = Vec::new();
            for i in 0..train.n_classifiers() {
                let roc = metrics::roc_sweep(
                    &train.scores_for(i, Label::Genuine),
                    &train.scores_for(i, Label::Imposter),
                )?;
                eers.push(metrics::eer(&roc)?);
            }
            (train.registry().names().to_vec(), eers)
        }
        (None, Some(eers)) => ((1..=eers.len()).map(|i| format!("#{i}")).collect(), eers),
        (None, None) => unreachable!("clap requires one weights source"),
    };
    let weights = fusion::compute_weights(&eers)?;
    for ((name, eer), w) in names.iter().zip(&eers).zip(&weights) {
        writeln!(out, "{name:<10}  EER {:>7}  weight {w:.6}", format_rate(*eer)).map_err(stdout_err)?;
    }
    Ok(())
}
