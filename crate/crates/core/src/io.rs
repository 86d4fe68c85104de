//! File formats: score CSV, model/config/report JSON, ROC CSV.
//!
//! Score CSV header: `pattern_id,label,score_<name>[,score_<name>...]`.
//! Scores are written with the shortest decimal that round-trips to the same
//! `f64`, so writing and re-reading a dataset is lossless.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fusion::{Calibration, Strategy, SumThreshold, VoteThresholds, WeightsSpec};
use crate::metrics::{EvaluationReport, RocPoint, StrategyReport};
use crate::model::{ClassifierRegistry, Dataset, Label, ScoreSample};
use crate::reliability::{ReliabilityModel, ScoreTable, SMOOTHING_TAG};
use crate::synth::SynthSpec;
use crate::{Error, Result};

pub const MODEL_VERSION: &str = "fusebench-model/1";
pub const REPORT_VERSION: &str = "fusebench-report/1";

const SCORE_PREFIX: &str = "score_";

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Strict decimal: optional sign, at least one leading digit, optional
/// fractional part. No exponents, no locale separators, no `NaN`/`inf`.
pub fn parse_decimal(text: &str) -> Option<f64> {
    let body = text.strip_prefix(['+', '-']).unwrap_or(text);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || frac.is_some_and(|f| !digits(f)) {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    read_scores(open(path)?)
}

pub fn read_scores<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        None => return Err(Error::EmptyFile),
        Some(rec) => rec?,
    };
    let registry = parse_header(&header)?;
    let n = registry.len();

    let mut samples = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parse_err = |column: usize, reason: String| Error::Parse {
            line,
            column,
            reason,
        };
        if rec.len() != n + 2 {
            return Err(parse_err(
                rec.len().min(n + 2),
                format!("expected {} fields, found {}", n + 2, rec.len()),
            ));
        }
        let pattern_id = &rec[0];
        if pattern_id.is_empty() {
            return Err(parse_err(1, "empty pattern_id".into()));
        }
        let label = Label::parse(&rec[1]).ok_or_else(|| {
            parse_err(
                2,
                format!("label `{}` is not `genuine` or `imposter`", &rec[1]),
            )
        })?;
        let scores = (0..n)
            .map(|i| {
                let field = &rec[i + 2];
                parse_decimal(field).ok_or_else(|| {
                    parse_err(i + 3, format!("`{field}` is not a finite decimal score"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(ScoreSample::new(pattern_id, label, scores));
    }
    Ok(Dataset::new(registry, samples))
}

fn parse_header(header: &csv::StringRecord) -> Result<ClassifierRegistry> {
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() < 3 || fields[0] != "pattern_id" || fields[1] != "label" {
        return Err(Error::MissingHeader(
            "expected `pattern_id,label,score_<name>,...`".into(),
        ));
    }
    let names = fields[2..]
        .iter()
        .map(|f| match f.strip_prefix(SCORE_PREFIX) {
            Some(name) if !name.is_empty() => Ok(name.to_string()),
            _ => Err(Error::MissingHeader(format!(
                "column `{f}` must be named `score_<classifier>`"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    ClassifierRegistry::new(names).map_err(|e| Error::MissingHeader(e.to_string()))
}

pub fn write_scores<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec!["pattern_id".to_string(), "label".to_string()];
    header.extend(
        dataset
            .registry()
            .names()
            .iter()
            .map(|n| format!("{SCORE_PREFIX}{n}")),
    );
    wtr.write_record(&header)?;
    for s in dataset.samples() {
        let mut row = vec![s.pattern_id.clone(), s.label.as_str().to_string()];
        row.extend(s.scores.iter().map(|v| v.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<scores>", e))?;
    Ok(())
}

pub fn save_scores(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_scores(dataset, create(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierTableDoc {
    pub name: String,
    pub n_genuine: usize,
    pub n_imposter: usize,
    pub genuine: Vec<f64>,
    pub imposter: Vec<f64>,
}

/// Persisted reliability model plus the training-set calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub version: String,
    pub smoothing: String,
    pub classifiers: Vec<ClassifierTableDoc>,
    pub calibration: Calibration,
}

impl ModelDocument {
    pub fn new(model: &ReliabilityModel, calibration: Calibration) -> Self {
        let classifiers = model
            .names()
            .iter()
            .zip(model.tables())
            .map(|(name, t)| ClassifierTableDoc {
                name: name.clone(),
                n_genuine: t.n_genuine(),
                n_imposter: t.n_imposter(),
                genuine: t.genuine_sorted().to_vec(),
                imposter: t.imposter_sorted().to_vec(),
            })
            .collect();
        Self {
            version: MODEL_VERSION.to_string(),
            smoothing: SMOOTHING_TAG.to_string(),
            classifiers,
            calibration,
        }
    }

    pub fn into_parts(self) -> Result<(ReliabilityModel, Calibration)> {
        if self.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "version `{}`, expected `{MODEL_VERSION}`",
                self.version
            )));
        }
        if self.smoothing != SMOOTHING_TAG {
            return Err(Error::ModelFormat(format!(
                "smoothing `{}`, expected `{SMOOTHING_TAG}`",
                self.smoothing
            )));
        }
        let n = self.classifiers.len();
        let cal = &self.calibration;
        if cal.weights.len() != n
            || cal.thresholds.len() != n
            || cal.minmax.len() != n
            || cal.training_eers.len() != n
        {
            return Err(Error::ModelFormat(
                "calibration does not match the classifier count".into(),
            ));
        }
        let mut names = Vec::with_capacity(n);
        let mut tables = Vec::with_capacity(n);
        for c in self.classifiers {
            if c.genuine.len() != c.n_genuine || c.imposter.len() != c.n_imposter {
                return Err(Error::ModelFormat(format!(
                    "classifier `{}`: counts disagree with stored arrays",
                    c.name
                )));
            }
            if !c.genuine.is_sorted() || !c.imposter.is_sorted() {
                return Err(Error::ModelFormat(format!(
                    "classifier `{}`: score arrays must be sorted ascending",
                    c.name
                )));
            }
            names.push(c.name);
            tables.push(ScoreTable::new(c.genuine, c.imposter)?);
        }
        let model = ReliabilityModel::from_tables(names, tables)?;
        Ok((model, self.calibration))
    }
}

pub fn save_model(doc: &ModelDocument, path: impl AsRef<Path>) -> Result<()> {
    write_json(doc, path.as_ref())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelDocument> {
    let path = path.as_ref();
    Ok(serde_json::from_reader(open(path)?)?)
}

/// Run configuration file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<Strategy>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_thresholds: Option<VoteThresholds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum_threshold: Option<SumThreshold>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    Ok(serde_json::from_reader(open(path)?)?)
}

pub fn load_synth_spec(path: impl AsRef<Path>) -> Result<SynthSpec> {
    let path = path.as_ref();
    Ok(serde_json::from_reader(open(path)?)?)
}

pub fn save_synth_spec(spec: &SynthSpec, path: impl AsRef<Path>) -> Result<()> {
    write_json(spec, path.as_ref())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayRow {
    pub far: String,
    pub frr: String,
    pub hter: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    #[serde(flatten)]
    pub metrics: StrategyReport,
    /// Percentages exactly as printed in the report table.
    pub display: DisplayRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: String,
    pub lambda: f64,
    pub strategies: Vec<ReportEntry>,
}

impl ReportDocument {
    pub fn new(report: &EvaluationReport, lambda: f64) -> Self {
        let strategies = report
            .strategies
            .iter()
            .map(|s| {
                let p = s.percents();
                ReportEntry {
                    metrics: s.clone(),
                    display: DisplayRow {
                        far: p.far,
                        frr: p.frr,
                        hter: p.hter,
                    },
                }
            })
            .collect();
        Self {
            version: REPORT_VERSION.to_string(),
            lambda,
            strategies,
        }
    }
}

pub fn save_report(doc: &ReportDocument, path: impl AsRef<Path>) -> Result<()> {
    write_json(doc, path.as_ref())
}

pub fn write_roc_csv<W: Write>(roc: &[RocPoint], writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(["threshold", "far", "frr"])?;
    for p in roc {
        wtr.write_record([p.threshold.to_string(), p.far.to_string(), p.frr.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<roc>", e))?;
    Ok(())
}

pub fn save_roc_csv(roc: &[RocPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_roc_csv(roc, create(path)?)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
