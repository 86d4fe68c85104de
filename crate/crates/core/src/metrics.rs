//! Verification metrics: confusion counts, FAR/FRR/HTER, threshold sweeps
//! and the equal error rate.
//!
//! Conventions used throughout:
//! * FAR = false accepts / imposter accesses, FRR = false rejects / genuine accesses.
//! * A score is accepted as genuine iff `score >= threshold`.

use serde::{Deserialize, Serialize};

use crate::model::Label;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub fa: u64,
    pub fr: u64,
    pub n_genuine: u64,
    pub n_imposter: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, predicted: Label, truth: Label) {
        match truth {
            Label::Genuine => {
                self.n_genuine += 1;
                if predicted == Label::Imposter {
                    self.fr += 1;
                }
            }
            Label::Imposter => {
                self.n_imposter += 1;
                if predicted == Label::Genuine {
                    self.fa += 1;
                }
            }
        }
    }

    /// Commutative merge of two partial tallies.
    pub fn merge(self, other: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            fa: self.fa + other.fa,
            fr: self.fr + other.fr,
            n_genuine: self.n_genuine + other.n_genuine,
            n_imposter: self.n_imposter + other.n_imposter,
        }
    }
}

/// Tallies `(predicted, truth)` pairs.
pub fn confusion(decisions: &[(Label, Label)]) -> Result<ConfusionCounts> {
    if decisions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = ConfusionCounts::default();
    for &(predicted, truth) in decisions {
        counts.record(predicted, truth);
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub far: f64,
    pub frr: f64,
    pub hter: f64,
}

pub fn rates(counts: &ConfusionCounts) -> Result<Rates> {
    if counts.n_imposter == 0 {
        return Err(Error::DegenerateCounts("no imposter accesses"));
    }
    if counts.n_genuine == 0 {
        return Err(Error::DegenerateCounts("no genuine accesses"));
    }
    let far = counts.fa as f64 / counts.n_imposter as f64;
    let frr = counts.fr as f64 / counts.n_genuine as f64;
    Ok(Rates {
        far,
        frr,
        hter: (far + frr) / 2.0,
    })
}

/// Percentage strings rounded half-up to two decimals, computed from the
/// integer counts so that exact halves round the same way on every platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PercentDisplay {
    pub far: String,
    pub frr: String,
    pub hter: String,
}

pub fn percent_display(counts: &ConfusionCounts) -> Result<PercentDisplay> {
    rates(counts)?;
    let (fa, ni) = (counts.fa as u128, counts.n_imposter as u128);
    let (fr, ng) = (counts.fr as u128, counts.n_genuine as u128);
    Ok(PercentDisplay {
        far: percent_2dp(fa, ni),
        frr: percent_2dp(fr, ng),
        // (fa/ni + fr/ng) / 2 = (fa*ng + fr*ni) / (2*ni*ng)
        hter: percent_2dp(fa * ng + fr * ni, 2 * ni * ng),
    })
}

/// `num/den` as a percentage with two decimals, rounded half-up.
pub fn percent_2dp(num: u128, den: u128) -> String {
    // hundredths of a percent = num * 10_000 / den
    let scaled = num * 10_000;
    let mut hundredths = scaled / den;
    if (scaled % den) * 2 >= den {
        hundredths += 1;
    }
    format!("{}.{:02}%", hundredths / 100, hundredths % 100)
}

/// Percentage string of an arbitrary rate, rounded half-up to two decimals.
pub fn format_rate(rate: f64) -> String {
    let hundredths = (rate * 10_000.0 + 0.5).floor();
    format!("{:.2}%", hundredths / 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// FAR/FRR at every distinct score plus one sentinel below the minimum and
/// one above the maximum, ordered by ascending threshold.
pub fn roc_sweep(genuine: &[f64], imposter: &[f64]) -> Result<Vec<RocPoint>> {
    if genuine.is_empty() || imposter.is_empty() {
        return Err(Error::EmptyInput);
    }
    if genuine.iter().chain(imposter).any(|s| !s.is_finite()) {
        return Err(Error::InvalidDataset("non-finite score in ROC input".into()));
    }
    let mut gen = genuine.to_vec();
    let mut imp = imposter.to_vec();
    gen.sort_by(f64::total_cmp);
    imp.sort_by(f64::total_cmp);

    let mut thresholds: Vec<f64> = gen.iter().chain(&imp).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup_by(|a, b| a == b);
    let lo = thresholds[0];
    let hi = thresholds[thresholds.len() - 1];

    let n_gen = gen.len() as f64;
    let n_imp = imp.len() as f64;
    let point = |t: f64| {
        let rejected_genuine = gen.partition_point(|&g| g < t);
        let accepted_imposter = imp.len() - imp.partition_point(|&m| m < t);
        RocPoint {
            threshold: t,
            far: accepted_imposter as f64 / n_imp,
            frr: rejected_genuine as f64 / n_gen,
        }
    };

    let mut roc = Vec::with_capacity(thresholds.len() + 2);
    roc.push(point(lo - (1.0 + lo.abs())));
    roc.extend(thresholds.iter().map(|&t| point(t)));
    roc.push(point(hi + (1.0 + hi.abs())));
    Ok(roc)
}

pub fn validate_roc(roc: &[RocPoint]) -> Result<()> {
    if roc.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (i, p) in roc.iter().enumerate() {
        if !(0.0..=1.0).contains(&p.far) || !(0.0..=1.0).contains(&p.frr) {
            return Err(Error::InvalidRoc(format!("rates out of [0,1] at point {i}")));
        }
    }
    for (i, w) in roc.windows(2).enumerate() {
        if w[1].threshold <= w[0].threshold {
            return Err(Error::InvalidRoc(format!(
                "thresholds not strictly increasing at point {}",
                i + 1
            )));
        }
        if w[1].far > w[0].far || w[1].frr < w[0].frr {
            return Err(Error::InvalidRoc(format!(
                "FAR must not increase and FRR must not decrease (point {})",
                i + 1
            )));
        }
    }
    Ok(())
}

/// EER value together with the threshold used as the classifier's
/// decision operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub eer: f64,
    pub threshold: f64,
}

enum Crossing {
    /// Index of the last point of the first run with far == frr.
    Exact(usize),
    /// far > frr at `k - 1` and far < frr at `k`.
    Bracket(usize),
    /// No sign change; closest point.
    Nearest(usize),
}

fn locate_crossing(roc: &[RocPoint]) -> Crossing {
    let diff = |p: &RocPoint| p.far - p.frr;
    match roc.iter().position(|p| diff(p) <= 0.0) {
        Some(k) if diff(&roc[k]) == 0.0 => {
            let mut last = k;
            while last + 1 < roc.len() && diff(&roc[last + 1]) == 0.0 {
                last += 1;
            }
            Crossing::Exact(last)
        }
        Some(k) if k > 0 => Crossing::Bracket(k),
        _ => {
            let nearest = roc
                .iter()
                .enumerate()
                .min_by(|a, b| diff(a.1).abs().total_cmp(&diff(b.1).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            Crossing::Nearest(nearest)
        }
    }
}

/// Equal error rate, linearly interpolated between the two ROC points that
/// bracket the FAR = FRR crossing.
pub fn eer(roc: &[RocPoint]) -> Result<f64> {
    validate_roc(roc)?;
    Ok(match locate_crossing(roc) {
        Crossing::Exact(k) => roc[k].far,
        Crossing::Bracket(k) => {
            let (a, b) = (roc[k - 1], roc[k]);
            let d0 = a.far - a.frr;
            let d1 = b.far - b.frr;
            let t = d0 / (d0 - d1);
            a.far + t * (b.far - a.far)
        }
        Crossing::Nearest(k) => (roc[k].far + roc[k].frr) / 2.0,
    })
}

/// EER plus a decision threshold at the crossing.
///
/// The chosen ROC point is the bracketing point with the smaller
/// `|far - frr|` (the higher threshold on ties). The returned threshold is the
/// midpoint between that point's threshold and its predecessor's, which
/// yields the same training decisions as the point itself.
pub fn eer_operating_point(roc: &[RocPoint]) -> Result<OperatingPoint> {
    let eer = eer(roc)?;
    let chosen = match locate_crossing(roc) {
        Crossing::Exact(k) | Crossing::Nearest(k) => k,
        Crossing::Bracket(k) => {
            let before = (roc[k - 1].far - roc[k - 1].frr).abs();
            let after = (roc[k].far - roc[k].frr).abs();
            if before < after {
                k - 1
            } else {
                k
            }
        }
    };
    let threshold = if chosen > 0 {
        roc[chosen - 1].threshold + (roc[chosen].threshold - roc[chosen - 1].threshold) / 2.0
    } else {
        roc[chosen].threshold
    };
    Ok(OperatingPoint { eer, threshold })
}

/// Metrics of one evaluated strategy or individual classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub name: String,
    pub counts: ConfusionCounts,
    pub far: f64,
    pub frr: f64,
    pub hter: f64,
    /// Number of MDRR decisions taken by the weighted-voting fallback.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fallbacks: Option<u64>,
    /// Present for strategies that output a score.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eer: Option<f64>,
    #[serde(skip)]
    pub roc: Option<Vec<RocPoint>>,
}

impl StrategyReport {
    pub fn from_counts(name: impl Into<String>, counts: ConfusionCounts) -> Result<Self> {
        let r = rates(&counts)?;
        Ok(Self {
            name: name.into(),
            counts,
            far: r.far,
            frr: r.frr,
            hter: r.hter,
            fallbacks: None,
            eer: None,
            roc: None,
        })
    }

    pub fn with_roc(mut self, roc: Vec<RocPoint>) -> Result<Self> {
        self.eer = Some(eer(&roc)?);
        self.roc = Some(roc);
        Ok(self)
    }

    pub fn percents(&self) -> PercentDisplay {
        percent_display(&self.counts).expect("counts validated at construction")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub strategies: Vec<StrategyReport>,
}

impl EvaluationReport {
    pub fn get(&self, name: &str) -> Option<&StrategyReport> {
        self.strategies.iter().find(|s| s.name == name)
    }

    /// Table with one column per strategy and rows FA number, FAR,
    /// FR number, FRR, HTER.
    pub fn render_table(&self) -> String {
        let mut rows: Vec<Vec<String>> = vec![vec![String::new()]];
        let labels = ["FA number", "FAR", "FR number", "FRR", "HTER"];
        for label in labels {
            rows.push(vec![label.to_string()]);
        }
        for s in &self.strategies {
            let p = s.percents();
            rows[0].push(s.name.clone());
            rows[1].push(group_thousands(s.counts.fa));
            rows[2].push(p.far);
            rows[3].push(group_thousands(s.counts.fr));
            rows[4].push(p.frr);
            rows[5].push(p.hter);
        }
        let ncols = rows[0].len();
        let widths: Vec<usize> = (0..ncols)
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<w$}", w = widths[c])
                    } else {
                        format!("{cell:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}
