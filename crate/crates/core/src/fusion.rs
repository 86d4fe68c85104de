//! Decision fusion strategies.
//!
//! * `mdrr`: pick the class with the largest weighted reliability ratio over
//!   all classifiers, unless the unweighted gap between the best genuine and
//!   best imposter ratio is within `lambda`, in which case the classifiers'
//!   own reliability decisions are combined by weighted voting.
//! * `vote` / `wvote`: (weighted) majority of per-classifier threshold decisions.
//! * `sum` / `wsum`: (weighted) mean of min-max normalized scores against a
//!   fused-score threshold.
//!
//! Every tie resolves to [`Label::Imposter`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::{self, ConfusionCounts, EvaluationReport, StrategyReport};
use crate::model::{Dataset, Label};
use crate::exact;
use crate::reliability::{ExactRatio, ReliabilityModel, ReliabilityPair};
use crate::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "mdrr")]
    Mdrr,
    #[serde(rename = "vote")]
    Voting,
    #[serde(rename = "wvote")]
    WeightedVoting,
    #[serde(rename = "sum")]
    Sum,
    #[serde(rename = "wsum")]
    WeightedSum,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Mdrr,
        Strategy::Voting,
        Strategy::WeightedVoting,
        Strategy::Sum,
        Strategy::WeightedSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Mdrr => "mdrr",
            Strategy::Voting => "vote",
            Strategy::WeightedVoting => "wvote",
            Strategy::Sum => "sum",
            Strategy::WeightedSum => "wsum",
        }
    }

    /// Sum strategies produce a fused score as well as a decision.
    pub fn outputs_score(self) -> bool {
        matches!(self, Strategy::Sum | Strategy::WeightedSum)
    }

    /// Parses a comma-separated list such as `mdrr,vote,wsum`.
    pub fn parse_list(list: &str) -> std::result::Result<Vec<Strategy>, String> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                format!("unknown strategy `{s}` (expected one of mdrr, vote, wvote, sum, wsum)")
            })
    }
}

/// Training-score range of one classifier, used for min-max normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn normalize(&self, score: f64) -> f64 {
        ((score - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }
}

/// Everything one strategy needs to decide a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub strategy: Strategy,
    pub weights: Vec<f64>,
    pub lambda: f64,
    /// Per-classifier accept thresholds for the voting strategies.
    pub thresholds: Vec<f64>,
    /// Accept threshold on the fused score; required by the sum strategies.
    pub fused_threshold: Option<f64>,
    pub minmax: Vec<MinMax>,
}

impl FusionConfig {
    pub fn n_classifiers(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 {
            return Err(Error::InvalidConfig("no classifiers".into()));
        }
        if self.thresholds.len() != n || self.minmax.len() != n {
            return Err(Error::InvalidConfig(format!(
                "expected {n} thresholds and ranges, got {} and {}",
                self.thresholds.len(),
                self.minmax.len()
            )));
        }
        if self.weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidConfig("weights must be positive".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidConfig("lambda must be positive".into()));
        }
        if self.strategy.outputs_score() {
            for (i, r) in self.minmax.iter().enumerate() {
                if !(r.min < r.max) {
                    return Err(Error::DegenerateRange(i));
                }
            }
            if !self.fused_threshold.is_some_and(f64::is_finite) {
                return Err(Error::InvalidConfig(
                    "sum strategies need a finite fused-score threshold".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedDecision {
    pub label: Label,
    /// Per-classifier reliability ratios (MDRR only).
    pub rr_pairs: Vec<ReliabilityPair>,
    pub gap: Option<f64>,
    pub fallback_used: bool,
    pub fused_score: Option<f64>,
}

impl FusedDecision {
    fn plain(label: Label) -> Self {
        Self {
            label,
            rr_pairs: Vec::new(),
            gap: None,
            fallback_used: false,
            fused_score: None,
        }
    }
}

/// Normalized inverse-EER weights: `w_i = (1/EER_i) / sum_j (1/EER_j)`.
pub fn compute_weights(training_eers: &[f64]) -> Result<Vec<f64>> {
    if training_eers.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (i, &e) in training_eers.iter().enumerate() {
        if e == 0.0 {
            return Err(Error::ZeroEer(i));
        }
        if !(e > 0.0 && e <= 0.5) {
            return Err(Error::EerOutOfRange {
                classifier: i,
                eer: e,
            });
        }
    }
    let total: f64 = training_eers.iter().map(|e| 1.0 / e).sum();
    Ok(training_eers.iter().map(|e| (1.0 / e) / total).collect())
}

pub fn fuse_voting(decisions: &[Label]) -> Label {
    let genuine = decisions.iter().filter(|d| d.is_genuine()).count();
    if genuine > decisions.len() - genuine {
        Label::Genuine
    } else {
        Label::Imposter
    }
}

/// Weighted majority; the two weight totals are compared exactly.
pub fn fuse_weighted_voting(decisions: &[Label], weights: &[f64]) -> Label {
    let (mut genuine, mut imposter) = (Vec::new(), Vec::new());
    for (d, &w) in decisions.iter().zip(weights) {
        match d {
            Label::Genuine => genuine.push(w),
            Label::Imposter => imposter.push(w),
        }
    }
    if exact::cmp_sums(&genuine, &imposter) == Ordering::Greater {
        Label::Genuine
    } else {
        Label::Imposter
    }
}

/// Min-max normalizes each score (clamped to `[0, 1]`) and fuses them by
/// mean, or by weighted sum when `weights` is given.
pub fn fuse_sum(
    scores: &[f64],
    minmax: &[MinMax],
    threshold: f64,
    weights: Option<&[f64]>,
) -> Result<(Label, f64)> {
    if let Some(i) = minmax.iter().position(|r| !(r.min < r.max)) {
        return Err(Error::DegenerateRange(i));
    }
    let normalized = scores.iter().zip(minmax).map(|(&s, r)| r.normalize(s));
    let fused = match weights {
        Some(w) => normalized.zip(w).map(|(x, w)| w * x).sum(),
        None => normalized.sum::<f64>() / scores.len() as f64,
    };
    let label = if fused >= threshold {
        Label::Genuine
    } else {
        Label::Imposter
    };
    Ok((label, fused))
}

/// `max(A / B, B / A)` where `A` and `B` are the largest unweighted genuine
/// and imposter reliability ratios over all classifiers.
pub fn compute_gap(rr_pairs: &[ReliabilityPair]) -> f64 {
    if let Some(ex) = exact_ratios(rr_pairs) {
        let (x, y) = exact_gap_terms(&ex);
        return (x as f64 / y as f64).max(y as f64 / x as f64);
    }
    let best_genuine = rr_pairs.iter().map(|p| p.rr_genuine).fold(0.0, f64::max);
    let best_imposter = rr_pairs.iter().map(|p| p.rr_imposter).fold(0.0, f64::max);
    (best_imposter / best_genuine).max(best_genuine / best_imposter)
}

fn exact_ratios(rr_pairs: &[ReliabilityPair]) -> Option<Vec<ExactRatio>> {
    rr_pairs.iter().map(|p| p.exact).collect()
}

fn cmp_fractions(a_num: u64, a_den: u64, b_num: u64, b_den: u64) -> Ordering {
    (a_num as u128 * b_den as u128).cmp(&(b_num as u128 * a_den as u128))
}

/// `A / B` as `x / y`, with `A = max num/den` and `B = max den/num`.
fn exact_gap_terms(ratios: &[ExactRatio]) -> (u128, u128) {
    let a = ratios
        .iter()
        .copied()
        .reduce(|best, r| {
            if cmp_fractions(r.num, r.den, best.num, best.den) == Ordering::Greater {
                r
            } else {
                best
            }
        })
        .expect("at least one classifier");
    let b = ratios
        .iter()
        .copied()
        .reduce(|best, r| {
            if cmp_fractions(r.den, r.num, best.den, best.num) == Ordering::Greater {
                r
            } else {
                best
            }
        })
        .expect("at least one classifier");
    // (a.num / a.den) / (b.den / b.num)
    (a.num as u128 * b.num as u128, a.den as u128 * b.den as u128)
}

fn gap_within(rr_pairs: &[ReliabilityPair], lambda: f64) -> bool {
    match exact_ratios(rr_pairs) {
        Some(ex) => {
            let (x, y) = exact_gap_terms(&ex);
            // max(x/y, y/x) <= lambda  <=>  x <= lambda*y  and  y <= lambda*x
            exact::cmp_products(1.0, x, lambda, y) != Ordering::Greater
                && exact::cmp_products(1.0, y, lambda, x) != Ordering::Greater
        }
        None => compute_gap(rr_pairs) <= lambda,
    }
}

/// Class of the largest `w_i * rr_i(c)` over all `(i, c)`; ties go to imposter.
fn weighted_argmax(rr_pairs: &[ReliabilityPair], weights: &[f64]) -> Label {
    if let Some(ex) = exact_ratios(rr_pairs) {
        // w_i * num_i / den_i  vs  w_j * num_j / den_j
        let pick = |genuine: bool| {
            let oriented = |r: ExactRatio| if genuine { (r.num, r.den) } else { (r.den, r.num) };
            (0..ex.len())
                .reduce(|best, i| {
                    let (ni, di) = oriented(ex[i]);
                    let (nb, db) = oriented(ex[best]);
                    let ord = exact::cmp_products(
                        weights[i],
                        ni as u128 * db as u128,
                        weights[best],
                        nb as u128 * di as u128,
                    );
                    if ord == Ordering::Greater {
                        i
                    } else {
                        best
                    }
                })
                .expect("at least one classifier")
        };
        let (g, m) = (pick(true), pick(false));
        let ord = exact::cmp_products(
            weights[g],
            ex[g].num as u128 * ex[m].num as u128,
            weights[m],
            ex[m].den as u128 * ex[g].den as u128,
        );
        return if ord == Ordering::Greater {
            Label::Genuine
        } else {
            Label::Imposter
        };
    }

    let weighted_best = |label: Label| {
        rr_pairs
            .iter()
            .zip(weights)
            .map(|(p, w)| w * p.ratio(label))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    if weighted_best(Label::Genuine) > weighted_best(Label::Imposter) {
        Label::Genuine
    } else {
        Label::Imposter
    }
}

/// MDRR decision for one sample.
///
/// Pairs built from rank counts carry exact fractions, and then both the
/// `gap <= lambda` test and the weighted argmax are decided exactly; pairs
/// without them fall back to floating-point comparisons.
pub fn fuse_mdrr(
    rr_pairs: &[ReliabilityPair],
    single_decisions: &[Label],
    weights: &[f64],
    lambda: f64,
) -> FusedDecision {
    let gap = compute_gap(rr_pairs);
    let fallback_used = gap_within(rr_pairs, lambda);
    let label = if fallback_used {
        fuse_weighted_voting(single_decisions, weights)
    } else {
        weighted_argmax(rr_pairs, weights)
    };
    FusedDecision {
        label,
        rr_pairs: rr_pairs.to_vec(),
        gap: Some(gap),
        fallback_used,
        fused_score: None,
    }
}

fn threshold_decisions(scores: &[f64], thresholds: &[f64]) -> Vec<Label> {
    scores
        .iter()
        .zip(thresholds)
        .map(|(&s, &t)| if s >= t { Label::Genuine } else { Label::Imposter })
        .collect()
}

/// Applies the configured strategy to one sample's score vector.
pub fn fuse_sample(scores: &[f64], model: &ReliabilityModel, config: &FusionConfig) -> Result<FusedDecision> {
    match config.strategy {
        Strategy::Mdrr => {
            let (rr_pairs, singles): (Vec<_>, Vec<_>) = scores
                .iter()
                .enumerate()
                .map(|(i, &s)| (model.reliability_ratio(i, s), model.decide_single(i, s)))
                .unzip();
            Ok(fuse_mdrr(&rr_pairs, &singles, &config.weights, config.lambda))
        }
        Strategy::Voting => Ok(FusedDecision::plain(fuse_voting(&threshold_decisions(
            scores,
            &config.thresholds,
        )))),
        Strategy::WeightedVoting => Ok(FusedDecision::plain(fuse_weighted_voting(
            &threshold_decisions(scores, &config.thresholds),
            &config.weights,
        ))),
        Strategy::Sum | Strategy::WeightedSum => {
            let weights = (config.strategy == Strategy::WeightedSum).then_some(&config.weights[..]);
            let threshold = config.fused_threshold.ok_or_else(|| {
                Error::InvalidConfig("sum strategies need a fused-score threshold".into())
            })?;
            let (label, fused) = fuse_sum(scores, &config.minmax, threshold, weights)?;
            let mut d = FusedDecision::plain(label);
            d.fused_score = Some(fused);
            Ok(d)
        }
    }
}

fn check_compatible(test: &Dataset, model: &ReliabilityModel) -> Result<()> {
    if test.registry().names() != model.names() {
        return Err(Error::InvalidDataset(format!(
            "classifiers {:?} do not match the model's {:?}",
            test.registry().names(),
            model.names()
        )));
    }
    test.ensure_valid()
}

/// Applies one strategy to every test sample and scores the decisions.
pub fn evaluate_strategy(
    test: &Dataset,
    model: &ReliabilityModel,
    config: &FusionConfig,
) -> Result<StrategyReport> {
    check_compatible(test, model)?;
    config.validate()?;
    if config.n_classifiers() != model.n_classifiers() {
        return Err(Error::InvalidConfig(
            "config and model disagree on the number of classifiers".into(),
        ));
    }

    let mut counts = ConfusionCounts::default();
    let mut fallbacks = 0u64;
    let mut fused_genuine = Vec::new();
    let mut fused_imposter = Vec::new();
    for sample in test.samples() {
        let d = fuse_sample(&sample.scores, model, config)?;
        counts.record(d.label, sample.label);
        fallbacks += u64::from(d.fallback_used);
        if let Some(f) = d.fused_score {
            match sample.label {
                Label::Genuine => fused_genuine.push(f),
                Label::Imposter => fused_imposter.push(f),
            }
        }
    }

    let mut report = StrategyReport::from_counts(config.strategy.name(), counts)?;
    if config.strategy == Strategy::Mdrr {
        report.fallbacks = Some(fallbacks);
    }
    if config.strategy.outputs_score() {
        report = report.with_roc(metrics::roc_sweep(&fused_genuine, &fused_imposter)?)?;
    }
    Ok(report)
}

/// Evaluates one classifier on its own at a fixed accept threshold.
pub fn evaluate_single(test: &Dataset, classifier: usize, threshold: f64) -> Result<StrategyReport> {
    test.ensure_valid()?;
    let mut counts = ConfusionCounts::default();
    for sample in test.samples() {
        let predicted = if sample.scores[classifier] >= threshold {
            Label::Genuine
        } else {
            Label::Imposter
        };
        counts.record(predicted, sample.label);
    }
    let roc = metrics::roc_sweep(
        &test.scores_for(classifier, Label::Genuine),
        &test.scores_for(classifier, Label::Imposter),
    )?;
    StrategyReport::from_counts(test.registry().name(classifier), counts)?.with_roc(roc)
}

/// How integration weights are obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    /// `"auto"`: normalized inverse training EER.
    Auto(AutoTag),
    Explicit(Vec<f64>),
}

impl Default for WeightsSpec {
    fn default() -> Self {
        WeightsSpec::Auto(AutoTag::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

/// Tag selecting thresholds at the training EER operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainEerTag {
    #[serde(rename = "train-eer")]
    TrainEer,
}

/// Per-classifier accept thresholds for voting and individual evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VoteThresholds {
    Policy(TrainEerTag),
    Fixed(Vec<f64>),
}

impl Default for VoteThresholds {
    fn default() -> Self {
        VoteThresholds::Policy(TrainEerTag::TrainEer)
    }
}

/// Fused-score accept threshold for the sum strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SumThreshold {
    Policy(TrainEerTag),
    Fixed(f64),
}

impl Default for SumThreshold {
    fn default() -> Self {
        SumThreshold::Policy(TrainEerTag::TrainEer)
    }
}

/// Training-time settings that shape a [`Calibration`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CalibrationSettings {
    pub weights: WeightsSpec,
    pub vote_thresholds: VoteThresholds,
    pub sum_threshold: SumThreshold,
}

/// Everything fitted on the training set besides the reliability tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub training_eers: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub weights: Vec<f64>,
    pub weights_source: WeightsSpec,
    pub vote_policy: VoteThresholds,
    pub sum_policy: SumThreshold,
    pub minmax: Vec<MinMax>,
    /// Absent when some classifier's training range is degenerate.
    pub sum_threshold: Option<f64>,
    pub wsum_threshold: Option<f64>,
}

impl Calibration {
    pub fn fit(train: &Dataset, settings: &CalibrationSettings) -> Result<Self> {
        train.ensure_valid()?;
        let n = train.n_classifiers();

        let mut training_eers = Vec::with_capacity(n);
        let mut eer_thresholds = Vec::with_capacity(n);
        for i in 0..n {
            let roc = metrics::roc_sweep(
                &train.scores_for(i, Label::Genuine),
                &train.scores_for(i, Label::Imposter),
            )?;
            let op = metrics::eer_operating_point(&roc)?;
            training_eers.push(op.eer);
            eer_thresholds.push(op.threshold);
        }

        let thresholds = match &settings.vote_thresholds {
            VoteThresholds::Policy(TrainEerTag::TrainEer) => eer_thresholds,
            VoteThresholds::Fixed(t) if t.len() == n && t.iter().all(|x| x.is_finite()) => t.clone(),
            VoteThresholds::Fixed(t) => {
                return Err(Error::InvalidConfig(format!(
                    "expected {n} finite vote thresholds, got {}",
                    t.len()
                )))
            }
        };

        let weights = match &settings.weights {
            WeightsSpec::Auto(_) => compute_weights(&training_eers)?,
            WeightsSpec::Explicit(w) => normalize_weights(w, n)?,
        };

        let minmax: Vec<MinMax> = (0..n)
            .map(|i| {
                let mut all = train.scores_for(i, Label::Genuine);
                all.extend(train.scores_for(i, Label::Imposter));
                let min = all.iter().copied().fold(f64::INFINITY, f64::min);
                let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                MinMax { min, max }
            })
            .collect();

        let (sum_threshold, wsum_threshold) = if minmax.iter().all(|r| r.min < r.max) {
            match settings.sum_threshold {
                SumThreshold::Fixed(t) => (Some(t), Some(t)),
                SumThreshold::Policy(TrainEerTag::TrainEer) => (
                    Some(fused_eer_threshold(train, &minmax, None)?),
                    Some(fused_eer_threshold(train, &minmax, Some(&weights))?),
                ),
            }
        } else {
            (None, None)
        };

        Ok(Self {
            training_eers,
            thresholds,
            weights,
            weights_source: settings.weights.clone(),
            vote_policy: settings.vote_thresholds.clone(),
            sum_policy: settings.sum_threshold.clone(),
            minmax,
            sum_threshold,
            wsum_threshold,
        })
    }

    pub fn n_classifiers(&self) -> usize {
        self.weights.len()
    }

    pub fn settings(&self) -> CalibrationSettings {
        CalibrationSettings {
            weights: self.weights_source.clone(),
            vote_thresholds: self.vote_policy.clone(),
            sum_threshold: self.sum_policy.clone(),
        }
    }

    pub fn config(&self, strategy: Strategy, lambda: f64) -> Result<FusionConfig> {
        let fused_threshold = match strategy {
            Strategy::Sum => self.sum_threshold,
            Strategy::WeightedSum => self.wsum_threshold,
            _ => None,
        };
        if strategy.outputs_score() && fused_threshold.is_none() {
            let i = self.minmax.iter().position(|r| !(r.min < r.max)).unwrap_or(0);
            return Err(Error::DegenerateRange(i));
        }
        let config = FusionConfig {
            strategy,
            weights: self.weights.clone(),
            lambda,
            thresholds: self.thresholds.clone(),
            fused_threshold,
            minmax: self.minmax.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

fn normalize_weights(weights: &[f64], n: usize) -> Result<Vec<f64>> {
    if weights.len() != n {
        return Err(Error::InvalidConfig(format!(
            "expected {n} weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidConfig("weights must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

fn fused_eer_threshold(train: &Dataset, minmax: &[MinMax], weights: Option<&[f64]>) -> Result<f64> {
    let mut genuine = Vec::new();
    let mut imposter = Vec::new();
    for s in train.samples() {
        let (_, fused) = fuse_sum(&s.scores, minmax, 0.0, weights)?;
        match s.label {
            Label::Genuine => genuine.push(fused),
            Label::Imposter => imposter.push(fused),
        }
    }
    Ok(metrics::eer_operating_point(&metrics::roc_sweep(&genuine, &imposter)?)?.threshold)
}

/// Individual classifiers at their calibrated thresholds, followed by the
/// requested fusion strategies.
pub fn evaluate_all(
    test: &Dataset,
    model: &ReliabilityModel,
    calibration: &Calibration,
    strategies: &[Strategy],
    lambda: f64,
) -> Result<EvaluationReport> {
    check_compatible(test, model)?;
    if calibration.n_classifiers() != model.n_classifiers() {
        return Err(Error::InvalidConfig(
            "calibration and model disagree on the number of classifiers".into(),
        ));
    }
    let mut report = EvaluationReport::default();
    for (i, &t) in calibration.thresholds.iter().enumerate() {
        report.strategies.push(evaluate_single(test, i, t)?);
    }
    for &strategy in strategies {
        let config = calibration.config(strategy, lambda)?;
        report.strategies.push(evaluate_strategy(test, model, &config)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClassifierRegistry, ScoreSample};
    use Label::{Genuine as G, Imposter as I};

    fn pair(rr_genuine: f64) -> ReliabilityPair {
        raw_pair(rr_genuine, 1.0 / rr_genuine)
    }

    fn raw_pair(rr_genuine: f64, rr_imposter: f64) -> ReliabilityPair {
        ReliabilityPair {
            r_genuine: 0.5,
            r_imposter: 0.5,
            rr_genuine,
            rr_imposter,
            exact: None,
        }
    }

    fn exact_pair(num: u64, den: u64) -> ReliabilityPair {
        ReliabilityPair {
            exact: Some(ExactRatio { num, den }),
            ..raw_pair(num as f64 / den as f64, den as f64 / num as f64)
        }
    }

    #[test]
    fn exact_pairs_honour_boundaries() {
        // best genuine ratio 6/5, best imposter ratio 18/5: gap exactly 3
        let pairs = [exact_pair(6, 5), exact_pair(5, 18)];
        assert_eq!(compute_gap(&pairs), 3.0);
        let d = fuse_mdrr(&pairs, &[G, I], &[0.5, 0.5], 3.0);
        assert!(d.fallback_used);
        assert_eq!(d.label, I);
        assert!(!fuse_mdrr(&pairs, &[G, I], &[0.5, 0.5], 2.999).fallback_used);

        // 0.25 * 12/1 == 0.75 * 4/1 exactly -> tie -> imposter
        let tie = [exact_pair(12, 1), exact_pair(1, 4)];
        let d = fuse_mdrr(&tie, &[G, I], &[0.25, 0.75], 2.0);
        assert!(!d.fallback_used);
        assert_eq!(d.label, I);
        // nudging the genuine side's weight breaks the tie
        assert_eq!(fuse_mdrr(&tie, &[G, I], &[0.2500001, 0.7499999], 2.0).label, G);
    }

    #[test]
    fn weights_from_table_eers() {
        let w = compute_weights(&[0.0232, 0.0260, 0.0442, 0.0670]).unwrap();
        // oracle: 1/e normalized, by hand
        let inv = [1.0 / 0.0232, 1.0 / 0.0260, 1.0 / 0.0442, 1.0 / 0.0670];
        let total: f64 = inv.iter().sum();
        for (wi, ii) in w.iter().zip(inv) {
            assert!((wi - ii / total).abs() < 1e-15);
        }
        let expected = [0.3619, 0.3229, 0.1900, 0.1253];
        for (wi, ei) in w.iter().zip(expected) {
            // the listed values are 4-decimal approximations (0.18994 -> 0.1900)
            assert!((wi - ei).abs() < 1e-4, "{wi} vs {ei}");
        }
        assert_eq!(compute_weights(&[0.05, 0.05]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(compute_weights(&[0.1]).unwrap(), vec![1.0]);
        assert!(matches!(compute_weights(&[0.1, 0.0]), Err(Error::ZeroEer(1))));
        assert!(matches!(
            compute_weights(&[0.7]),
            Err(Error::EerOutOfRange { .. })
        ));
    }

    #[test]
    fn voting_examples() {
        assert_eq!(fuse_voting(&[G, G, I]), G);
        assert_eq!(fuse_voting(&[G, G, I, I]), I);
        assert_eq!(fuse_voting(&[I, I, I, G]), I);
    }

    #[test]
    fn weighted_voting_examples() {
        assert_eq!(fuse_weighted_voting(&[G, I], &[0.6, 0.4]), G);
        assert_eq!(fuse_weighted_voting(&[G, G, I, I], &[0.25; 4]), I);
        assert_eq!(
            fuse_weighted_voting(&[I, G, G, G], &[0.3619, 0.3229, 0.1900, 0.1253]),
            G
        );
    }

    #[test]
    fn sum_examples() {
        let unit = [MinMax { min: 0.0, max: 1.0 }; 2];
        let (label, fused) = fuse_sum(&[0.5, 0.5], &unit, 0.6, None).unwrap();
        assert_eq!((label, fused), (I, 0.5));
        let (label, fused) = fuse_sum(&[0.5, 0.5], &unit, 0.6, Some(&[0.5, 0.5])).unwrap();
        assert_eq!((label, fused), (I, 0.5));

        let ranges = [MinMax { min: 0.2, max: 0.9 }, MinMax { min: -1.0, max: 3.0 }];
        let (label, fused) = fuse_sum(&[0.9, 3.0], &ranges, 1.0, None).unwrap();
        assert_eq!((label, fused), (G, 1.0));
        // above the training max clamps to 1
        let (_, fused) = fuse_sum(&[5.0, 3.0], &ranges, 1.0, None).unwrap();
        assert_eq!(fused, 1.0);
        let flat = [MinMax { min: 0.3, max: 0.3 }];
        assert!(matches!(
            fuse_sum(&[0.3], &flat, 0.5, None),
            Err(Error::DegenerateRange(0))
        ));
    }

    #[test]
    fn gap_examples() {
        // max rr_genuine 50, max rr_imposter 5
        let pairs = [raw_pair(50.0, 0.02), raw_pair(0.2, 5.0)];
        assert_eq!(compute_gap(&pairs), 10.0);
        assert_eq!(compute_gap(&[raw_pair(3.0, 1.0), raw_pair(1.0, 3.0)]), 1.0);
        assert_eq!(compute_gap(&[pair(4.0)]), 16.0);
        let swapped: Vec<_> = pairs.iter().map(ReliabilityPair::swapped).collect();
        assert_eq!(compute_gap(&swapped), compute_gap(&pairs));
    }

    #[test]
    fn mdrr_examples() {
        let pairs = [raw_pair(20.0, 0.05), raw_pair(0.5, 2.0)];
        let d = fuse_mdrr(&pairs, &[G, I], &[0.5, 0.5], 2.0);
        assert_eq!(d.gap, Some(10.0));
        assert_eq!(d.label, G);
        assert!(!d.fallback_used);

        let fuzzy = [raw_pair(1.5, 1.0 / 1.5), raw_pair(1.0 / 1.2, 1.2)];
        let d = fuse_mdrr(&fuzzy, &[G, I], &[0.7, 0.3], 2.0);
        assert!(d.gap.unwrap() <= 2.0);
        assert_eq!(d.label, G);
        assert!(d.fallback_used);

        let unanimous = [pair(30.0), pair(12.0), pair(40.0)];
        for lambda in [0.5, 2.0, f64::INFINITY] {
            assert_eq!(fuse_mdrr(&unanimous, &[G, G, G], &[0.2, 0.3, 0.5], lambda).label, G);
        }
    }

    #[test]
    fn mdrr_weighted_argmax_can_override_raw_maximum() {
        // raw max is classifier 2's imposter ratio, but its weight is small
        let pairs = [raw_pair(8.0, 0.125), raw_pair(0.1, 10.0)];
        assert_eq!(fuse_mdrr(&pairs, &[G, I], &[0.9, 0.1], 2.0).label, G);
        assert_eq!(fuse_mdrr(&pairs, &[G, I], &[0.5, 0.5], 2.0).label, I);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("median".parse::<Strategy>().is_err());
        assert_eq!(
            Strategy::parse_list("mdrr, wsum").unwrap(),
            vec![Strategy::Mdrr, Strategy::WeightedSum]
        );
    }

    fn separable() -> Dataset {
        let reg = ClassifierRegistry::new(["a", "b"]).unwrap();
        let mut samples = Vec::new();
        for i in 0..5 {
            samples.push(ScoreSample::new(format!("g{i}"), G, vec![0.8, 0.7]));
            samples.push(ScoreSample::new(format!("m{i}"), I, vec![0.2, 0.1]));
        }
        Dataset::new(reg, samples)
    }

    #[test]
    fn separable_data_is_perfect_for_every_strategy() {
        let train = separable();
        let model = ReliabilityModel::build(&train).unwrap();
        let settings = CalibrationSettings {
            weights: WeightsSpec::Explicit(vec![1.0, 1.0]),
            ..Default::default()
        };
        let cal = Calibration::fit(&train, &settings).unwrap();
        assert_eq!(cal.training_eers, vec![0.0, 0.0]);
        assert_eq!(cal.thresholds, vec![0.5, 0.4]);
        let report = evaluate_all(&train, &model, &cal, &Strategy::ALL, DEFAULT_LAMBDA).unwrap();
        assert_eq!(report.strategies.len(), 7);
        for s in &report.strategies {
            assert_eq!(s.hter, 0.0, "{}", s.name);
            if let Some(e) = s.eer {
                assert_eq!(e, 0.0, "{}", s.name);
            }
        }
        // auto weights need a non-zero EER
        assert!(matches!(
            Calibration::fit(&train, &CalibrationSettings::default()),
            Err(Error::ZeroEer(0))
        ));
    }

    #[test]
    fn config_validation() {
        let good = FusionConfig {
            strategy: Strategy::Mdrr,
            weights: vec![0.5, 0.5],
            lambda: 2.0,
            thresholds: vec![0.5, 0.5],
            fused_threshold: None,
            minmax: vec![MinMax { min: 0.0, max: 1.0 }; 2],
        };
        assert!(good.validate().is_ok());
        let mut bad = good.clone();
        bad.weights = vec![0.6, 0.6];
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.lambda = 0.0;
        assert!(bad.validate().is_err());
        let mut flat = good;
        flat.minmax[1] = MinMax { min: 1.0, max: 1.0 };
        assert!(flat.validate().is_ok());
        flat.strategy = Strategy::Sum;
        flat.fused_threshold = Some(0.5);
        assert!(matches!(flat.validate(), Err(Error::DegenerateRange(1))));
    }
}
