//! Empirical decision reliability and reliability ratios.
//!
//! For a classifier `i` and a query score `s`:
//!
//! * genuine reliability is the fraction of training genuine scores `<= s`,
//! * imposter reliability is the fraction of training imposter scores `>= s`.
//!
//! Both are answered by binary search over the sorted training arrays.
//! The reliability *ratio* divides one by the other; to keep it finite in the
//! distribution tails both counts are add-one smoothed, `(count + 1) / (n + 1)`,
//! before dividing. Raw, unsmoothed reliabilities are exposed alongside.

use crate::model::{Dataset, Label};
use crate::{Error, Result};

/// Tag stored in persisted models; the only smoothing scheme implemented.
pub const SMOOTHING_TAG: &str = "laplace-add-one";

/// Sorted training scores of one classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    genuine: Vec<f64>,
    imposter: Vec<f64>,
}

impl ScoreTable {
    /// Sorts both populations. Both must be non-empty and finite.
    pub fn new(mut genuine: Vec<f64>, mut imposter: Vec<f64>) -> Result<Self> {
        if genuine.iter().chain(&imposter).any(|s| !s.is_finite()) {
            return Err(Error::InvalidDataset("non-finite training score".into()));
        }
        genuine.sort_by(f64::total_cmp);
        imposter.sort_by(f64::total_cmp);
        Ok(Self { genuine, imposter })
    }

    pub fn genuine_sorted(&self) -> &[f64] {
        &self.genuine
    }

    pub fn imposter_sorted(&self) -> &[f64] {
        &self.imposter
    }

    pub fn n_genuine(&self) -> usize {
        self.genuine.len()
    }

    pub fn n_imposter(&self) -> usize {
        self.imposter.len()
    }

    /// Smallest and largest training score over both populations.
    pub fn range(&self) -> (f64, f64) {
        let lo = self.genuine[0].min(self.imposter[0]);
        let hi = self.genuine[self.genuine.len() - 1].max(self.imposter[self.imposter.len() - 1]);
        (lo, hi)
    }

    pub fn rank_counts(&self, score: f64) -> RankCounts {
        // upper bound: number of genuine scores <= score
        let genuine_le = self.genuine.partition_point(|&g| g <= score);
        // lower bound: imposter scores before it are < score
        let imposter_ge = self.imposter.len() - self.imposter.partition_point(|&m| m < score);
        RankCounts {
            genuine_le,
            imposter_ge,
            n_genuine: self.genuine.len(),
            n_imposter: self.imposter.len(),
        }
    }
}

/// Rank-query result for one score against one classifier's training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankCounts {
    pub genuine_le: usize,
    pub imposter_ge: usize,
    pub n_genuine: usize,
    pub n_imposter: usize,
}

impl RankCounts {
    /// Compares the smoothed genuine and imposter reliabilities exactly,
    /// by cross-multiplying the integer fractions.
    pub fn smoothed_cmp(&self) -> std::cmp::Ordering {
        let (gen_num, gen_den, imp_num, imp_den) = self.smoothed_fractions();
        (gen_num * imp_den).cmp(&(imp_num * gen_den))
    }

    fn smoothed_fractions(&self) -> (u128, u128, u128, u128) {
        (
            self.genuine_le as u128 + 1,
            self.n_genuine as u128 + 1,
            self.imposter_ge as u128 + 1,
            self.n_imposter as u128 + 1,
        )
    }
}

/// The genuine reliability ratio as an exact fraction `num / den`; the
/// imposter ratio is `den / num`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactRatio {
    pub num: u64,
    pub den: u64,
}

/// Raw reliabilities and smoothed reliability ratios of both decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityPair {
    pub r_genuine: f64,
    pub r_imposter: f64,
    pub rr_genuine: f64,
    pub rr_imposter: f64,
    /// Present when the pair came from rank counts.
    pub exact: Option<ExactRatio>,
}

impl ReliabilityPair {
    pub fn from_counts(counts: RankCounts) -> Self {
        let (gen_num, gen_den, imp_num, imp_den) = counts.smoothed_fractions();
        // R~1 / R~0 = (gen_num * imp_den) / (gen_den * imp_num)
        let up = gen_num * imp_den;
        let down = gen_den * imp_num;
        let exact = match (u64::try_from(up), u64::try_from(down)) {
            (Ok(num), Ok(den)) => Some(ExactRatio { num, den }),
            _ => None,
        };
        Self {
            r_genuine: counts.genuine_le as f64 / counts.n_genuine as f64,
            r_imposter: counts.imposter_ge as f64 / counts.n_imposter as f64,
            rr_genuine: up as f64 / down as f64,
            rr_imposter: down as f64 / up as f64,
            exact,
        }
    }

    pub fn ratio(&self, label: Label) -> f64 {
        match label {
            Label::Genuine => self.rr_genuine,
            Label::Imposter => self.rr_imposter,
        }
    }

    /// Same pair with the roles of the two decisions exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            r_genuine: self.r_imposter,
            r_imposter: self.r_genuine,
            rr_genuine: self.rr_imposter,
            rr_imposter: self.rr_genuine,
            exact: self.exact.map(|e| ExactRatio {
                num: e.den,
                den: e.num,
            }),
        }
    }
}

/// Per-classifier empirical score populations from a labelled training set.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityModel {
    names: Vec<String>,
    tables: Vec<ScoreTable>,
}

impl ReliabilityModel {
    pub fn build(train: &Dataset) -> Result<Self> {
        for label in [Label::Genuine, Label::Imposter] {
            let count = match label {
                Label::Genuine => train.genuine_count(),
                Label::Imposter => train.imposter_count(),
            };
            if count == 0 {
                return Err(Error::EmptyClass {
                    classifier: 0,
                    label,
                });
            }
        }
        train.ensure_valid()?;

        let tables = (0..train.n_classifiers())
            .map(|i| {
                ScoreTable::new(
                    train.scores_for(i, Label::Genuine),
                    train.scores_for(i, Label::Imposter),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            names: train.registry().names().to_vec(),
            tables,
        })
    }

    /// Reassembles a model from stored tables; every table needs both classes.
    pub fn from_tables(names: Vec<String>, tables: Vec<ScoreTable>) -> Result<Self> {
        if names.len() != tables.len() || names.is_empty() {
            return Err(Error::ModelFormat(
                "classifier names and score tables disagree".into(),
            ));
        }
        for (i, t) in tables.iter().enumerate() {
            if t.n_genuine() == 0 {
                return Err(Error::EmptyClass {
                    classifier: i,
                    label: Label::Genuine,
                });
            }
            if t.n_imposter() == 0 {
                return Err(Error::EmptyClass {
                    classifier: i,
                    label: Label::Imposter,
                });
            }
        }
        Ok(Self { names, tables })
    }

    pub fn n_classifiers(&self) -> usize {
        self.tables.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn table(&self, classifier: usize) -> &ScoreTable {
        &self.tables[classifier]
    }

    pub fn tables(&self) -> &[ScoreTable] {
        &self.tables
    }

    pub fn rank_counts(&self, classifier: usize, score: f64) -> RankCounts {
        self.tables[classifier].rank_counts(score)
    }

    pub fn reliability_genuine(&self, classifier: usize, score: f64) -> f64 {
        let c = self.rank_counts(classifier, score);
        c.genuine_le as f64 / c.n_genuine as f64
    }

    pub fn reliability_imposter(&self, classifier: usize, score: f64) -> f64 {
        let c = self.rank_counts(classifier, score);
        c.imposter_ge as f64 / c.n_imposter as f64
    }

    pub fn reliability_ratio(&self, classifier: usize, score: f64) -> ReliabilityPair {
        ReliabilityPair::from_counts(self.rank_counts(classifier, score))
    }

    /// Picks the decision with the larger smoothed reliability; ties go to
    /// [`Label::Imposter`].
    pub fn decide_single(&self, classifier: usize, score: f64) -> Label {
        match self.rank_counts(classifier, score).smoothed_cmp() {
            std::cmp::Ordering::Greater => Label::Genuine,
            _ => Label::Imposter,
        }
    }
}
