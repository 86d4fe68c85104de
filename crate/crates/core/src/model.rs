//! Score/label data model shared by every other module.
//!
//! Scores are similarities: larger means the two compared samples are more
//! likely to come from the same subject. Distance-type matchers must be
//! negated before they enter a [`Dataset`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Ground-truth or predicted class of one comparison attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Imposter = 0,
    Genuine = 1,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Genuine => "genuine",
            Label::Imposter => "imposter",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "genuine" => Some(Label::Genuine),
            "imposter" => Some(Label::Imposter),
            _ => None,
        }
    }

    pub fn is_genuine(self) -> bool {
        self == Label::Genuine
    }

    pub fn opposite(self) -> Label {
        match self {
            Label::Genuine => Label::Imposter,
            Label::Imposter => Label::Genuine,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One comparison attempt scored by every registered classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSample {
    pub pattern_id: String,
    pub label: Label,
    /// Index-aligned with the dataset's [`ClassifierRegistry`].
    pub scores: Vec<f64>,
}

impl ScoreSample {
    pub fn new(pattern_id: impl Into<String>, label: Label, scores: Vec<f64>) -> Self {
        Self {
            pattern_id: pattern_id.into(),
            label,
            scores,
        }
    }
}

/// Ordered, distinct classifier names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierRegistry {
    names: Vec<String>,
}

impl ClassifierRegistry {
    pub fn new<I, S>(names: I) -> crate::Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(crate::Error::InvalidDataset(
                "at least one classifier is required".into(),
            ));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(crate::Error::InvalidDataset(
                    "classifier names must be non-empty".into(),
                ));
            }
            if !seen.insert(name.as_str()) {
                return Err(crate::Error::InvalidDataset(format!(
                    "duplicate classifier name `{name}`"
                )));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }
}

/// A labelled benchmark: registry plus samples, with per-label tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    registry: ClassifierRegistry,
    samples: Vec<ScoreSample>,
    genuine_count: usize,
    imposter_count: usize,
}

impl Dataset {
    /// Tallies labels; structural problems are reported by [`Dataset::validate`].
    pub fn new(registry: ClassifierRegistry, samples: Vec<ScoreSample>) -> Self {
        let genuine_count = samples.iter().filter(|s| s.label.is_genuine()).count();
        let imposter_count = samples.len() - genuine_count;
        Self {
            registry,
            samples,
            genuine_count,
            imposter_count,
        }
    }

    pub fn registry(&self) -> &ClassifierRegistry {
        &self.registry
    }

    pub fn samples(&self) -> &[ScoreSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_classifiers(&self) -> usize {
        self.registry.len()
    }

    pub fn genuine_count(&self) -> usize {
        self.genuine_count
    }

    pub fn imposter_count(&self) -> usize {
        self.imposter_count
    }

    /// Scores of one classifier restricted to one label, in sample order.
    pub fn scores_for(&self, classifier: usize, label: Label) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.label == label)
            .filter_map(|s| s.scores.get(classifier).copied())
            .collect()
    }

    pub fn validate(&self) -> ValidationResult {
        validate_dataset(self)
    }

    /// Like [`Dataset::validate`], but turns fatal violations into an error.
    /// Duplicate pattern ids are tolerated.
    pub fn ensure_valid(&self) -> crate::Result<()> {
        let fatal: Vec<String> = self
            .validate()
            .violations
            .iter()
            .filter(|v| !matches!(v, Violation::DuplicatePatternId { .. }))
            .map(ToString::to_string)
            .collect();
        if fatal.is_empty() {
            Ok(())
        } else {
            Err(crate::Error::InvalidDataset(fatal.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ScoreArity {
        sample: usize,
        expected: usize,
        found: usize,
    },
    NonFiniteScore {
        sample: usize,
        classifier: usize,
    },
    EmptyPatternId {
        sample: usize,
    },
    DuplicatePatternId {
        pattern_id: String,
        first: usize,
        sample: usize,
    },
    EmptyClass(Label),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ScoreArity {
                sample,
                expected,
                found,
            } => write!(
                f,
                "score arity: sample {sample} has {found} scores, expected {expected}"
            ),
            Violation::NonFiniteScore { sample, classifier } => write!(
                f,
                "non-finite score: sample {sample}, classifier {classifier}"
            ),
            Violation::EmptyPatternId { sample } => {
                write!(f, "empty pattern id: sample {sample}")
            }
            Violation::DuplicatePatternId {
                pattern_id,
                first,
                sample,
            } => write!(
                f,
                "duplicate pattern id `{pattern_id}`: samples {first} and {sample}"
            ),
            Violation::EmptyClass(label) => write!(f, "empty class: no {label} samples"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_dataset(dataset: &Dataset) -> ValidationResult {
    let n = dataset.n_classifiers();
    let mut violations = Vec::new();
    let mut first_seen = std::collections::HashMap::new();

    for (idx, sample) in dataset.samples.iter().enumerate() {
        if sample.scores.len() != n {
            violations.push(Violation::ScoreArity {
                sample: idx,
                expected: n,
                found: sample.scores.len(),
            });
        }
        for (classifier, score) in sample.scores.iter().enumerate() {
            if !score.is_finite() {
                violations.push(Violation::NonFiniteScore {
                    sample: idx,
                    classifier,
                });
            }
        }
        if sample.pattern_id.is_empty() {
            violations.push(Violation::EmptyPatternId { sample: idx });
        } else if let Some(&first) = first_seen.get(sample.pattern_id.as_str()) {
            violations.push(Violation::DuplicatePatternId {
                pattern_id: sample.pattern_id.clone(),
                first,
                sample: idx,
            });
        } else {
            first_seen.insert(sample.pattern_id.as_str(), idx);
        }
    }

    if dataset.genuine_count == 0 {
        violations.push(Violation::EmptyClass(Label::Genuine));
    }
    if dataset.imposter_count == 0 {
        violations.push(Violation::EmptyClass(Label::Imposter));
    }

    ValidationResult { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> ClassifierRegistry {
        ClassifierRegistry::new(["a1", "a2"]).unwrap()
    }

    fn well_formed() -> Dataset {
        Dataset::new(
            registry(),
            vec![
                ScoreSample::new("p1", Label::Genuine, vec![0.9, 0.8]),
                ScoreSample::new("p2", Label::Genuine, vec![0.7, 0.85]),
                ScoreSample::new("p3", Label::Imposter, vec![0.2, 0.1]),
                ScoreSample::new("p4", Label::Imposter, vec![0.3, 0.4]),
            ],
        )
    }

    #[test]
    fn well_formed_dataset_is_ok() {
        let ds = well_formed();
        assert!(validate_dataset(&ds).is_ok());
        assert_eq!(ds.genuine_count() + ds.imposter_count(), ds.len());
        assert_eq!(ds.genuine_count(), 2);
    }

    #[test]
    fn short_score_row_is_an_arity_violation() {
        let ds = Dataset::new(
            registry(),
            vec![
                ScoreSample::new("p1", Label::Genuine, vec![0.9]),
                ScoreSample::new("p2", Label::Imposter, vec![0.1, 0.2]),
            ],
        );
        let res = validate_dataset(&ds);
        assert_eq!(
            res.violations,
            vec![Violation::ScoreArity {
                sample: 0,
                expected: 2,
                found: 1
            }]
        );
        assert!(res.violations[0].to_string().starts_with("score arity"));
    }

    #[test]
    fn missing_genuine_class_is_reported() {
        let ds = Dataset::new(
            registry(),
            vec![ScoreSample::new("p1", Label::Imposter, vec![0.1, 0.2])],
        );
        let res = validate_dataset(&ds);
        assert_eq!(res.violations, vec![Violation::EmptyClass(Label::Genuine)]);
        assert!(res.violations[0].to_string().starts_with("empty class"));
    }

    #[test]
    fn non_finite_and_duplicates_are_data_not_failures() {
        let ds = Dataset::new(
            registry(),
            vec![
                ScoreSample::new("p1", Label::Genuine, vec![f64::NAN, 0.2]),
                ScoreSample::new("p1", Label::Imposter, vec![0.1, f64::INFINITY]),
            ],
        );
        let res = validate_dataset(&ds);
        assert_eq!(res.violations.len(), 3);
        assert!(ds.ensure_valid().is_err());

        let dup_only = Dataset::new(
            registry(),
            vec![
                ScoreSample::new("p1", Label::Genuine, vec![0.9, 0.8]),
                ScoreSample::new("p1", Label::Imposter, vec![0.1, 0.2]),
            ],
        );
        assert_eq!(dup_only.validate().violations.len(), 1);
        assert!(dup_only.ensure_valid().is_ok());
    }

    #[test]
    fn validation_is_idempotent() {
        let ds = Dataset::new(
            registry(),
            vec![ScoreSample::new("", Label::Genuine, vec![0.5])],
        );
        assert_eq!(validate_dataset(&ds), validate_dataset(&ds));
    }

    #[test]
    fn registry_rejects_duplicates_and_empty() {
        assert!(ClassifierRegistry::new(["a", "a"]).is_err());
        assert!(ClassifierRegistry::new(Vec::<String>::new()).is_err());
        assert!(ClassifierRegistry::new([""]).is_err());
    }
}
