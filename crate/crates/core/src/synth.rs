//! Seeded synthetic score benchmarks.
//!
//! Each sample draws one shared latent "pattern quality" value `z` and, per
//! classifier, an independent noise value `e_i`, both standard normal. With
//! correlation `rho` the classifier's score is
//!
//! ```text
//! location + spread * (sqrt(rho) * z + sqrt(1 - rho) * e_i)
//! ```
//!
//! so any two classifiers' scores correlate with coefficient `rho` before
//! truncation. Scores are truncated to `[0, 1]` by redrawing the independent
//! noise; when that cannot succeed (`rho == 1`, or too many rejections) the
//! score is clamped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::{ClassifierRegistry, Dataset, Label, ScoreSample};
use crate::{Error, Result};

const MAX_REDRAWS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub location: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthClassifier {
    pub name: String,
    pub genuine: ScoreDistribution,
    pub imposter: ScoreDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub classifiers: Vec<SynthClassifier>,
    pub correlation: f64,
    pub n_train_genuine: usize,
    pub n_train_imposter: usize,
    pub n_test_genuine: usize,
    pub n_test_imposter: usize,
}

impl SynthSpec {
    /// Benchmark SB-1: four overlapping matchers whose individual EERs fall
    /// roughly between 2% and 7%, moderately correlated.
    pub fn sb1() -> Self {
        let matcher = |name: &str, genuine_location: f64| SynthClassifier {
            name: name.to_string(),
            genuine: ScoreDistribution {
                location: genuine_location,
                spread: 0.1,
            },
            imposter: ScoreDistribution {
                location: 0.3,
                spread: 0.1,
            },
        };
        Self {
            seed: 42,
            classifiers: vec![
                matcher("a1", 0.70),
                matcher("a2", 0.69),
                matcher("a3", 0.64),
                matcher("a4", 0.60),
            ],
            correlation: 0.5,
            n_train_genuine: 300,
            n_train_imposter: 2_000,
            n_test_genuine: 600,
            n_test_imposter: 24_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.classifiers.is_empty() {
            return fail("at least one classifier is required".into());
        }
        if !(0.0..=1.0).contains(&self.correlation) {
            return fail(format!("correlation {} outside [0, 1]", self.correlation));
        }
        for (what, n) in [
            ("n_train_genuine", self.n_train_genuine),
            ("n_train_imposter", self.n_train_imposter),
            ("n_test_genuine", self.n_test_genuine),
            ("n_test_imposter", self.n_test_imposter),
        ] {
            if n == 0 {
                return fail(format!("{what} must be at least 1"));
            }
        }
        for c in &self.classifiers {
            for d in [c.genuine, c.imposter] {
                if !d.location.is_finite() || !d.spread.is_finite() || d.spread < 0.0 {
                    return fail(format!("classifier `{}` has an invalid distribution", c.name));
                }
            }
            if !(c.genuine.location > c.imposter.location) {
                return fail(format!(
                    "classifier `{}`: genuine location must exceed imposter location",
                    c.name
                ));
            }
        }
        ClassifierRegistry::new(self.classifiers.iter().map(|c| c.name.clone()))
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Ok(())
    }
}

/// Generates `(train, test)`. Output depends only on the spec, seed included.
pub fn generate(spec: &SynthSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let registry = ClassifierRegistry::new(spec.classifiers.iter().map(|c| c.name.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let train = split(
        spec,
        &registry,
        &mut rng,
        "train",
        spec.n_train_genuine,
        spec.n_train_imposter,
    );
    let test = split(
        spec,
        &registry,
        &mut rng,
        "test",
        spec.n_test_genuine,
        spec.n_test_imposter,
    );
    Ok((train, test))
}

fn split(
    spec: &SynthSpec,
    registry: &ClassifierRegistry,
    rng: &mut ChaCha8Rng,
    prefix: &str,
    n_genuine: usize,
    n_imposter: usize,
) -> Dataset {
    let shared = spec.correlation.sqrt();
    let own = (1.0 - spec.correlation).sqrt();
    let mut samples = Vec::with_capacity(n_genuine + n_imposter);
    for (label, count) in [(Label::Genuine, n_genuine), (Label::Imposter, n_imposter)] {
        let tag = if label.is_genuine() { 'g' } else { 'i' };
        for k in 0..count {
            let latent: f64 = rng.sample(StandardNormal);
            let scores = spec
                .classifiers
                .iter()
                .map(|c| {
                    let d = if label.is_genuine() { c.genuine } else { c.imposter };
                    draw_score(rng, d, shared * latent, own)
                })
                .collect();
            samples.push(ScoreSample::new(format!("{prefix}-{tag}{k:06}"), label, scores));
        }
    }
    Dataset::new(registry.clone(), samples)
}

fn draw_score(rng: &mut ChaCha8Rng, d: ScoreDistribution, latent_part: f64, own: f64) -> f64 {
    let mut score = f64::NAN;
    for _ in 0..MAX_REDRAWS {
        let noise: f64 = rng.sample(StandardNormal);
        score = d.location + d.spread * (latent_part + own * noise);
        if (0.0..=1.0).contains(&score) || own == 0.0 || d.spread == 0.0 {
            break;
        }
    }
    score.clamp(0.0, 1.0)
}
