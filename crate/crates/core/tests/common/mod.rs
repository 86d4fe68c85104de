//! Straight-line reference implementation of every fusion strategy and a
//! generator of small random instances.
//!
//! The reference counts by linear scan and decides every comparison in exact
//! integer arithmetic: weights are `k / 1024` and lambda is `a / b`.

#![allow(dead_code)]

use fusebench::fusion::{FusionConfig, MinMax, Strategy};
use fusebench::{ClassifierRegistry, Dataset, Label, ReliabilityModel, ScoreSample};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const WEIGHT_SCALE: u64 = 1024;

#[derive(Debug, Clone)]
pub struct Lambda {
    /// `None` is +infinity.
    pub ratio: Option<(u128, u128)>,
}

impl Lambda {
    pub fn as_f64(&self) -> f64 {
        match self.ratio {
            Some((a, b)) => a as f64 / b as f64,
            None => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    /// `train_genuine[i]` holds classifier i's genuine training scores.
    pub train_genuine: Vec<Vec<f64>>,
    pub train_imposter: Vec<Vec<f64>>,
    pub train: Dataset,
    pub test: Vec<ScoreSample>,
    pub weight_units: Vec<u64>,
    pub lambda: Lambda,
    pub thresholds: Vec<f64>,
    pub minmax: Vec<MinMax>,
    pub fused_threshold: f64,
}

impl Instance {
    pub fn weights(&self) -> Vec<f64> {
        self.weight_units
            .iter()
            .map(|&k| k as f64 / WEIGHT_SCALE as f64)
            .collect()
    }

    pub fn model(&self) -> ReliabilityModel {
        ReliabilityModel::build(&self.train).expect("instance has both classes")
    }

    pub fn config(&self, strategy: Strategy) -> FusionConfig {
        FusionConfig {
            strategy,
            weights: self.weights(),
            lambda: self.lambda.as_f64(),
            thresholds: self.thresholds.clone(),
            fused_threshold: Some(self.fused_threshold),
            minmax: self.minmax.clone(),
        }
    }
}

fn draw_score(rng: &mut ChaCha8Rng, gridded: bool) -> f64 {
    if gridded {
        rng.random_range(0..=10) as f64 / 10.0
    } else {
        rng.random::<f64>()
    }
}

fn split_weight_units(rng: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    if n == 1 {
        return vec![WEIGHT_SCALE];
    }
    if rng.random_bool(0.3) {
        // as equal as dyadic units allow
        let base = WEIGHT_SCALE / n as u64;
        let mut units = vec![base; n];
        units[n - 1] += WEIGHT_SCALE - base * n as u64;
        return units;
    }
    let mut cuts: Vec<u64> = (0..n - 1).map(|_| rng.random_range(1..WEIGHT_SCALE)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    while cuts.len() < n - 1 {
        let c = rng.random_range(1..WEIGHT_SCALE);
        if !cuts.contains(&c) {
            cuts.push(c);
            cuts.sort_unstable();
        }
    }
    let mut units = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts {
        units.push(c - prev);
        prev = c;
    }
    units.push(WEIGHT_SCALE - prev);
    units
}

/// N <= 3 classifiers, 1..=20 training scores per class, 1..=50 test samples.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(1..=3);
    let gridded = rng.random_bool(0.6);
    let n_gen = rng.random_range(1..=20);
    let n_imp = rng.random_range(1..=20);

    let mut samples = Vec::new();
    for (label, count) in [(Label::Genuine, n_gen), (Label::Imposter, n_imp)] {
        for k in 0..count {
            let scores = (0..n).map(|_| draw_score(rng, gridded)).collect();
            samples.push(ScoreSample::new(format!("{label}-{k}"), label, scores));
        }
    }
    let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    let train = Dataset::new(ClassifierRegistry::new(names).unwrap(), samples);
    let train_genuine: Vec<Vec<f64>> = (0..n).map(|i| train.scores_for(i, Label::Genuine)).collect();
    let train_imposter: Vec<Vec<f64>> = (0..n).map(|i| train.scores_for(i, Label::Imposter)).collect();

    let n_test = rng.random_range(1..=50);
    let test = (0..n_test)
        .map(|k| {
            let label = if rng.random_bool(0.5) { Label::Genuine } else { Label::Imposter };
            let scores = (0..n).map(|_| draw_score(rng, gridded)).collect();
            ScoreSample::new(format!("t{k}"), label, scores)
        })
        .collect();

    let lambdas: [Option<(u128, u128)>; 8] = [
        Some((1, 2)),
        Some((1, 1)),
        Some((3, 2)),
        Some((2, 1)),
        Some((3, 1)),
        Some((5, 1)),
        Some((10, 1)),
        None,
    ];
    let lambda = Lambda {
        ratio: *lambdas.choose(rng).unwrap(),
    };

    let minmax = (0..n)
        .map(|i| {
            let all = train_genuine[i].iter().chain(&train_imposter[i]);
            let min = all.clone().copied().fold(f64::INFINITY, f64::min);
            let max = all.copied().fold(f64::NEG_INFINITY, f64::max);
            if min < max {
                MinMax { min, max }
            } else {
                MinMax { min, max: min + 1.0 }
            }
        })
        .collect();

    Instance {
        n,
        thresholds: (0..n).map(|_| draw_score(rng, true)).collect(),
        fused_threshold: draw_score(rng, gridded),
        weight_units: split_weight_units(rng, n),
        train_genuine,
        train_imposter,
        train,
        test,
        lambda,
        minmax,
    }
}

/// Exact non-negative fraction.
#[derive(Debug, Clone, Copy)]
pub struct Frac {
    pub num: u128,
    pub den: u128,
}

impl Frac {
    pub fn gt(self, other: Frac) -> bool {
        self.num * other.den > other.num * self.den
    }

    pub fn scale(self, k: u64) -> Frac {
        Frac {
            num: self.num * k as u128,
            den: self.den,
        }
    }

    pub fn recip(self) -> Frac {
        Frac {
            num: self.den,
            den: self.num,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMdrr {
    pub label: Label,
    pub fallback: bool,
}

pub struct Oracle<'a> {
    pub inst: &'a Instance,
}

impl Oracle<'_> {
    fn counts(&self, i: usize, s: f64) -> (u128, u128, u128, u128) {
        let mut le = 0u128;
        for &g in &self.inst.train_genuine[i] {
            if g <= s {
                le += 1;
            }
        }
        let mut ge = 0u128;
        for &m in &self.inst.train_imposter[i] {
            if m >= s {
                ge += 1;
            }
        }
        (
            le,
            self.inst.train_genuine[i].len() as u128,
            ge,
            self.inst.train_imposter[i].len() as u128,
        )
    }

    /// Smoothed genuine and imposter reliabilities.
    fn smoothed(&self, i: usize, s: f64) -> (Frac, Frac) {
        let (le, ng, ge, ni) = self.counts(i, s);
        (
            Frac { num: le + 1, den: ng + 1 },
            Frac { num: ge + 1, den: ni + 1 },
        )
    }

    pub fn raw_genuine(&self, i: usize, s: f64) -> f64 {
        let (le, ng, _, _) = self.counts(i, s);
        le as f64 / ng as f64
    }

    pub fn raw_imposter(&self, i: usize, s: f64) -> f64 {
        let (_, _, ge, ni) = self.counts(i, s);
        ge as f64 / ni as f64
    }

    pub fn single(&self, i: usize, s: f64) -> Label {
        let (r1, r0) = self.smoothed(i, s);
        if r1.gt(r0) {
            Label::Genuine
        } else {
            Label::Imposter
        }
    }

    /// Genuine reliability ratio R~1 / R~0.
    fn ratio_genuine(&self, i: usize, s: f64) -> Frac {
        let (r1, r0) = self.smoothed(i, s);
        Frac {
            num: r1.num * r0.den,
            den: r1.den * r0.num,
        }
    }

    pub fn mdrr(&self, scores: &[f64]) -> OracleMdrr {
        let n = self.inst.n;
        let genuine: Vec<Frac> = (0..n).map(|i| self.ratio_genuine(i, scores[i])).collect();
        let imposter: Vec<Frac> = genuine.iter().map(|f| f.recip()).collect();

        let mut best_g = genuine[0];
        let mut best_i = imposter[0];
        for i in 1..n {
            if genuine[i].gt(best_g) {
                best_g = genuine[i];
            }
            if imposter[i].gt(best_i) {
                best_i = imposter[i];
            }
        }
        // gap = max(best_i / best_g, best_g / best_i)
        let g_over_i = Frac {
            num: best_g.num * best_i.den,
            den: best_g.den * best_i.num,
        };
        let gap = if g_over_i.gt(g_over_i.recip()) { g_over_i } else { g_over_i.recip() };
        let within = match self.inst.lambda.ratio {
            None => true,
            Some((a, b)) => !gap.gt(Frac { num: a, den: b }),
        };

        if within {
            let singles: Vec<Label> = (0..n).map(|i| self.single(i, scores[i])).collect();
            return OracleMdrr {
                label: self.weighted_vote(&singles),
                fallback: true,
            };
        }

        let w = &self.inst.weight_units;
        let mut top_g = genuine[0].scale(w[0]);
        let mut top_i = imposter[0].scale(w[0]);
        for i in 1..n {
            if genuine[i].scale(w[i]).gt(top_g) {
                top_g = genuine[i].scale(w[i]);
            }
            if imposter[i].scale(w[i]).gt(top_i) {
                top_i = imposter[i].scale(w[i]);
            }
        }
        OracleMdrr {
            label: if top_g.gt(top_i) { Label::Genuine } else { Label::Imposter },
            fallback: false,
        }
    }

    pub fn threshold_votes(&self, scores: &[f64]) -> Vec<Label> {
        let mut votes = Vec::new();
        for i in 0..self.inst.n {
            votes.push(if scores[i] >= self.inst.thresholds[i] {
                Label::Genuine
            } else {
                Label::Imposter
            });
        }
        votes
    }

    pub fn vote(&self, votes: &[Label]) -> Label {
        let mut g = 0;
        let mut m = 0;
        for v in votes {
            if *v == Label::Genuine {
                g += 1;
            } else {
                m += 1;
            }
        }
        if g > m {
            Label::Genuine
        } else {
            Label::Imposter
        }
    }

    pub fn weighted_vote(&self, votes: &[Label]) -> Label {
        let mut g = 0u64;
        let mut m = 0u64;
        for (i, v) in votes.iter().enumerate() {
            if *v == Label::Genuine {
                g += self.inst.weight_units[i];
            } else {
                m += self.inst.weight_units[i];
            }
        }
        if g > m {
            Label::Genuine
        } else {
            Label::Imposter
        }
    }

    pub fn sum(&self, scores: &[f64], weighted: bool) -> Label {
        let mut fused = 0.0;
        for i in 0..self.inst.n {
            let r = self.inst.minmax[i];
            let mut x = (scores[i] - r.min) / (r.max - r.min);
            if x < 0.0 {
                x = 0.0;
            }
            if x > 1.0 {
                x = 1.0;
            }
            if weighted {
                fused += (self.inst.weight_units[i] as f64 / WEIGHT_SCALE as f64) * x;
            } else {
                fused += x;
            }
        }
        if !weighted {
            fused /= self.inst.n as f64;
        }
        if fused >= self.inst.fused_threshold {
            Label::Genuine
        } else {
            Label::Imposter
        }
    }

    pub fn decide(&self, strategy: Strategy, scores: &[f64]) -> Label {
        match strategy {
            Strategy::Mdrr => self.mdrr(scores).label,
            Strategy::Voting => self.vote(&self.threshold_votes(scores)),
            Strategy::WeightedVoting => self.weighted_vote(&self.threshold_votes(scores)),
            Strategy::Sum => self.sum(scores, false),
            Strategy::WeightedSum => self.sum(scores, true),
        }
    }
}
