//! College-student classifier over tweet-style features.
//!
//! Each feature is the fraction of a user's tweets containing it, bucketed
//! into ten equal-width bins. A linear max-margin model is fit to the binned
//! values (rescaled to `[0, 1]`) by full-batch subgradient descent on the
//! L2-regularized hinge loss with step size `1 / (lambda * t)`.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::attributes::hashtags;
use crate::error::{Error, Result};
use crate::labeler::{LabelClass, LabelRow, WeakLabelValue};
use crate::profiles::StudentRecord;

pub const BINS: u8 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Emoji,
    Hashtag,
    Hahalol,
    Retweet,
}

impl Feature {
    pub const BASE: [Feature; 3] = [Feature::Emoji, Feature::Hashtag, Feature::Hahalol];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Emoji => "emoji",
            Feature::Hashtag => "hashtag",
            Feature::Hahalol => "hahalol",
            Feature::Retweet => "retweet",
        }
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Feature::Emoji, Feature::Hashtag, Feature::Hahalol, Feature::Retweet]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown feature {s:?}"))
    }
}

/// Bin index for a relative frequency: `min(floor(10 f), 9)`.
pub fn bin(frequency: f64) -> u8 {
    ((frequency.clamp(0.0, 1.0) * f64::from(BINS)).floor() as u8).min(BINS - 1)
}

/// Same as [`bin`] for `count / total`, computed without rounding error.
fn bin_counts(count: usize, total: usize) -> u8 {
    ((count * usize::from(BINS) / total) as u8).min(BINS - 1)
}

/// Emoticons, Misc Symbols and Pictographs, Transport and Map, Supplemental
/// Symbols and Pictographs.
pub fn is_emoji(c: char) -> bool {
    matches!(u32::from(c), 0x1F300..=0x1F5FF | 0x1F600..=0x1F64F | 0x1F680..=0x1F6FF | 0x1F900..=0x1F9FF)
}

fn laugh_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?:(?:HA){2,}H?|LO+L)$").expect("valid laugh regex"))
}

/// Whole-token, case-sensitive HAHA/LOL detection.
pub fn has_laugh(text: &str) -> bool {
    text.split_whitespace()
        .map(|tok| tok.trim_matches(|c: char| !c.is_alphanumeric()))
        .any(|tok| laugh_regex().is_match(tok))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub emoji_bin: u8,
    pub hashtag_bin: u8,
    pub hahalol_bin: u8,
    pub retweet_bin: Option<u8>,
    /// emoji, hashtag, hahalol, retweet
    pub raw_frequencies: [f64; 4],
}

impl FeatureVector {
    /// Builds a vector straight from bins, e.g. for synthetic experiments.
    pub fn from_bins(emoji: u8, hashtag: u8, hahalol: u8, retweet: Option<u8>) -> Self {
        let mid = |b: u8| (f64::from(b) + 0.5) / f64::from(BINS);
        Self {
            emoji_bin: emoji,
            hashtag_bin: hashtag,
            hahalol_bin: hahalol,
            retweet_bin: retweet,
            raw_frequencies: [mid(emoji), mid(hashtag), mid(hahalol), retweet.map_or(0.0, mid)],
        }
    }

    pub fn bin_of(&self, feature: Feature) -> Option<u8> {
        match feature {
            Feature::Emoji => Some(self.emoji_bin),
            Feature::Hashtag => Some(self.hashtag_bin),
            Feature::Hahalol => Some(self.hahalol_bin),
            Feature::Retweet => self.retweet_bin,
        }
    }

    /// Model inputs for the given features: bins divided by 9.
    pub fn inputs(&self, features: &[Feature]) -> Result<Vec<f64>> {
        features
            .iter()
            .map(|&f| {
                self.bin_of(f)
                    .map(|b| f64::from(b) / f64::from(BINS - 1))
                    .ok_or(Error::Arity {
                        expected: features.len(),
                        found: features.len() - 1,
                    })
            })
            .collect()
    }
}

pub fn extract_features(record: &StudentRecord) -> Result<FeatureVector> {
    let total = record.tweets.len();
    if total == 0 {
        return Err(Error::Features {
            id: record.id.clone(),
            reason: "no tweets".into(),
        });
    }
    let mut counts = [0usize; 4];
    for tweet in &record.tweets {
        let text = tweet.text();
        counts[0] += usize::from(text.chars().any(is_emoji));
        counts[1] += usize::from(hashtags(text).next().is_some());
        counts[2] += usize::from(has_laugh(text));
        counts[3] += usize::from(tweet.is_retweet());
    }
    Ok(FeatureVector {
        emoji_bin: bin_counts(counts[0], total),
        hashtag_bin: bin_counts(counts[1], total),
        hahalol_bin: bin_counts(counts[2], total),
        retweet_bin: Some(bin_counts(counts[3], total)),
        raw_frequencies: counts.map(|c| c as f64 / total as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub lambda: f64,
    pub with_retweet: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            epochs: 200,
            lambda: 0.01,
            with_retweet: false,
        }
    }
}

impl TrainConfig {
    pub fn active_features(&self) -> Vec<Feature> {
        let mut f = Feature::BASE.to_vec();
        if self.with_retweet {
            f.push(Feature::Retweet);
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub lambda: f64,
    pub cv_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    /// One weight per active feature, then the bias.
    pub weights: Vec<f64>,
    pub active_features: Vec<Feature>,
    pub training_meta: TrainingMeta,
}

fn sign(label: LabelClass) -> f64 {
    match label {
        LabelClass::College => 1.0,
        LabelClass::NonCollege => -1.0,
    }
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Regularized hinge objective; `rows` already carry the trailing bias input.
fn objective(w: &[f64], rows: &[Vec<f64>], ys: &[f64], lambda: f64) -> f64 {
    let hinge: f64 = rows
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * dot(w, x)).max(0.0))
        .sum();
    0.5 * lambda * dot(w, w) + hinge / rows.len() as f64
}

pub fn train(features: &[FeatureVector], labels: &[LabelClass], config: &TrainConfig) -> Result<ClassifierModel> {
    train_traced(features, labels, config).map(|(m, _)| m)
}

/// Trains and also returns the objective after each epoch.
///
/// Subgradient steps are not descent steps, so the returned model is the best
/// iterate seen; the trace records that iterate's objective and never rises.
pub fn train_traced(
    features: &[FeatureVector],
    labels: &[LabelClass],
    config: &TrainConfig,
) -> Result<(ClassifierModel, Vec<f64>)> {
    if features.len() != labels.len() {
        return Err(Error::Training(format!(
            "{} feature vectors but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&l| l == LabelClass::College).count();
    let negatives = labels.len() - positives;
    if positives < 2 || negatives < 2 {
        return Err(Error::Training(format!(
            "need at least two examples per class, got {positives} college and {negatives} non-college"
        )));
    }
    if !config.lambda.is_finite() || config.lambda <= 0.0 || config.epochs == 0 {
        return Err(Error::Config("lambda must be positive and epochs nonzero".into()));
    }

    let active = config.active_features();
    let rows: Vec<Vec<f64>> = features
        .iter()
        .map(|fv| {
            let mut x = fv.inputs(&active)?;
            x.push(1.0);
            Ok(x)
        })
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = labels.iter().map(|&l| sign(l)).collect();
    let n = rows.len() as f64;
    let dim = active.len() + 1;
    let radius = 1.0 / config.lambda.sqrt();

    let mut w = vec![0.0; dim];
    let mut best = w.clone();
    let mut best_obj = objective(&w, &rows, &ys, config.lambda);
    let mut trace = Vec::with_capacity(config.epochs);
    let mut grad = vec![0.0; dim];

    for t in 1..=config.epochs {
        let eta = 1.0 / (config.lambda * t as f64);
        for (g, wi) in grad.iter_mut().zip(&w) {
            *g = config.lambda * wi;
        }
        for (x, y) in rows.iter().zip(&ys) {
            if y * dot(&w, x) < 1.0 {
                for (g, xi) in grad.iter_mut().zip(x) {
                    *g -= y * xi / n;
                }
            }
        }
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= eta * g;
        }
        let norm = dot(&w, &w).sqrt();
        if norm > radius {
            w.iter_mut().for_each(|wi| *wi *= radius / norm);
        }
        let obj = objective(&w, &rows, &ys, config.lambda);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&w);
        }
        trace.push(best_obj);
    }

    Ok((
        ClassifierModel {
            weights: best,
            active_features: active,
            training_meta: TrainingMeta {
                seed: config.seed,
                epochs: config.epochs,
                lambda: config.lambda,
                cv_accuracy: None,
            },
        },
        trace,
    ))
}

/// Mean held-out accuracy over `k` stratified folds drawn with the config seed.
pub fn cross_validate(
    features: &[FeatureVector],
    labels: &[LabelClass],
    k: usize,
    config: &TrainConfig,
) -> Result<f64> {
    if k < 2 {
        return Err(Error::Config(format!("fold count {k} is below 2")));
    }
    if features.len() != labels.len() {
        return Err(Error::Training("feature and label counts differ".into()));
    }
    if labels.len() < k {
        return Err(Error::Training(format!("{} examples for {k} folds", labels.len())));
    }
    let folds = fold_assignment(labels, k, config.seed);
    let mut total = 0.0;
    for fold in 0..k {
        let (mut train_x, mut train_y, mut test) = (Vec::new(), Vec::new(), Vec::new());
        for (i, &f) in folds.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train_x.push(features[i]);
                train_y.push(labels[i]);
            }
        }
        let model = train(&train_x, &train_y, config)?;
        let correct = test
            .iter()
            .map(|&i| infer(&model, &features[i]).map(|p| p == labels[i]))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .filter(|&c| c)
            .count();
        total += correct as f64 / test.len() as f64;
    }
    Ok(total / k as f64)
}

/// Fold index per example: each class is shuffled, then dealt round-robin.
fn fold_assignment(labels: &[LabelClass], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(labels.len());
    for class in [LabelClass::College, LabelClass::NonCollege] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        order.extend(idx);
    }
    let mut folds = vec![0; labels.len()];
    for (pos, i) in order.into_iter().enumerate() {
        folds[i] = pos % k;
    }
    folds
}

impl ClassifierModel {
    pub fn score_inputs(&self, inputs: &[f64]) -> Result<f64> {
        if inputs.len() + 1 != self.weights.len() {
            return Err(Error::Arity {
                expected: self.weights.len() - 1,
                found: inputs.len(),
            });
        }
        let (w, bias) = self.weights.split_at(inputs.len());
        Ok(dot(w, inputs) + bias[0])
    }

    pub fn score(&self, fv: &FeatureVector) -> Result<f64> {
        self.score_inputs(&fv.inputs(&self.active_features)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# linear college-student classifier\n");
        let names: Vec<&str> = self.active_features.iter().map(|f| f.name()).collect();
        let (w, bias) = self.weights.split_at(self.weights.len() - 1);
        let _ = writeln!(s, "features {}", names.join(" "));
        let _ = writeln!(s, "weights {}", join_floats(w));
        let _ = writeln!(s, "bias {}", bias[0]);
        let m = &self.training_meta;
        let _ = writeln!(s, "seed {}", m.seed);
        let _ = writeln!(s, "epochs {}", m.epochs);
        let _ = writeln!(s, "lambda {}", m.lambda);
        if let Some(acc) = m.cv_accuracy {
            let _ = writeln!(s, "cv_accuracy {acc}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Config(format!("model file: {msg}"));
        let mut features = None;
        let mut weights = None;
        let mut bias = None;
        let mut meta = TrainingMeta {
            seed: 0,
            epochs: 0,
            lambda: 0.0,
            cv_accuracy: None,
        };
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let num = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("{key}: {e}")));
            match key {
                "features" => {
                    features = Some(
                        rest.split_whitespace()
                            .map(|f| f.parse::<Feature>().map_err(bad))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "weights" => weights = Some(rest.split_whitespace().map(num).collect::<Result<Vec<_>>>()?),
                "bias" => bias = Some(num(rest.trim())?),
                "seed" => meta.seed = rest.trim().parse().map_err(|e| bad(format!("seed: {e}")))?,
                "epochs" => meta.epochs = rest.trim().parse().map_err(|e| bad(format!("epochs: {e}")))?,
                "lambda" => meta.lambda = num(rest.trim())?,
                "cv_accuracy" => meta.cv_accuracy = Some(num(rest.trim())?),
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        let features = features.ok_or_else(|| bad("missing features".into()))?;
        let mut weights = weights.ok_or_else(|| bad("missing weights".into()))?;
        if weights.len() != features.len() {
            return Err(Error::Arity {
                expected: features.len(),
                found: weights.len(),
            });
        }
        weights.push(bias.ok_or_else(|| bad("missing bias".into()))?);
        Ok(Self {
            weights,
            active_features: features,
            training_meta: meta,
        })
    }
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for ClassifierModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Sign of the linear score; exactly zero counts as college.
pub fn infer(model: &ClassifierModel, fv: &FeatureVector) -> Result<LabelClass> {
    Ok(if model.score(fv)? >= 0.0 {
        LabelClass::College
    } else {
        LabelClass::NonCollege
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionSource {
    Weak,
    Override,
    Inferred,
    /// Unlabeled and without tweets, so nothing to infer from.
    NoFeatures,
}

/// One line of `predicted.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: String,
    pub label: Option<LabelClass>,
    pub source: PredictionSource,
}

/// Trains on the labeled rows, reports CV accuracy, and labels every student:
/// manual overrides first, then weak labels, then the classifier.
pub fn classify_corpus(
    students: &[StudentRecord],
    labels: &[LabelRow],
    config: &TrainConfig,
    folds: usize,
) -> Result<(ClassifierModel, Vec<PredictionRow>)> {
    use rayon::prelude::*;
    use std::collections::HashMap;

    let by_id: HashMap<&str, &LabelRow> = labels.iter().map(|r| (r.id.as_str(), r)).collect();
    let extracted: Vec<Option<FeatureVector>> = students
        .par_iter()
        .map(|s| extract_features(s).ok())
        .collect();

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (s, fv) in students.iter().zip(&extracted) {
        let class = by_id.get(s.id.as_str()).and_then(|r| r.effective().class());
        if let (Some(class), Some(fv)) = (class, fv) {
            xs.push(*fv);
            ys.push(class);
        }
    }
    let mut model = train(&xs, &ys, config)?;
    if xs.len() >= folds {
        model.training_meta.cv_accuracy = Some(cross_validate(&xs, &ys, folds, config)?);
    }

    let rows = students
        .iter()
        .zip(&extracted)
        .map(|(s, fv)| {
            let row = by_id.get(s.id.as_str());
            let (label, source) = match (row.and_then(|r| r.manual_override), row.map(|r| r.label.value)) {
                (Some(v), _) if v != WeakLabelValue::Unlabeled => (v.class(), PredictionSource::Override),
                (None, Some(v)) if v != WeakLabelValue::Unlabeled => (v.class(), PredictionSource::Weak),
                _ => match fv {
                    Some(fv) => (Some(infer(&model, fv)?), PredictionSource::Inferred),
                    None => (None, PredictionSource::NoFeatures),
                },
            };
            Ok(PredictionRow {
                id: s.id.clone(),
                label,
                source,
            })
        })
        .collect::<Result<_>>()?;
    Ok((model, rows))
}
