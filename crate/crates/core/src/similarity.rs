//! Pairwise similarity between two attribute profiles.
//!
//! Strings are compared with a Levenshtein-based ratio
//! `(len(a) + len(b) - lev(a, b)) / (len(a) + len(b))` over Unicode scalar
//! values. Interest sets use a Jaccard coefficient whose overlap count is the
//! size of a maximum one-to-one matching between interests whose ratio reaches
//! the fuzzy threshold. The combined score is the plain mean of whichever of
//! the four components are present on both sides.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bipartite::maximum_matching;
use crate::error::{Error, Result};
use crate::profiles::AttributeProfile;

pub const DEFAULT_FUZZY_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FuzzyThreshold(f64);

impl FuzzyThreshold {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Config(format!("fuzzy threshold {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for FuzzyThreshold {
    fn default() -> Self {
        Self(DEFAULT_FUZZY_THRESHOLD)
    }
}

impl TryFrom<f64> for FuzzyThreshold {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FuzzyThreshold> for f64 {
    fn from(t: FuzzyThreshold) -> f64 {
        t.0
    }
}

impl fmt::Display for FuzzyThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    // One row over the shorter string.
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let sub = diag + usize::from(ca != cb);
            row[j + 1] = sub.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// Levenshtein-based similarity in `[0, 1]`. Two empty strings count as identical.
pub fn lev_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    lev_similarity_chars(&a, &b)
}

pub fn lev_similarity_chars(a: &[char], b: &[char]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    ratio(total - levenshtein_chars(a, b), total)
}

fn ratio(num: usize, den: usize) -> f64 {
    num as f64 / den as f64
}

/// Whether two strings are similar enough to count as the same interest.
///
/// The length difference is a lower bound on the edit distance, so pairs whose
/// best possible ratio is below the threshold skip the DP entirely.
pub fn fuzzy_equal(a: &[char], b: &[char], threshold: FuzzyThreshold) -> bool {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0 >= threshold.0;
    }
    if ratio(total - a.len().abs_diff(b.len()), total) < threshold.0 {
        return false;
    }
    lev_similarity_chars(a, b) >= threshold.0
}

/// 1 for equal values, 0 for different ones, absent if either side is unknown.
pub fn categorical_similarity<T: PartialEq>(a: Option<T>, b: Option<T>) -> Option<f64> {
    Some(if a? == b? { 1.0 } else { 0.0 })
}

pub fn location_similarity(a: Option<&str>, b: Option<&str>) -> Option<f64> {
    Some(lev_similarity(a?, b?))
}

/// Jaccard coefficient given the overlap count and both set sizes.
pub fn jaccard_from_overlap(overlap: usize, len_a: usize, len_b: usize) -> f64 {
    ratio(overlap, len_a + len_b - overlap)
}

/// Size of a maximum one-to-one pairing of interests whose similarity reaches the threshold.
pub fn fuzzy_overlap(a: &BTreeSet<String>, b: &BTreeSet<String>, threshold: FuzzyThreshold) -> usize {
    let a: Vec<Vec<char>> = a.iter().map(|s| s.chars().collect()).collect();
    let b: Vec<Vec<char>> = b.iter().map(|s| s.chars().collect()).collect();
    let adjacency: Vec<Vec<usize>> = a
        .iter()
        .map(|x| {
            b.iter()
                .enumerate()
                .filter(|(_, y)| fuzzy_equal(x, y, threshold))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    maximum_matching(&adjacency, b.len())
}

/// Fuzzy Jaccard similarity of two interest sets; absent when either set is empty.
pub fn interest_similarity(
    a: &BTreeSet<String>,
    b: &BTreeSet<String>,
    threshold: FuzzyThreshold,
) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    Some(jaccard_from_overlap(fuzzy_overlap(a, b, threshold), a.len(), b.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityBreakdown {
    pub gender: Option<f64>,
    pub race: Option<f64>,
    pub location: Option<f64>,
    pub interest: Option<f64>,
    pub combined: f64,
    /// No component was comparable; `combined` is 0 by convention.
    pub no_signal: bool,
}

impl SimilarityBreakdown {
    /// Averages the present components in a fixed order.
    pub fn from_components(
        gender: Option<f64>,
        race: Option<f64>,
        location: Option<f64>,
        interest: Option<f64>,
    ) -> Self {
        let present = [gender, race, location, interest];
        let (sum, count) = present
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        Self {
            gender,
            race,
            location,
            interest,
            combined: if count == 0 { 0.0 } else { sum / count as f64 },
            no_signal: count == 0,
        }
    }
}

pub fn combined_score(
    student: &AttributeProfile,
    model: &AttributeProfile,
    threshold: FuzzyThreshold,
) -> SimilarityBreakdown {
    SimilarityBreakdown::from_components(
        categorical_similarity(student.gender, model.gender),
        categorical_similarity(student.race, model.race),
        location_similarity(student.location.as_deref(), model.location.as_deref()),
        interest_similarity(&student.interests, &model.interests, threshold),
    )
}
