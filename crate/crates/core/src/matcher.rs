//! Top-k role-model ranking per student and matching-accuracy evaluation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::normalize_text;
use crate::bipartite::maximum_matching;
use crate::error::{Error, Result};
use crate::profiles::{AttributeProfile, Gender, PersonProfile, Race};
use crate::similarity::{
    categorical_similarity, fuzzy_equal, jaccard_from_overlap, lev_similarity_chars, FuzzyThreshold,
    SimilarityBreakdown,
};

pub const DEFAULT_K: usize = 5;

/// Cutoffs reported by [`evaluate`]: "at least n correct" for n = 1..=5.
pub const MAX_N: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub candidate_id: String,
    #[serde(flatten)]
    pub breakdown: SimilarityBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub student_id: String,
    pub ranked: Vec<RankedEntry>,
}

impl MatchResult {
    /// True when no ranked candidate shared a single comparable attribute.
    pub fn no_signal(&self) -> bool {
        self.ranked.iter().all(|e| e.breakdown.no_signal)
    }
}

/// Ranking order: scored before no-signal, then higher combined score, then
/// smaller candidate id.
pub fn rank_order(a_id: &str, a: &SimilarityBreakdown, b_id: &str, b: &SimilarityBreakdown) -> Ordering {
    a.no_signal
        .cmp(&b.no_signal)
        .then_with(|| b.combined.total_cmp(&a.combined))
        .then_with(|| a_id.cmp(b_id))
}

/// Candidate profiles prepared for repeated scoring: strings are interned so
/// per-student caches can reuse edit-distance work across candidates.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    ids: Vec<String>,
    genders: Vec<Option<Gender>>,
    races: Vec<Option<Race>>,
    locations: Vec<Option<u32>>,
    interests: Vec<Vec<u32>>,
    location_vocab: Vec<Vec<char>>,
    interest_vocab: Vec<Vec<char>>,
}

fn intern(vocab: &mut Vec<Vec<char>>, index: &mut HashMap<String, u32>, s: &str) -> u32 {
    if let Some(&id) = index.get(s) {
        return id;
    }
    let id = vocab.len() as u32;
    vocab.push(s.chars().collect());
    index.insert(s.to_owned(), id);
    id
}

impl CandidatePool {
    pub fn new(candidates: &[PersonProfile]) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::NoCandidates);
        }
        let mut seen = HashSet::new();
        if let Some(dup) = candidates.iter().find(|c| !seen.insert(c.id.as_str())) {
            return Err(Error::Config(format!("duplicate candidate id {:?}", dup.id)));
        }
        let (mut loc_vocab, mut loc_index) = (Vec::new(), HashMap::new());
        let (mut int_vocab, mut int_index) = (Vec::new(), HashMap::new());
        let mut pool = Self {
            ids: Vec::with_capacity(candidates.len()),
            genders: Vec::with_capacity(candidates.len()),
            races: Vec::with_capacity(candidates.len()),
            locations: Vec::with_capacity(candidates.len()),
            interests: Vec::with_capacity(candidates.len()),
            location_vocab: Vec::new(),
            interest_vocab: Vec::new(),
        };
        for c in candidates {
            let p = &c.profile;
            pool.ids.push(c.id.clone());
            pool.genders.push(p.gender);
            pool.races.push(p.race);
            pool.locations
                .push(p.location.as_deref().map(|l| intern(&mut loc_vocab, &mut loc_index, l)));
            pool.interests.push(
                p.interests
                    .iter()
                    .map(|i| intern(&mut int_vocab, &mut int_index, i))
                    .collect(),
            );
        }
        pool.location_vocab = loc_vocab;
        pool.interest_vocab = int_vocab;
        Ok(pool)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            location: vec![None; self.location_vocab.len()],
            edges: vec![None; self.interest_vocab.len()],
            touched_locations: Vec::new(),
            touched_interests: Vec::new(),
        }
    }
}

/// Per-student memo of location similarities and interest edges, reused
/// across students on the same thread.
struct Scratch {
    location: Vec<Option<f64>>,
    /// candidate interest id -> indices of the student's interests it matches
    edges: Vec<Option<Vec<usize>>>,
    touched_locations: Vec<u32>,
    touched_interests: Vec<u32>,
}

impl Scratch {
    fn reset(&mut self) {
        for i in self.touched_locations.drain(..) {
            self.location[i as usize] = None;
        }
        for i in self.touched_interests.drain(..) {
            self.edges[i as usize] = None;
        }
    }
}

struct Slot<'a> {
    id: &'a str,
    breakdown: SimilarityBreakdown,
}

impl PartialEq for Slot<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Slot<'_> {}

impl PartialOrd for Slot<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Slot<'_> {
    // Greater means ranked later, so a max-heap keeps the worst retained slot on top.
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(self.id, &self.breakdown, other.id, &other.breakdown)
    }
}

fn rank_with_scratch(
    student_id: &str,
    student: &AttributeProfile,
    pool: &CandidatePool,
    k: usize,
    threshold: FuzzyThreshold,
    scratch: &mut Scratch,
) -> MatchResult {
    scratch.reset();
    let Scratch {
        location: location_cache,
        edges,
        touched_locations,
        touched_interests,
    } = scratch;
    let student_location: Option<Vec<char>> = student.location.as_ref().map(|l| l.chars().collect());
    let student_interests: Vec<Vec<char>> = student.interests.iter().map(|s| s.chars().collect()).collect();

    let mut heap: BinaryHeap<Slot<'_>> = BinaryHeap::with_capacity(k + 1);
    for c in 0..pool.len() {
        let location = match (&student_location, pool.locations[c]) {
            (Some(mine), Some(id)) => Some(*location_cache[id as usize].get_or_insert_with(|| {
                touched_locations.push(id);
                lev_similarity_chars(mine, &pool.location_vocab[id as usize])
            })),
            _ => None,
        };
        let cand_interests = &pool.interests[c];
        let interest = if student_interests.is_empty() || cand_interests.is_empty() {
            None
        } else {
            for &id in cand_interests {
                edges[id as usize].get_or_insert_with(|| {
                    touched_interests.push(id);
                    let theirs = &pool.interest_vocab[id as usize];
                    student_interests
                        .iter()
                        .enumerate()
                        .filter(|(_, mine)| fuzzy_equal(mine, theirs, threshold))
                        .map(|(i, _)| i)
                        .collect()
                });
            }
            // Candidate interests on the left, student interests on the right.
            let adjacency: Vec<&[usize]> = cand_interests
                .iter()
                .map(|&id| edges[id as usize].as_deref().unwrap_or_default())
                .collect();
            let overlap = if adjacency.iter().all(|a| a.is_empty()) {
                0
            } else {
                maximum_matching(&adjacency, student_interests.len())
            };
            Some(jaccard_from_overlap(overlap, student_interests.len(), cand_interests.len()))
        };
        let breakdown = SimilarityBreakdown::from_components(
            categorical_similarity(student.gender, pool.genders[c]),
            categorical_similarity(student.race, pool.races[c]),
            location,
            interest,
        );
        let slot = Slot {
            id: &pool.ids[c],
            breakdown,
        };
        if heap.len() < k {
            heap.push(slot);
        } else if heap.peek().is_some_and(|worst| slot < *worst) {
            heap.pop();
            heap.push(slot);
        }
    }

    let ranked = heap
        .into_sorted_vec()
        .into_iter()
        .map(|s| RankedEntry {
            candidate_id: s.id.to_owned(),
            breakdown: s.breakdown,
        })
        .collect();
    MatchResult {
        student_id: student_id.to_owned(),
        ranked,
    }
}

/// Top-`k` candidates for one student.
pub fn rank(
    student: &PersonProfile,
    candidates: &[PersonProfile],
    k: usize,
    threshold: FuzzyThreshold,
) -> Result<MatchResult> {
    let pool = CandidatePool::new(candidates)?;
    Ok(rank_in_pool(student, &pool, k, threshold))
}

pub fn rank_in_pool(student: &PersonProfile, pool: &CandidatePool, k: usize, threshold: FuzzyThreshold) -> MatchResult {
    let mut scratch = pool.scratch();
    rank_with_scratch(&student.id, &student.profile, pool, k, threshold, &mut scratch)
}

/// One result per student, in student input order.
pub fn match_corpus(
    students: &[PersonProfile],
    candidates: &[PersonProfile],
    k: usize,
    threshold: FuzzyThreshold,
) -> Result<Vec<MatchResult>> {
    if students.is_empty() {
        return Ok(Vec::new());
    }
    let pool = CandidatePool::new(candidates)?;
    Ok(students
        .par_iter()
        .map_init(
            || pool.scratch(),
            |scratch, s| rank_with_scratch(&s.id, &s.profile, &pool, k, threshold, scratch),
        )
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalLevel {
    CityAll,
    StateAll,
    CityTop10,
    StateTop10,
}

impl EvalLevel {
    pub const ALL: [EvalLevel; 4] = [
        EvalLevel::CityAll,
        EvalLevel::StateAll,
        EvalLevel::CityTop10,
        EvalLevel::StateTop10,
    ];

    fn city_level(self) -> bool {
        matches!(self, EvalLevel::CityAll | EvalLevel::CityTop10)
    }

    fn top_cities_only(self) -> bool {
        matches!(self, EvalLevel::CityTop10 | EvalLevel::StateTop10)
    }
}

impl std::str::FromStr for EvalLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|_| format!("unknown level {s:?}"))
    }
}

/// Cities whose students form the top-10 cohorts unless configured otherwise.
pub const DEFAULT_TOP_CITIES: [&str; 10] = [
    "San Francisco",
    "New York City",
    "Atlanta",
    "Los Angeles",
    "Dallas",
    "Chicago",
    "Washington D.C.",
    "Boston",
    "Seattle",
    "Houston",
];

/// Manually determined attributes of a student or candidate. Absent fields
/// mean the evaluator could not tell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthAnnotation {
    pub subject_id: String,
    #[serde(default)]
    pub gender: Option<Gender>,
    #[serde(default)]
    pub race: Option<Race>,
    #[serde(default)]
    pub city: Option<String>,
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_stem_role_model: Option<bool>,
    /// Candidates planted as ideal matches for this student (synthetic data).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub planted: Vec<String>,
}

impl GroundTruthAnnotation {
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (name, v) in [("city", &self.city), ("state", &self.state)] {
            if v.as_deref().is_some_and(|s| s.trim().is_empty()) {
                return Err(format!("{}: blank {name}", self.subject_id));
            }
        }
        Ok(())
    }
}

fn same_place(a: &Option<String>, b: &Option<String>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => normalize_text(a) == normalize_text(b),
        _ => false,
    }
}

/// A candidate is a correct match when it is a STEM role model and agrees with
/// the student on gender, race and place. City-level agreement requires the
/// state to match as well, so a city-level match is always a state-level one.
pub fn is_correct_match(student: &GroundTruthAnnotation, candidate: &GroundTruthAnnotation, level: EvalLevel) -> bool {
    let (Some(gender), Some(race)) = (student.gender, student.race) else {
        return false;
    };
    candidate.is_stem_role_model == Some(true)
        && candidate.gender == Some(gender)
        && candidate.race == Some(race)
        && same_place(&student.state, &candidate.state)
        && (!level.city_level() || same_place(&student.city, &candidate.city))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub level: EvalLevel,
    /// `accuracy[n - 1]`: share of the cohort with at least n correct matches in its top 5.
    pub accuracy: Vec<f64>,
    pub students_with_at_least: Vec<usize>,
    pub cohort_size: usize,
    /// Cohort students whose ranked list carried no comparable attribute.
    pub no_signal_students: usize,
}

pub fn evaluate(
    results: &[MatchResult],
    annotations: &[GroundTruthAnnotation],
    level: EvalLevel,
    top_cities: &[String],
) -> Result<AccuracyReport> {
    let by_id: HashMap<&str, &GroundTruthAnnotation> =
        annotations.iter().map(|a| (a.subject_id.as_str(), a)).collect();
    let mut missing: Vec<String> = Vec::new();
    for r in results {
        if !by_id.contains_key(r.student_id.as_str()) {
            missing.push(r.student_id.clone());
        }
        for e in r.ranked.iter().take(MAX_N) {
            if !by_id.contains_key(e.candidate_id.as_str()) {
                missing.push(e.candidate_id.clone());
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::MissingAnnotations(missing));
    }

    let top: HashSet<String> = top_cities.iter().map(|c| normalize_text(c)).collect();
    let mut at_least = vec![0usize; MAX_N];
    let mut cohort = 0;
    let mut no_signal = 0;
    for r in results {
        let student = by_id[r.student_id.as_str()];
        if level.top_cities_only()
            && !student.city.as_deref().is_some_and(|c| top.contains(&normalize_text(c)))
        {
            continue;
        }
        cohort += 1;
        no_signal += usize::from(r.no_signal());
        let correct = r
            .ranked
            .iter()
            .take(MAX_N)
            .filter(|e| is_correct_match(student, by_id[e.candidate_id.as_str()], level))
            .count();
        for slot in at_least.iter_mut().take(correct) {
            *slot += 1;
        }
    }
    let accuracy = at_least
        .iter()
        .map(|&c| if cohort == 0 { 0.0 } else { c as f64 / cohort as f64 })
        .collect();
    Ok(AccuracyReport {
        level,
        accuracy,
        students_with_at_least: at_least,
        cohort_size: cohort,
        no_signal_students: no_signal,
    })
}
