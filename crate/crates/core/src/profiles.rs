//! Record types for students and candidates, and validated loading from
//! `students.jsonl` / `candidates.jsonl`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jsonl;
use crate::rolemodel::IndustryTaxonomy;

/// Timelines are stored newest first; anything past this many tweets is dropped at load.
pub const MAX_TWEETS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Race {
    White,
    Black,
    Asian,
    Api,
    Hispanic,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }
}

impl Race {
    pub const ALL: [Race; 5] = [Race::White, Race::Black, Race::Asian, Race::Api, Race::Hispanic];

    pub fn as_str(self) -> &'static str {
        match self {
            Race::White => "White",
            Race::Black => "Black",
            Race::Asian => "Asian",
            Race::Api => "Api",
            Race::Hispanic => "Hispanic",
        }
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Gender::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown gender {s:?}"))
    }
}

impl FromStr for Race {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Race::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown race {s:?}"))
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Race {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictorSource {
    NameGender,
    NameDemographics,
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictedAttribute {
    Gender,
    Race,
}

/// One third-party prediction as delivered with the record. A null value means
/// the predictor gave up, in which case there is no accuracy either.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorOutput {
    pub source: PredictorSource,
    pub attribute: PredictedAttribute,
    pub value: Option<String>,
    pub accuracy: Option<f64>,
}

impl PredictorOutput {
    pub fn validate(&self) -> std::result::Result<(), String> {
        match (&self.value, self.accuracy) {
            (None, None) => Ok(()),
            (Some(_), None) | (None, Some(_)) => {
                Err("predictor value and accuracy must be both null or both present".into())
            }
            (Some(value), Some(acc)) => {
                if !(0.0..=1.0).contains(&acc) {
                    return Err(format!("predictor accuracy {acc} outside [0, 1]"));
                }
                match self.attribute {
                    PredictedAttribute::Gender => value.parse::<Gender>().map(drop),
                    PredictedAttribute::Race => value.parse::<Race>().map(drop),
                }
            }
        }
    }
}

/// A tweet is either bare text or an object carrying an explicit retweet flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tweet {
    Text(String),
    Flagged {
        text: String,
        #[serde(default)]
        retweet: bool,
    },
}

impl Tweet {
    pub fn text(&self) -> &str {
        match self {
            Tweet::Text(t) | Tweet::Flagged { text: t, .. } => t,
        }
    }

    pub fn is_retweet(&self) -> bool {
        match self {
            Tweet::Text(t) => t.starts_with("RT @"),
            Tweet::Flagged { text, retweet } => *retweet || text.starts_with("RT @"),
        }
    }
}

impl From<&str> for Tweet {
    fn from(s: &str) -> Self {
        Tweet::Text(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub id: String,
    #[serde(default)]
    pub tweets: Vec<Tweet>,
    #[serde(default)]
    pub bio: String,
    #[serde(default)]
    pub display_name: String,
    #[serde(default)]
    pub location_raw: String,
    #[serde(default)]
    pub predictor_outputs: Vec<PredictorOutput>,
}

impl StudentRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.tweets.is_empty() && self.bio.trim().is_empty() {
            return Err("no tweets and empty bio".into());
        }
        self.predictor_outputs.iter().try_for_each(PredictorOutput::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id: String,
    #[serde(default)]
    pub full_name: String,
    #[serde(default)]
    pub industry: String,
    #[serde(default)]
    pub education_majors: Vec<String>,
    #[serde(default)]
    pub interests_raw: Vec<String>,
    #[serde(default)]
    pub skills_raw: Vec<String>,
    #[serde(default)]
    pub location_raw: String,
    #[serde(default)]
    pub predictor_outputs: Vec<PredictorOutput>,
    /// Public profile link; pages fall back to a URL built from the id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_url: Option<String>,
}

impl CandidateRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.location_raw.trim().is_empty() {
            return Err("empty location".into());
        }
        self.predictor_outputs.iter().try_for_each(PredictorOutput::validate)
    }
}

/// Resolved attributes of one person. Absent values are excluded from
/// similarity rather than scored as mismatches.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeProfile {
    pub gender: Option<Gender>,
    pub race: Option<Race>,
    pub location: Option<String>,
    #[serde(default)]
    pub interests: BTreeSet<String>,
}

impl AttributeProfile {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if let Some(bad) = self
            .interests
            .iter()
            .find(|i| i.is_empty() || i.starts_with('#'))
        {
            return Err(format!("invalid interest {bad:?}"));
        }
        if self.location.as_deref().is_some_and(|l| l.trim().is_empty()) {
            return Err("blank location".into());
        }
        Ok(())
    }
}

/// A profile row as persisted in `profiles.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonProfile {
    pub id: String,
    #[serde(flatten)]
    pub profile: AttributeProfile,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRecord {
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

impl fmt::Display for RejectedRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(f, "line {} ({id}): {}", self.line, self.reason),
            None => write!(f, "line {}: {}", self.line, self.reason),
        }
    }
}

/// Accepted records in file order, plus everything that was turned away.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub rejected: Vec<RejectedRecord>,
    /// Ids of accepted candidates whose industry is missing from the taxonomy.
    pub unknown_industry: Vec<String>,
}

fn load_validated<T, F>(path: &Path, mut check: F) -> Result<Loaded<T>>
where
    T: serde::de::DeserializeOwned,
    F: FnMut(&mut T) -> (std::result::Result<(), String>, String),
{
    let mut seen = HashSet::new();
    let mut loaded = Loaded {
        records: Vec::new(),
        rejected: Vec::new(),
        unknown_industry: Vec::new(),
    };
    for line in jsonl::read_lines::<T>(path)? {
        let mut record = match line.value {
            Ok(r) => r,
            Err(reason) => {
                loaded.rejected.push(RejectedRecord {
                    line: line.number,
                    id: None,
                    reason,
                });
                continue;
            }
        };
        let (verdict, id) = check(&mut record);
        let verdict = verdict.and_then(|()| {
            if seen.insert(id.clone()) {
                Ok(())
            } else {
                Err("duplicate id".to_owned())
            }
        });
        match verdict {
            Ok(()) => loaded.records.push(record),
            Err(reason) => loaded.rejected.push(RejectedRecord {
                line: line.number,
                id: Some(id).filter(|s| !s.is_empty()),
                reason,
            }),
        }
    }
    Ok(loaded)
}

pub fn load_students(path: &Path) -> Result<Loaded<StudentRecord>> {
    load_validated(path, |r: &mut StudentRecord| {
        r.tweets.truncate(MAX_TWEETS);
        (r.validate(), r.id.clone())
    })
}

pub fn load_candidates(path: &Path, taxonomy: &IndustryTaxonomy) -> Result<Loaded<CandidateRecord>> {
    let mut unknown = Vec::new();
    let mut loaded = load_validated(path, |r: &mut CandidateRecord| {
        let verdict = r.validate();
        if verdict.is_ok() && taxonomy.group(&r.industry).is_none() {
            unknown.push(r.id.clone());
        }
        (verdict, r.id.clone())
    })?;
    // Duplicates are rejected after the flag is recorded; drop their entries.
    let accepted: HashSet<&str> = loaded.records.iter().map(|r| r.id.as_str()).collect();
    let mut seen = HashSet::new();
    unknown.retain(|id| accepted.contains(id.as_str()) && seen.insert(id.clone()));
    loaded.unknown_industry = unknown;
    Ok(loaded)
}

pub fn load_profiles(path: &Path) -> Result<Vec<PersonProfile>> {
    jsonl::read_strict(path)
}
