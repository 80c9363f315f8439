//! Attribute resolution: gender and race from predictor outputs, location from
//! the profile field, and interest sets from hashtags (students) or
//! interests plus skills (candidates).

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::jsonl;
use crate::profiles::{
    AttributeProfile, CandidateRecord, Gender, PredictedAttribute, PredictorOutput, PredictorSource,
    Race, StudentRecord,
};

const BUNDLED_NAMES: &str = include_str!("../data/names.jsonl");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedAttribute {
    pub value: String,
    pub source: String,
    pub accuracy: f64,
}

/// Lower rank wins when accuracies tie.
fn priority(source: PredictorSource) -> u8 {
    match source {
        PredictorSource::NameGender => 0,
        PredictorSource::Face => 1,
        PredictorSource::NameDemographics => 2,
    }
}

fn source_name(source: PredictorSource) -> &'static str {
    match source {
        PredictorSource::NameGender => "name-gender",
        PredictorSource::NameDemographics => "name-demographics",
        PredictorSource::Face => "face",
    }
}

fn resolve<T, F>(outputs: &[PredictorOutput], attribute: PredictedAttribute, parse: F) -> Option<(T, ResolvedAttribute)>
where
    T: Ord + Copy,
    F: Fn(&str) -> Option<T>,
{
    outputs
        .iter()
        .filter(|o| o.attribute == attribute)
        .filter_map(|o| {
            let value = parse(o.value.as_deref()?)?;
            Some((value, o.source, o.accuracy?))
        })
        // Highest accuracy, then source priority, then value so the pick never
        // depends on input order.
        .min_by(|a, b| {
            b.2.total_cmp(&a.2)
                .then(priority(a.1).cmp(&priority(b.1)))
                .then(a.0.cmp(&b.0))
        })
        .map(|(value, source, accuracy)| {
            (
                value,
                ResolvedAttribute {
                    value: String::new(),
                    source: source_name(source).to_owned(),
                    accuracy,
                },
            )
        })
}

pub fn resolve_gender(outputs: &[PredictorOutput]) -> Option<ResolvedAttribute> {
    resolve(outputs, PredictedAttribute::Gender, |s| s.parse::<Gender>().ok())
        .map(|(g, r)| ResolvedAttribute { value: g.to_string(), ..r })
}

pub fn resolve_race(outputs: &[PredictorOutput]) -> Option<ResolvedAttribute> {
    resolve(outputs, PredictedAttribute::Race, |s| s.parse::<Race>().ok())
        .map(|(v, r)| ResolvedAttribute { value: v.to_string(), ..r })
}

/// Lowercased, trimmed, with internal whitespace runs collapsed to one space.
pub fn normalize_text(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

pub fn resolve_location(raw: &str) -> Option<String> {
    Some(normalize_text(raw)).filter(|s| !s.is_empty())
}

fn hashtag_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:^|[^\w&])#(\w+)").expect("valid hashtag regex"))
}

/// Hashtag bodies in one piece of text, in order of appearance.
pub fn hashtags(text: &str) -> impl Iterator<Item = &str> {
    hashtag_regex()
        .captures_iter(text)
        .filter_map(|c| c.get(1).map(|m| m.as_str()))
}

pub fn extract_student_interests(record: &StudentRecord) -> BTreeSet<String> {
    record
        .tweets
        .iter()
        .flat_map(|t| hashtags(t.text()))
        .map(str::to_lowercase)
        .collect()
}

pub fn extract_candidate_interests(record: &CandidateRecord) -> BTreeSet<String> {
    record
        .interests_raw
        .iter()
        .chain(&record.skills_raw)
        .map(|s| normalize_text(s.trim_start_matches('#')))
        .filter(|s| !s.is_empty() && !s.starts_with('#'))
        .collect()
}

/// Anything a profile can be resolved from.
pub trait ProfileSource {
    fn id(&self) -> &str;
    fn predictor_outputs(&self) -> &[PredictorOutput];
    fn location_raw(&self) -> &str;
    fn interests(&self) -> BTreeSet<String>;
    fn name(&self) -> &str;
}

impl ProfileSource for StudentRecord {
    fn id(&self) -> &str {
        &self.id
    }
    fn predictor_outputs(&self) -> &[PredictorOutput] {
        &self.predictor_outputs
    }
    fn location_raw(&self) -> &str {
        &self.location_raw
    }
    fn interests(&self) -> BTreeSet<String> {
        extract_student_interests(self)
    }
    fn name(&self) -> &str {
        &self.display_name
    }
}

impl ProfileSource for CandidateRecord {
    fn id(&self) -> &str {
        &self.id
    }
    fn predictor_outputs(&self) -> &[PredictorOutput] {
        &self.predictor_outputs
    }
    fn location_raw(&self) -> &str {
        &self.location_raw
    }
    fn interests(&self) -> BTreeSet<String> {
        extract_candidate_interests(self)
    }
    fn name(&self) -> &str {
        &self.full_name
    }
}

pub fn build_profile<R: ProfileSource + ?Sized>(record: &R) -> AttributeProfile {
    profile_from_outputs(record, record.predictor_outputs())
}

/// Like [`build_profile`], with the offline name table added as an extra predictor.
pub fn build_profile_with_lookup<R: ProfileSource + ?Sized>(record: &R, lookup: &NameLookup) -> AttributeProfile {
    let mut outputs = record.predictor_outputs().to_vec();
    outputs.extend(lookup.predict(record.name()));
    profile_from_outputs(record, &outputs)
}

fn profile_from_outputs<R: ProfileSource + ?Sized>(record: &R, outputs: &[PredictorOutput]) -> AttributeProfile {
    AttributeProfile {
        gender: resolve(outputs, PredictedAttribute::Gender, |s| s.parse().ok()).map(|(g, _)| g),
        race: resolve(outputs, PredictedAttribute::Race, |s| s.parse().ok()).map(|(r, _)| r),
        location: resolve_location(record.location_raw()),
        interests: record.interests(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum NameKind {
    Given,
    Surname,
}

#[derive(Debug, Clone, Deserialize)]
struct NameRow {
    name: String,
    kind: NameKind,
    value: String,
    accuracy: f64,
}

/// Offline name table standing in for the name-based predictors: the first
/// token of a name predicts gender, the last token predicts race.
#[derive(Debug, Clone)]
pub struct NameLookup {
    table: HashMap<(NameKind, String), (String, f64)>,
}

impl NameLookup {
    pub fn bundled() -> Self {
        let rows: Vec<NameRow> = jsonl::parse_str(BUNDLED_NAMES).expect("bundled name table parses");
        let table = rows
            .into_iter()
            .map(|r| ((r.kind, r.name.to_lowercase()), (r.value, r.accuracy)))
            .collect();
        Self { table }
    }

    /// Names the table knows for a kind, sorted; handy for generating fixtures.
    pub fn known(&self, given: bool, value: &str) -> Vec<String> {
        let kind = if given { NameKind::Given } else { NameKind::Surname };
        let mut out: Vec<String> = self
            .table
            .iter()
            .filter(|((k, _), (v, _))| *k == kind && v == value)
            .map(|((_, n), _)| n.clone())
            .collect();
        out.sort();
        out
    }

    pub fn predict(&self, full_name: &str) -> Vec<PredictorOutput> {
        let tokens: Vec<String> = full_name
            .split_whitespace()
            .map(|t| t.trim_matches(|c: char| !c.is_alphabetic()).to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        let hit = |kind, token: Option<&String>| {
            token.and_then(|t| self.table.get(&(kind, t.clone())).cloned())
        };
        let mut out = Vec::with_capacity(2);
        let (value, accuracy) = hit(NameKind::Given, tokens.first()).unzip();
        out.push(PredictorOutput {
            source: PredictorSource::NameGender,
            attribute: PredictedAttribute::Gender,
            value,
            accuracy,
        });
        let surname = if tokens.len() > 1 { tokens.last() } else { None };
        let (value, accuracy) = hit(NameKind::Surname, surname).unzip();
        out.push(PredictorOutput {
            source: PredictorSource::NameDemographics,
            attribute: PredictedAttribute::Race,
            value,
            accuracy,
        });
        out
    }
}
