//! Rule-based weak labeling of students as college or non-college.
//!
//! Rules are case-insensitive regular expressions, each voting for one class.
//! Every tweet and the bio are matched independently. A record matched only by
//! college rules is college (and vice versa); a record matched by both sides is
//! left unlabeled with the conflicting rules recorded.

use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::profiles::StudentRecord;

const BUNDLED_RULES: &str = include_str!("../data/rules.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelClass {
    College,
    NonCollege,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeakLabelValue {
    College,
    NonCollege,
    Unlabeled,
}

impl From<LabelClass> for WeakLabelValue {
    fn from(c: LabelClass) -> Self {
        match c {
            LabelClass::College => WeakLabelValue::College,
            LabelClass::NonCollege => WeakLabelValue::NonCollege,
        }
    }
}

impl WeakLabelValue {
    pub fn class(self) -> Option<LabelClass> {
        match self {
            WeakLabelValue::College => Some(LabelClass::College),
            WeakLabelValue::NonCollege => Some(LabelClass::NonCollege),
            WeakLabelValue::Unlabeled => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRule {
    pub pattern: String,
    pub label: LabelClass,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    rule: LabelRule,
    regex: Regex,
}

impl CompiledRule {
    fn name(&self) -> &str {
        if self.rule.description.is_empty() {
            &self.rule.pattern
        } else {
            &self.rule.description
        }
    }
}

/// A non-empty, compiled set of labeling rules.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<CompiledRule>,
}

impl RuleSet {
    pub fn compile(rules: Vec<LabelRule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::Config("rule set is empty".into()));
        }
        let rules = rules
            .into_iter()
            .map(|rule| {
                let regex = RegexBuilder::new(&rule.pattern)
                    .case_insensitive(true)
                    .build()
                    .map_err(|source| Error::Rule {
                        pattern: rule.pattern.clone(),
                        source,
                    })?;
                Ok(CompiledRule { rule, regex })
            })
            .collect::<Result<_>>()?;
        Ok(Self { rules })
    }

    pub fn bundled() -> Self {
        let rules = jsonl::parse_str(BUNDLED_RULES).expect("bundled rules parse");
        Self::compile(rules).expect("bundled rules compile")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::compile(jsonl::read_strict(path)?)
    }

    pub fn rules(&self) -> impl Iterator<Item = &LabelRule> {
        self.rules.iter().map(|r| &r.rule)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Outcome of rule matching for one record.
///
/// `matched_rules` is empty exactly when the value is unlabeled. When rules of
/// both classes fire, they all go to `conflicting_rules` instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakLabel {
    pub value: WeakLabelValue,
    pub matched_rules: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conflicting_rules: Vec<String>,
}

pub fn label_student(record: &StudentRecord, rules: &RuleSet) -> WeakLabel {
    let mut college = Vec::new();
    let mut non_college = Vec::new();
    let texts = || {
        record
            .tweets
            .iter()
            .map(|t| t.text())
            .chain(std::iter::once(record.bio.as_str()))
    };
    for rule in &rules.rules {
        if texts().any(|t| rule.regex.is_match(t)) {
            let bucket = match rule.rule.label {
                LabelClass::College => &mut college,
                LabelClass::NonCollege => &mut non_college,
            };
            bucket.push(rule.name().to_owned());
        }
    }
    match (college.is_empty(), non_college.is_empty()) {
        (true, true) => WeakLabel {
            value: WeakLabelValue::Unlabeled,
            matched_rules: vec![],
            conflicting_rules: vec![],
        },
        (false, true) => WeakLabel {
            value: WeakLabelValue::College,
            matched_rules: college,
            conflicting_rules: vec![],
        },
        (true, false) => WeakLabel {
            value: WeakLabelValue::NonCollege,
            matched_rules: non_college,
            conflicting_rules: vec![],
        },
        (false, false) => WeakLabel {
            value: WeakLabelValue::Unlabeled,
            matched_rules: vec![],
            conflicting_rules: college.into_iter().chain(non_college).collect(),
        },
    }
}

/// One line of `labels.jsonl`. `override` holds a manual correction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub id: String,
    #[serde(flatten)]
    pub label: WeakLabel,
    #[serde(rename = "override", default, skip_serializing_if = "Option::is_none")]
    pub manual_override: Option<WeakLabelValue>,
}

impl LabelRow {
    pub fn effective(&self) -> WeakLabelValue {
        self.manual_override.unwrap_or(self.label.value)
    }
}

/// Record ids split by weak label, each list in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    pub college: Vec<String>,
    pub non_college: Vec<String>,
    pub unlabeled: Vec<String>,
    pub rows: Vec<LabelRow>,
}

impl Partition {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.college.len(), self.non_college.len(), self.unlabeled.len())
    }
}

pub fn label_corpus(records: &[StudentRecord], rules: &RuleSet) -> Partition {
    use rayon::prelude::*;
    let rows: Vec<LabelRow> = records
        .par_iter()
        .map(|r| LabelRow {
            id: r.id.clone(),
            label: label_student(r, rules),
            manual_override: None,
        })
        .collect();
    let mut p = Partition::default();
    for row in &rows {
        let bucket = match row.label.value {
            WeakLabelValue::College => &mut p.college,
            WeakLabelValue::NonCollege => &mut p.non_college,
            WeakLabelValue::Unlabeled => &mut p.unlabeled,
        };
        bucket.push(row.id.clone());
    }
    p.rows = rows;
    p
}
