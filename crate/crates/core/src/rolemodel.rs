//! STEM role-model identification from industry and education fields.
//!
//! Industries fall into three groups. Anyone in a STEM industry qualifies;
//! anyone in a STEM-related industry qualifies only with at least one degree
//! in a listed STEM major. Everything else, including industries missing from
//! the taxonomy, is rejected.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::profiles::CandidateRecord;

const BUNDLED_TAXONOMY: &str = include_str!("../data/taxonomy.jsonl");
const BUNDLED_MAJORS: &str = include_str!("../data/majors.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndustryGroup {
    #[serde(rename = "STEM")]
    Stem,
    #[serde(rename = "STEM-related")]
    StemRelated,
    #[serde(rename = "non-STEM")]
    NonStem,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub industry: String,
    pub group: IndustryGroup,
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Industry name to group. Lookups ignore case and surrounding whitespace.
#[derive(Debug, Clone)]
pub struct IndustryTaxonomy {
    entries: Vec<TaxonomyEntry>,
    index: HashMap<String, IndustryGroup>,
}

impl IndustryTaxonomy {
    pub fn from_entries(entries: Vec<TaxonomyEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for e in &entries {
            if e.industry.trim().is_empty() {
                return Err(Error::Config("taxonomy entry with empty industry".into()));
            }
            if index.insert(fold(&e.industry), e.group).is_some() {
                return Err(Error::Config(format!(
                    "industry {:?} mapped more than once",
                    e.industry
                )));
            }
        }
        Ok(Self { entries, index })
    }

    /// The default 147-industry assignment shipped with the crate.
    pub fn bundled() -> Self {
        let entries = jsonl::parse_str(BUNDLED_TAXONOMY).expect("bundled taxonomy parses");
        Self::from_entries(entries).expect("bundled taxonomy is consistent")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_entries(jsonl::read_strict(path)?)
    }

    pub fn group(&self, industry: &str) -> Option<IndustryGroup> {
        self.index.get(&fold(industry)).copied()
    }

    pub fn entries(&self) -> &[TaxonomyEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Returns a copy with one industry moved to another group.
    pub fn with_group(&self, industry: &str, group: IndustryGroup) -> Self {
        let mut entries = self.entries.clone();
        match entries.iter_mut().find(|e| fold(&e.industry) == fold(industry)) {
            Some(e) => e.group = group,
            None => entries.push(TaxonomyEntry {
                industry: industry.to_owned(),
                group,
            }),
        }
        Self::from_entries(entries).expect("still one mapping per industry")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MajorEntry {
    pub major: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct StemMajorList {
    entries: Vec<MajorEntry>,
    /// folded name or alias -> canonical major
    index: HashMap<String, String>,
}

impl StemMajorList {
    pub fn from_entries(entries: Vec<MajorEntry>) -> Result<Self> {
        let mut index = HashMap::new();
        for e in &entries {
            for name in std::iter::once(&e.major).chain(&e.aliases) {
                if name.trim().is_empty() {
                    return Err(Error::Config(format!("empty alias for major {:?}", e.major)));
                }
                if let Some(prev) = index.insert(fold(name), e.major.clone()) {
                    return Err(Error::Config(format!(
                        "{name:?} maps to both {prev:?} and {:?}",
                        e.major
                    )));
                }
            }
        }
        Ok(Self { entries, index })
    }

    pub fn bundled() -> Self {
        let entries = jsonl::parse_str(BUNDLED_MAJORS).expect("bundled majors parse");
        Self::from_entries(entries).expect("bundled majors are consistent")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_entries(jsonl::read_strict(path)?)
    }

    /// Canonical major for a degree subject, matched exactly up to case.
    pub fn resolve(&self, subject: &str) -> Option<&str> {
        self.index.get(&fold(subject)).map(String::as_str)
    }

    pub fn majors(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.major.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Reason {
    StemIndustry,
    StemRelatedWithDegree { major: String },
    StemRelatedWithoutDegree,
    NonStemIndustry,
    UnknownIndustry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub is_role_model: bool,
    #[serde(flatten)]
    pub reason: Reason,
}

pub fn is_role_model(
    candidate: &CandidateRecord,
    taxonomy: &IndustryTaxonomy,
    majors: &StemMajorList,
) -> Decision {
    let reason = match taxonomy.group(&candidate.industry) {
        None => Reason::UnknownIndustry,
        Some(IndustryGroup::Stem) => Reason::StemIndustry,
        Some(IndustryGroup::NonStem) => Reason::NonStemIndustry,
        Some(IndustryGroup::StemRelated) => candidate
            .education_majors
            .iter()
            .find_map(|m| majors.resolve(m))
            .map_or(Reason::StemRelatedWithoutDegree, |major| {
                Reason::StemRelatedWithDegree {
                    major: major.to_owned(),
                }
            }),
    };
    Decision {
        is_role_model: matches!(
            reason,
            Reason::StemIndustry | Reason::StemRelatedWithDegree { .. }
        ),
        reason,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSummary {
    pub stem: usize,
    pub related_with_degree: usize,
    pub related_without_degree: usize,
    pub non_stem: usize,
    pub unknown_industry: usize,
}

impl FilterSummary {
    pub fn accepted(&self) -> usize {
        self.stem + self.related_with_degree
    }
}

/// Keeps the role models, in input order.
pub fn filter_role_models<'a>(
    candidates: &'a [CandidateRecord],
    taxonomy: &IndustryTaxonomy,
    majors: &StemMajorList,
) -> (Vec<&'a CandidateRecord>, FilterSummary) {
    let mut summary = FilterSummary::default();
    let kept = candidates
        .iter()
        .filter(|c| {
            let d = is_role_model(c, taxonomy, majors);
            match d.reason {
                Reason::StemIndustry => summary.stem += 1,
                Reason::StemRelatedWithDegree { .. } => summary.related_with_degree += 1,
                Reason::StemRelatedWithoutDegree => summary.related_without_degree += 1,
                Reason::NonStemIndustry => summary.non_stem += 1,
                Reason::UnknownIndustry => summary.unknown_industry += 1,
            }
            d.is_role_model
        })
        .collect();
    (kept, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cand(id: &str, industry: &str, majors: &[&str]) -> CandidateRecord {
        CandidateRecord {
            id: id.into(),
            full_name: "Test Person".into(),
            industry: industry.into(),
            education_majors: majors.iter().map(|s| s.to_string()).collect(),
            interests_raw: vec![],
            skills_raw: vec![],
            location_raw: "Rochester, NY".into(),
            predictor_outputs: vec![],
            profile_url: None,
        }
    }

    #[test]
    fn bundled_data_sizes() {
        let tax = IndustryTaxonomy::bundled();
        assert_eq!(tax.len(), 147);
        assert_eq!(StemMajorList::bundled().len(), 38);
    }

    #[test]
    fn named_industry_groups() {
        let tax = IndustryTaxonomy::bundled();
        for (name, group) in [
            ("Biotechnology", IndustryGroup::Stem),
            ("Computer Software", IndustryGroup::Stem),
            ("Music", IndustryGroup::NonStem),
            ("Restaurants", IndustryGroup::NonStem),
            ("Financial services", IndustryGroup::StemRelated),
            ("Management consulting", IndustryGroup::StemRelated),
        ] {
            assert_eq!(tax.group(name), Some(group), "{name}");
        }
    }

    #[test]
    fn predicate_examples() {
        let (tax, majors) = (IndustryTaxonomy::bundled(), StemMajorList::bundled());
        let d = is_role_model(&cand("a", "Computer Software", &[]), &tax, &majors);
        assert_eq!(d, Decision { is_role_model: true, reason: Reason::StemIndustry });

        let d = is_role_model(&cand("b", "Financial services", &["Computer Science"]), &tax, &majors);
        assert!(d.is_role_model);
        assert_eq!(d.reason, Reason::StemRelatedWithDegree { major: "Computer Science".into() });

        let d = is_role_model(&cand("c", "Music", &["Computer Science"]), &tax, &majors);
        assert_eq!(d, Decision { is_role_model: false, reason: Reason::NonStemIndustry });

        let d = is_role_model(&cand("d", "Banking", &["History"]), &tax, &majors);
        assert_eq!(d.reason, Reason::StemRelatedWithoutDegree);

        let d = is_role_model(&cand("e", "Basket Weaving", &["Physics"]), &tax, &majors);
        assert_eq!(d, Decision { is_role_model: false, reason: Reason::UnknownIndustry });
    }

    #[test]
    fn major_aliases_are_exact_not_fuzzy() {
        let majors = StemMajorList::bundled();
        assert_eq!(majors.resolve("comp sci"), Some("Computer Science"));
        assert_eq!(majors.resolve("  CS "), Some("Computer Science"));
        assert_eq!(majors.resolve("Computer Scienc"), None);
    }

    #[test]
    fn duplicate_mappings_rejected() {
        let dup = vec![
            TaxonomyEntry { industry: "Music".into(), group: IndustryGroup::NonStem },
            TaxonomyEntry { industry: "music".into(), group: IndustryGroup::Stem },
        ];
        assert!(IndustryTaxonomy::from_entries(dup).is_err());
        let dup = vec![
            MajorEntry { major: "Physics".into(), aliases: vec![] },
            MajorEntry { major: "Astro".into(), aliases: vec!["physics".into()] },
        ];
        assert!(StemMajorList::from_entries(dup).is_err());
    }

    #[test]
    fn filter_preserves_order_and_counts() {
        let (tax, majors) = (IndustryTaxonomy::bundled(), StemMajorList::bundled());
        let (kept, summary) = filter_role_models(&[], &tax, &majors);
        assert!(kept.is_empty());
        assert_eq!(summary, FilterSummary::default());

        let input = vec![
            cand("x", "Internet", &[]),
            cand("y", "Restaurants", &["Biology"]),
            cand("z", "Insurance", &["Statistics"]),
        ];
        let (kept, summary) = filter_role_models(&input, &tax, &majors);
        let ids: Vec<&str> = kept.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["x", "z"]);
        assert_eq!(summary.stem, 1);
        assert_eq!(summary.related_with_degree, 1);
        assert_eq!(summary.non_stem, 1);

        let all_non = vec![cand("p", "Music", &[]), cand("q", "Retail", &[])];
        let (kept, summary) = filter_role_models(&all_non, &tax, &majors);
        assert!(kept.is_empty());
        assert_eq!((summary.stem, summary.related_with_degree), (0, 0));
    }

    fn any_industry() -> impl Strategy<Value = String> {
        let names: Vec<String> = IndustryTaxonomy::bundled()
            .entries()
            .iter()
            .map(|e| e.industry.clone())
            .collect();
        proptest::sample::select(names)
    }

    proptest! {
        #[test]
        fn decision_ignores_unrelated_fields(
            industry in any_industry(),
            major in prop_oneof![Just("Physics"), Just("History"), Just("CS")],
            name in "[A-Za-z ]{0,12}",
            location in "[A-Za-z ,]{1,12}",
            skill in "[a-z]{0,8}",
        ) {
            let (tax, majors) = (IndustryTaxonomy::bundled(), StemMajorList::bundled());
            let base = cand("id", &industry, &[major]);
            let mut other = base.clone();
            other.full_name = name;
            other.location_raw = location;
            other.skills_raw = vec![skill.clone()];
            other.interests_raw = vec![skill];
            other.id = "other".into();
            prop_assert_eq!(
                is_role_model(&base, &tax, &majors),
                is_role_model(&other, &tax, &majors)
            );
        }

        #[test]
        fn promoting_an_industry_never_shrinks_the_set(
            promoted in any_industry(),
            picks in proptest::collection::vec((any_industry(), prop_oneof![Just("Physics"), Just("Art")]), 0..20),
        ) {
            let (tax, majors) = (IndustryTaxonomy::bundled(), StemMajorList::bundled());
            let promoted_tax = tax.with_group(&promoted, IndustryGroup::Stem);
            let cands: Vec<CandidateRecord> = picks
                .iter()
                .enumerate()
                .map(|(i, (ind, m))| cand(&i.to_string(), ind, &[m]))
                .collect();
            let before: Vec<&str> = filter_role_models(&cands, &tax, &majors).0.iter().map(|c| c.id.as_str()).collect();
            let after: Vec<&str> = filter_role_models(&cands, &promoted_tax, &majors).0.iter().map(|c| c.id.as_str()).collect();
            for id in before {
                prop_assert!(after.contains(&id));
            }
        }
    }
}
