//! End-to-end batch run and the standalone stage entry points it is built from.
//!
//! Every stage reads and writes plain files, so each can be rerun on its own.
//! The pipeline records a digest of each stage's inputs and parameters in
//! `pipeline_state.json` and skips stages whose digest and outputs are intact.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::page::{generate_page, page_file_name, PageOptions};
use crate::attributes::{build_profile, build_profile_with_lookup, NameLookup, ProfileSource};
use crate::classifier::{classify_corpus, PredictionRow, TrainConfig};
use crate::error::{Error, Result};
use crate::jsonl;
use crate::labeler::{label_corpus, LabelClass, LabelRow, RuleSet};
use crate::matcher::{evaluate, match_corpus, AccuracyReport, EvalLevel, GroundTruthAnnotation, MatchResult};
use crate::matcher::{DEFAULT_K, DEFAULT_TOP_CITIES};
use crate::profiles::{load_candidates, load_profiles, load_students, CandidateRecord, PersonProfile};
use crate::rolemodel::{filter_role_models, IndustryTaxonomy, StemMajorList};
use crate::similarity::FuzzyThreshold;

pub const STATE_FILE: &str = "pipeline_state.json";
pub const LABELS_FILE: &str = "labels.jsonl";
pub const MODEL_FILE: &str = "model.txt";
pub const PREDICTED_FILE: &str = "predicted.jsonl";
pub const ROLEMODELS_FILE: &str = "rolemodels.jsonl";
pub const STUDENT_PROFILES_FILE: &str = "student_profiles.jsonl";
pub const ROLEMODEL_PROFILES_FILE: &str = "rolemodel_profiles.jsonl";
pub const MATCHES_FILE: &str = "matches.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const PAGES_DIR: &str = "pages";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub students: PathBuf,
    pub candidates: PathBuf,
    /// Ground truth; without it the evaluate stage is skipped.
    pub annotations: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub majors: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub k: usize,
    pub fuzzy_threshold: FuzzyThreshold,
    pub classifier: TrainConfig,
    pub folds: usize,
    /// Add the bundled name table as an extra predictor for role models.
    pub name_lookup: bool,
    pub pages: PageOptions,
    pub top_cities: Vec<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            students: PathBuf::new(),
            candidates: PathBuf::new(),
            annotations: None,
            rules: None,
            taxonomy: None,
            majors: None,
            out_dir: PathBuf::from("out"),
            k: DEFAULT_K,
            fuzzy_threshold: FuzzyThreshold::default(),
            classifier: TrainConfig::default(),
            folds: 10,
            name_lookup: false,
            pages: PageOptions::default(),
            top_cities: DEFAULT_TOP_CITIES.iter().map(|c| (*c).to_owned()).collect(),
        }
    }
}

impl PipelineConfig {
    /// Reads a JSON config; relative paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.students);
        resolve(&mut cfg.candidates);
        resolve(&mut cfg.out_dir);
        for p in [&mut cfg.annotations, &mut cfg.rules, &mut cfg.taxonomy, &mut cfg.majors]
            .into_iter()
            .flatten()
        {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.students.as_os_str().is_empty() || self.candidates.as_os_str().is_empty() {
            return Err(Error::Config("both `students` and `candidates` paths are required".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        Ok(())
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// What a stage run wants surfaced to the operator.
pub type Notes = Vec<String>;

fn rejected_notes<T>(what: &str, loaded: &crate::profiles::Loaded<T>, notes: &mut Notes) {
    for r in &loaded.rejected {
        notes.push(format!("skipped {what} {r}"));
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn label_stage(students: &Path, rules: &RuleSet, out: &Path) -> Result<Notes> {
    let loaded = load_students(students)?;
    let mut notes = Notes::new();
    rejected_notes("student", &loaded, &mut notes);
    let partition = label_corpus(&loaded.records, rules);
    let (c, n, u) = partition.counts();
    notes.push(format!("labels: {c} college, {n} non-college, {u} unlabeled"));
    jsonl::write(out, &partition.rows)?;
    Ok(notes)
}

pub fn classify_stage(
    students: &Path,
    labels: &Path,
    config: &TrainConfig,
    folds: usize,
    model_out: &Path,
    predicted_out: &Path,
) -> Result<Notes> {
    let loaded = load_students(students)?;
    let rows: Vec<LabelRow> = jsonl::read_strict(labels)?;
    let (model, predictions) = classify_corpus(&loaded.records, &rows, config, folds)?;
    let mut notes = Notes::new();
    if let Some(cv) = model.training_meta.cv_accuracy {
        notes.push(format!("classifier {folds}-fold CV accuracy {cv:.4}"));
    }
    write_text(model_out, &model.to_text())?;
    jsonl::write(predicted_out, &predictions)?;
    Ok(notes)
}

pub fn identify_stage(
    candidates: &Path,
    taxonomy: &IndustryTaxonomy,
    majors: &StemMajorList,
    out: &Path,
) -> Result<Notes> {
    let loaded = load_candidates(candidates, taxonomy)?;
    let mut notes = Notes::new();
    rejected_notes("candidate", &loaded, &mut notes);
    if !loaded.unknown_industry.is_empty() {
        notes.push(format!(
            "{} candidates have an industry outside the taxonomy",
            loaded.unknown_industry.len()
        ));
    }
    let (kept, summary) = filter_role_models(&loaded.records, taxonomy, majors);
    notes.push(format!("role models: {} of {}", summary.accepted(), loaded.records.len()));
    jsonl::write(out, kept)?;
    Ok(notes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Student,
    Candidate,
}

fn profiles_of<R: ProfileSource + Sync>(records: &[R], lookup: Option<&NameLookup>) -> Vec<PersonProfile> {
    records
        .par_iter()
        .map(|r| PersonProfile {
            id: r.id().to_owned(),
            profile: match lookup {
                Some(l) => build_profile_with_lookup(r, l),
                None => build_profile(r),
            },
        })
        .collect()
}

/// Builds attribute profiles. `keep`, when given, restricts students to those
/// ids; candidates are taken as they are.
pub fn attributes_stage(
    input: &Path,
    kind: RecordKind,
    keep: Option<&HashSet<String>>,
    lookup: Option<&NameLookup>,
    out: &Path,
) -> Result<Notes> {
    let mut notes = Notes::new();
    let profiles = match kind {
        RecordKind::Student => {
            let mut loaded = load_students(input)?;
            rejected_notes("student", &loaded, &mut notes);
            if let Some(keep) = keep {
                loaded.records.retain(|s| keep.contains(&s.id));
            }
            profiles_of(&loaded.records, lookup)
        }
        RecordKind::Candidate => {
            let loaded = load_candidates(input, &IndustryTaxonomy::bundled())?;
            rejected_notes("candidate", &loaded, &mut notes);
            profiles_of(&loaded.records, lookup)
        }
    };
    jsonl::write(out, &profiles)?;
    Ok(notes)
}

/// Ids the classify stage labeled college.
pub fn college_ids(predicted: &Path) -> Result<HashSet<String>> {
    let rows: Vec<PredictionRow> = jsonl::read_strict(predicted)?;
    Ok(rows
        .into_iter()
        .filter(|r| r.label == Some(LabelClass::College))
        .map(|r| r.id)
        .collect())
}

pub fn rank_stage(
    students: &Path,
    rolemodels: &Path,
    k: usize,
    threshold: FuzzyThreshold,
    out: &Path,
) -> Result<Notes> {
    let students = load_profiles(students)?;
    let rolemodels = load_profiles(rolemodels)?;
    let results = match_corpus(&students, &rolemodels, k, threshold)?;
    let no_signal = results.iter().filter(|r| r.no_signal()).count();
    let mut notes = vec![format!("ranked {} students against {} role models", results.len(), rolemodels.len())];
    if no_signal > 0 {
        notes.push(format!("{no_signal} students had no comparable attribute"));
    }
    jsonl::write(out, &results)?;
    Ok(notes)
}

pub fn read_annotations(path: &Path) -> Result<Vec<GroundTruthAnnotation>> {
    let rows: Vec<GroundTruthAnnotation> = jsonl::read_strict(path)?;
    for a in &rows {
        a.validate()
            .map_err(|message| Error::Config(format!("{}: {message}", path.display())))?;
    }
    Ok(rows)
}

pub fn evaluate_stage(
    matches: &Path,
    annotations: &Path,
    levels: &[EvalLevel],
    top_cities: &[String],
) -> Result<Vec<AccuracyReport>> {
    let results: Vec<MatchResult> = jsonl::read_strict(matches)?;
    let annotations = read_annotations(annotations)?;
    levels
        .iter()
        .map(|&level| evaluate(&results, &annotations, level, top_cities))
        .collect()
}

/// Pretty JSON with a trailing newline, the format of `report.json`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    write_text(path, &text)
}

/// Writes one page per student with at least one ranked role model. Stale
/// `.html` files in `dir` are removed first so the directory mirrors the input.
pub fn pages_stage(
    matches: &Path,
    students: &Path,
    rolemodels: &Path,
    options: &PageOptions,
    dir: &Path,
) -> Result<Notes> {
    let results: Vec<MatchResult> = jsonl::read_strict(matches)?;
    let students = load_students(students)?.records;
    let rolemodels: Vec<CandidateRecord> = jsonl::read_strict(rolemodels)?;
    let student_by_id: HashMap<&str, _> = students.iter().map(|s| (s.id.as_str(), s)).collect();
    let rolemodel_by_id: HashMap<&str, &CandidateRecord> = rolemodels.iter().map(|c| (c.id.as_str(), c)).collect();

    let pages: Vec<(String, String)> = results
        .par_iter()
        .filter(|r| !r.ranked.is_empty())
        .map(|r| {
            let html = generate_page(r, student_by_id.get(r.student_id.as_str()).copied(), &rolemodel_by_id, options)?;
            Ok((page_file_name(&r.student_id), html))
        })
        .collect::<Result<_>>()?;

    let mut names = HashSet::new();
    for (name, _) in &pages {
        if !names.insert(name) {
            return Err(Error::Config(format!("two students map to the page file {name}")));
        }
    }
    if dir.exists() {
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().is_some_and(|e| e == "html") {
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    pages
        .par_iter()
        .try_for_each(|(name, html)| write_text(&dir.join(name), html))?;
    Ok(vec![format!("wrote {} pages", pages.len())])
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOutcome {
    pub ran: Vec<&'static str>,
    pub skipped: Vec<&'static str>,
    pub notes: Notes,
    pub artifacts: Vec<PathBuf>,
}

struct Fingerprint(Sha256);

impl Fingerprint {
    fn new(stage: &str) -> Self {
        let mut h = Sha256::new();
        h.update(stage.as_bytes());
        Self(h)
    }

    fn bytes(mut self, tag: &str, data: &[u8]) -> Self {
        self.0.update((tag.len() as u64).to_le_bytes());
        self.0.update(tag.as_bytes());
        self.0.update((data.len() as u64).to_le_bytes());
        self.0.update(data);
        self
    }

    fn file(self, tag: &str, path: &Path) -> Result<Self> {
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(self.bytes(tag, &data))
    }

    fn optional_file(self, tag: &str, path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => self.file(tag, p),
            None => Ok(self.bytes(tag, b"bundled")),
        }
    }

    fn params<T: Serialize>(self, tag: &str, value: &T) -> Self {
        let json = serde_json::to_vec(value).expect("serializable parameters");
        self.bytes(tag, &json)
    }

    fn finish(self) -> String {
        self.0
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

struct Runner<'a> {
    state_path: PathBuf,
    state: BTreeMap<String, String>,
    force: bool,
    outcome: &'a mut PipelineOutcome,
}

impl Runner<'_> {
    /// Runs `body` unless the recorded fingerprint matches and every output exists.
    fn stage(
        &mut self,
        name: &'static str,
        fingerprint: impl FnOnce() -> Result<String>,
        outputs: &[PathBuf],
        body: impl FnOnce() -> Result<Notes>,
    ) -> Result<()> {
        let wrap = |e: Error| Error::Stage {
            stage: name,
            source: Box::new(e),
        };
        let digest = fingerprint().map_err(wrap)?;
        let fresh = !self.force
            && self.state.get(name) == Some(&digest)
            && outputs.iter().all(|p| p.exists());
        self.outcome.artifacts.extend(outputs.iter().cloned());
        if fresh {
            self.outcome.skipped.push(name);
            return Ok(());
        }
        // Forget the old digest first so a failed rerun is not mistaken for success.
        if self.state.remove(name).is_some() {
            self.save().map_err(wrap)?;
        }
        let notes = body().map_err(wrap)?;
        self.outcome.notes.extend(notes.into_iter().map(|n| format!("{name}: {n}")));
        self.outcome.ran.push(name);
        self.state.insert(name.to_owned(), digest);
        self.save().map_err(wrap)
    }

    fn save(&self) -> Result<()> {
        write_json(&self.state_path, &self.state)
    }
}

fn load_state(path: &Path) -> BTreeMap<String, String> {
    // An unreadable state file only costs a full rerun.
    fs::read_to_string(path)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default()
}

pub fn run_pipeline(config: &PipelineConfig, force: bool) -> Result<PipelineOutcome> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let mut outcome = PipelineOutcome::default();
    let state_path = config.out(STATE_FILE);
    let mut run = Runner {
        state: load_state(&state_path),
        state_path,
        force,
        outcome: &mut outcome,
    };

    let labels = config.out(LABELS_FILE);
    let model = config.out(MODEL_FILE);
    let predicted = config.out(PREDICTED_FILE);
    let rolemodels = config.out(ROLEMODELS_FILE);
    let student_profiles = config.out(STUDENT_PROFILES_FILE);
    let rolemodel_profiles = config.out(ROLEMODEL_PROFILES_FILE);
    let matches = config.out(MATCHES_FILE);
    let report = config.out(REPORT_FILE);
    let pages = config.out(PAGES_DIR);

    run.stage(
        "label",
        || {
            Ok(Fingerprint::new("label")
                .file("students", &config.students)?
                .optional_file("rules", config.rules.as_deref())?
                .finish())
        },
        std::slice::from_ref(&labels),
        || {
            let rules = match &config.rules {
                Some(p) => RuleSet::load(p)?,
                None => RuleSet::bundled(),
            };
            label_stage(&config.students, &rules, &labels)
        },
    )?;

    run.stage(
        "classify",
        || {
            Ok(Fingerprint::new("classify")
                .file("students", &config.students)?
                .file("labels", &labels)?
                .params("config", &(config.classifier, config.folds))
                .finish())
        },
        &[model.clone(), predicted.clone()],
        || classify_stage(&config.students, &labels, &config.classifier, config.folds, &model, &predicted),
    )?;

    run.stage(
        "identify",
        || {
            Ok(Fingerprint::new("identify")
                .file("candidates", &config.candidates)?
                .optional_file("taxonomy", config.taxonomy.as_deref())?
                .optional_file("majors", config.majors.as_deref())?
                .finish())
        },
        std::slice::from_ref(&rolemodels),
        || {
            let taxonomy = match &config.taxonomy {
                Some(p) => IndustryTaxonomy::load(p)?,
                None => IndustryTaxonomy::bundled(),
            };
            let majors = match &config.majors {
                Some(p) => StemMajorList::load(p)?,
                None => StemMajorList::bundled(),
            };
            identify_stage(&config.candidates, &taxonomy, &majors, &rolemodels)
        },
    )?;

    run.stage(
        "attributes",
        || {
            Ok(Fingerprint::new("attributes")
                .file("students", &config.students)?
                .file("predicted", &predicted)?
                .file("rolemodels", &rolemodels)?
                .params("name_lookup", &config.name_lookup)
                .finish())
        },
        &[student_profiles.clone(), rolemodel_profiles.clone()],
        || {
            let keep = college_ids(&predicted)?;
            let lookup = config.name_lookup.then(NameLookup::bundled);
            let mut notes = attributes_stage(&config.students, RecordKind::Student, Some(&keep), None, &student_profiles)?;
            notes.extend(attributes_stage(
                &rolemodels,
                RecordKind::Candidate,
                None,
                lookup.as_ref(),
                &rolemodel_profiles,
            )?);
            notes.push(format!("{} college students", keep.len()));
            Ok(notes)
        },
    )?;

    run.stage(
        "rank",
        || {
            Ok(Fingerprint::new("rank")
                .file("students", &student_profiles)?
                .file("rolemodels", &rolemodel_profiles)?
                .params("params", &(config.k, config.fuzzy_threshold))
                .finish())
        },
        std::slice::from_ref(&matches),
        || rank_stage(&student_profiles, &rolemodel_profiles, config.k, config.fuzzy_threshold, &matches),
    )?;

    if let Some(annotations) = &config.annotations {
        run.stage(
            "evaluate",
            || {
                Ok(Fingerprint::new("evaluate")
                    .file("matches", &matches)?
                    .file("annotations", annotations)?
                    .params("top_cities", &config.top_cities)
                    .finish())
            },
            std::slice::from_ref(&report),
            || {
                let reports = evaluate_stage(&matches, annotations, &EvalLevel::ALL, &config.top_cities)?;
                write_json(&report, &reports)?;
                Ok(reports
                    .iter()
                    .map(|r| {
                        let level = serde_json::to_value(r.level).expect("level serializes");
                        format!(
                            "{} accuracy at n=1: {:.4} over {} students",
                            level.as_str().unwrap_or_default(),
                            r.accuracy[0],
                            r.cohort_size
                        )
                    })
                    .collect())
            },
        )?;
    } else {
        run.outcome.notes.push("evaluate: skipped, no annotations configured".into());
    }

    run.stage(
        "pages",
        || {
            Ok(Fingerprint::new("pages")
                .file("matches", &matches)?
                .file("students", &config.students)?
                .file("rolemodels", &rolemodels)?
                .params("options", &config.pages)
                .finish())
        },
        std::slice::from_ref(&pages),
        || pages_stage(&matches, &config.students, &rolemodels, &config.pages, &pages),
    )?;

    Ok(outcome)
}
