//! Seeded synthetic population: college students, non-college users,
//! LinkedIn-style candidates and the matching ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attributes::NameLookup;
use crate::error::{Error, Result};
use crate::jsonl;
use crate::matcher::GroundTruthAnnotation;
use crate::profiles::{
    CandidateRecord, Gender, PredictedAttribute, PredictorOutput, PredictorSource, Race, StudentRecord, Tweet,
};
use crate::rolemodel::{is_role_model, IndustryGroup, IndustryTaxonomy, StemMajorList};
use crate::similarity::{lev_similarity, DEFAULT_FUZZY_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityWeight {
    pub city: String,
    pub state: String,
    pub weight: f64,
}

/// Per-student probability that an attribute is unobservable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Missingness {
    pub gender: f64,
    pub race: f64,
    pub location: f64,
    pub interests: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub students: usize,
    /// Includes the planted candidates.
    pub candidates: usize,
    pub non_college_users: usize,
    /// Share of college students whose bio carries no labeling cue.
    pub unlabeled_fraction: f64,
    pub cities: Vec<CityWeight>,
    pub gender_marginals: BTreeMap<Gender, f64>,
    pub race_marginals: BTreeMap<Race, f64>,
    /// Lowercase terms; students tweet them as hashtags with spaces removed.
    pub interest_vocabulary: Vec<String>,
    pub planted_fraction: f64,
    pub missingness: Missingness,
    pub tweets_per_user: usize,
    pub student_interests: (usize, usize),
    pub candidate_interests: (usize, usize),
}

const DEFAULT_CITIES: [(&str, &str, f64); 20] = [
    ("San Francisco", "CA", 2.0),
    ("New York City", "NY", 2.0),
    ("Atlanta", "GA", 2.0),
    ("Los Angeles", "CA", 2.0),
    ("Dallas", "TX", 2.0),
    ("Chicago", "IL", 2.0),
    ("Washington D.C.", "DC", 2.0),
    ("Boston", "MA", 2.0),
    ("Seattle", "WA", 2.0),
    ("Houston", "TX", 2.0),
    ("Rochester", "NY", 1.0),
    ("Austin", "TX", 1.0),
    ("Round Rock", "TX", 1.0),
    ("Buffalo", "NY", 1.0),
    ("McAllen", "TX", 1.0),
    ("Denver", "CO", 1.0),
    ("Phoenix", "AZ", 1.0),
    ("Miami", "FL", 1.0),
    ("Portland", "OR", 1.0),
    ("Pittsburgh", "PA", 1.0),
];

const DEFAULT_VOCABULARY: [&str; 48] = [
    "machine learning",
    "computer science",
    "data science",
    "web development",
    "robotics",
    "cybersecurity",
    "astronomy",
    "chemistry",
    "neuroscience",
    "genetics",
    "renewable energy",
    "electric vehicles",
    "3d printing",
    "virtual reality",
    "open source",
    "mobile apps",
    "game design",
    "statistics",
    "mathematics",
    "climate change",
    "marine biology",
    "aerospace",
    "nanotechnology",
    "blockchain",
    "photography",
    "rock climbing",
    "soccer",
    "basketball",
    "tennis",
    "yoga",
    "hiking",
    "cooking",
    "painting",
    "poetry",
    "jazz",
    "anime",
    "chess",
    "volunteering",
    "sustainability",
    "fashion",
    "film",
    "travel",
    "skateboarding",
    "podcasts",
    "gardening",
    "dance",
    "running",
    "theater",
];

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            students: 1000,
            candidates: 5000,
            non_college_users: 500,
            unlabeled_fraction: 0.3,
            cities: DEFAULT_CITIES
                .iter()
                .map(|&(city, state, weight)| CityWeight {
                    city: city.into(),
                    state: state.into(),
                    weight,
                })
                .collect(),
            gender_marginals: [(Gender::Female, 0.5), (Gender::Male, 0.5)].into(),
            race_marginals: [
                (Race::White, 0.45),
                (Race::Black, 0.15),
                (Race::Asian, 0.2),
                (Race::Api, 0.05),
                (Race::Hispanic, 0.15),
            ]
            .into(),
            interest_vocabulary: DEFAULT_VOCABULARY.iter().map(|s| (*s).to_owned()).collect(),
            planted_fraction: 0.5,
            missingness: Missingness {
                gender: 0.05,
                race: 0.1,
                location: 0.2,
                interests: 0.1,
            },
            tweets_per_user: 30,
            student_interests: (2, 5),
            candidate_interests: (3, 6),
        }
    }
}

fn probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be in [0, 1], got {p}")))
    }
}

fn weights<'a>(name: &str, w: impl Iterator<Item = &'a f64>) -> Result<WeightedIndex<f64>> {
    let w: Vec<f64> = w.copied().collect();
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Config(format!("{name}: weights must be finite and non-negative")));
    }
    WeightedIndex::new(w).map_err(|e| Error::Config(format!("{name}: {e}")))
}

fn range(name: &str, (lo, hi): (usize, usize), cap: usize) -> Result<()> {
    if lo == 0 || lo > hi || hi > cap {
        return Err(Error::Config(format!(
            "{name} must satisfy 1 <= min <= max <= {cap}, got ({lo}, {hi})"
        )));
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        probability("planted_fraction", self.planted_fraction)?;
        probability("unlabeled_fraction", self.unlabeled_fraction)?;
        let m = &self.missingness;
        for (name, p) in [
            ("missingness.gender", m.gender),
            ("missingness.race", m.race),
            ("missingness.location", m.location),
            ("missingness.interests", m.interests),
        ] {
            probability(name, p)?;
        }
        if self.interest_vocabulary.iter().all(|t| hashtag_form(t).is_empty()) {
            return Err(Error::Config("interest vocabulary is empty".into()));
        }
        if self.cities.is_empty() {
            return Err(Error::Config("city list is empty".into()));
        }
        if self.cities.iter().any(|c| c.city.trim().is_empty() || c.state.trim().is_empty()) {
            return Err(Error::Config("city entries need a city and a state".into()));
        }
        weights("cities", self.cities.iter().map(|c| &c.weight))?;
        weights("gender_marginals", self.gender_marginals.values())?;
        weights("race_marginals", self.race_marginals.values())?;
        if self.tweets_per_user == 0 {
            return Err(Error::Config("tweets_per_user must be positive".into()));
        }
        let vocab = self.vocabulary().len();
        range("student_interests", self.student_interests, vocab)?;
        range("candidate_interests", self.candidate_interests, vocab)?;
        if self.planted_count() > self.candidates {
            return Err(Error::Config(format!(
                "{} planted candidates do not fit in {} candidates",
                self.planted_count(),
                self.candidates
            )));
        }
        Ok(())
    }

    pub fn planted_count(&self) -> usize {
        (self.planted_fraction * self.students as f64).round() as usize
    }

    fn vocabulary(&self) -> Vec<String> {
        let set: BTreeSet<String> = self
            .interest_vocabulary
            .iter()
            .map(|t| t.trim().to_lowercase())
            .filter(|t| !hashtag_form(t).is_empty())
            .collect();
        set.into_iter().collect()
    }
}

fn hashtag_form(term: &str) -> String {
    term.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase()
}

/// How a planted candidate lists a shared interest: the vocabulary term when it
/// stays fuzzy-equal to the student's hashtag, otherwise the hashtag itself.
fn planted_term(term: &str) -> String {
    let tag = hashtag_form(term);
    if lev_similarity(&tag, term) >= DEFAULT_FUZZY_THRESHOLD {
        term.to_owned()
    } else {
        tag
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    /// College students followed by non-college users.
    pub students: Vec<StudentRecord>,
    pub candidates: Vec<CandidateRecord>,
    /// One annotation per student, user and candidate.
    pub annotations: Vec<GroundTruthAnnotation>,
}

#[derive(Debug, Clone)]
pub struct SynthPaths {
    pub students: PathBuf,
    pub candidates: PathBuf,
    pub annotations: PathBuf,
}

impl SynthData {
    pub fn write_to(&self, dir: &Path) -> Result<SynthPaths> {
        let paths = SynthPaths {
            students: dir.join("students.jsonl"),
            candidates: dir.join("candidates.jsonl"),
            annotations: dir.join("gt.jsonl"),
        };
        jsonl::write(&paths.students, &self.students)?;
        jsonl::write(&paths.candidates, &self.candidates)?;
        jsonl::write(&paths.annotations, &self.annotations)?;
        Ok(paths)
    }
}

const FILLER: [&str; 16] = [
    "just finished a long run",
    "coffee first then everything else",
    "cannot believe this weather today",
    "new playlist is on repeat",
    "weekend plans loading",
    "this sunset though",
    "trying a new recipe tonight",
    "anyone else watching the game",
    "need more sleep",
    "great conversation today",
    "finally some sunshine",
    "that movie was wild",
    "long day but worth it",
    "pizza night",
    "who else is up this early",
    "road trip soon",
];
const EMOJI: [char; 8] = ['😂', '😍', '🔥', '🎉', '🙌', '🚀', '🤔', '🌞'];
const LAUGHS: [&str; 4] = ["HAHA", "HAHAHA", "LOL", "LOOOL"];
const GENERIC_TAGS: [&str; 5] = ["#tbt", "#mondaymotivation", "#blessed", "#news", "#gameday"];
const COLLEGE_BIOS: [&str; 8] = [
    "cs major at {city} university",
    "class of 2022",
    "#classof2021 | coffee addict",
    "college student figuring it out",
    "majoring in biology and minoring in naps",
    "university '21",
    "sophomore year, send snacks",
    "undergrad student at state university",
];
const NEUTRAL_BIOS: [&str; 6] = [
    "coffee and good music",
    "living in {city}",
    "just here for the memes",
    "dog person",
    "sunsets and playlists",
    "trying my best",
];
const NON_COLLEGE_BIOS: [&str; 7] = [
    "proud dad of two",
    "manager of operations in {city}",
    "father, runner, coffee snob",
    "retired teacher",
    "director of marketing",
    "senior engineer at a startup",
    "mother of three and small business owner",
];
const NON_STEM_MAJORS: [&str; 6] = [
    "History",
    "English",
    "Business Administration",
    "Psychology",
    "Communications",
    "Art History",
];

struct Person {
    gender: Gender,
    race: Race,
    city: usize,
}

struct Sampler<'a> {
    config: &'a SynthConfig,
    rng: ChaCha8Rng,
    vocabulary: Vec<String>,
    genders: Vec<Gender>,
    gender_index: WeightedIndex<f64>,
    races: Vec<Race>,
    race_index: WeightedIndex<f64>,
    city_index: WeightedIndex<f64>,
    names: NameLookup,
}

impl Sampler<'_> {
    fn person(&mut self) -> Person {
        Person {
            gender: self.genders[self.gender_index.sample(&mut self.rng)],
            race: self.races[self.race_index.sample(&mut self.rng)],
            city: self.city_index.sample(&mut self.rng),
        }
    }

    fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.gen_bool(p)
    }

    fn pick<'b>(&mut self, items: &'b [&'b str]) -> &'b str {
        items.choose(&mut self.rng).copied().unwrap_or_default()
    }

    fn name(&mut self, p: &Person) -> String {
        let given = self.names.known(true, p.gender.as_str());
        let surnames = self.names.known(false, p.race.as_str());
        let given = given.choose(&mut self.rng).map_or("alex", String::as_str);
        let surname = surnames.choose(&mut self.rng).map_or("smith", String::as_str);
        format!("{} {}", capitalize(given), capitalize(surname))
    }

    fn interests(&mut self, (lo, hi): (usize, usize)) -> Vec<String> {
        let n = self.rng.gen_range(lo..=hi);
        let mut picked: Vec<usize> = index::sample(&mut self.rng, self.vocabulary.len(), n).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| self.vocabulary[i].clone()).collect()
    }

    fn location(&mut self, p: &Person) -> String {
        let c = &self.config.cities[p.city];
        if self.chance(0.3) {
            format!("{} {}", c.city.to_lowercase(), c.state.to_lowercase())
        } else {
            format!("{}, {}", c.city, c.state)
        }
    }

    fn fill_bio(&mut self, templates: &[&str], p: &Person) -> String {
        self.pick(templates).replace("{city}", &self.config.cities[p.city].city)
    }

    /// Tweets newest first. Every tag appears at least once when there is room.
    fn tweets(&mut self, tags: &[String], college: bool) -> Vec<Tweet> {
        // College users laugh and use emoji more; other users hashtag more.
        let (p_emoji, p_laugh, p_tag) = if college { (0.4, 0.25, 0.05) } else { (0.1, 0.03, 0.35) };
        let n = self.config.tweets_per_user;
        let mut tweets = Vec::with_capacity(n);
        for i in 0..n {
            let mut text = self.pick(&FILLER).to_owned();
            let tag = if i < tags.len() {
                Some(tags[i].clone())
            } else if self.chance(p_tag) {
                if college && !tags.is_empty() {
                    tags.choose(&mut self.rng).cloned()
                } else if !college {
                    Some(self.pick(&GENERIC_TAGS).trim_start_matches('#').to_owned())
                } else {
                    None
                }
            } else {
                None
            };
            if let Some(tag) = tag {
                text.push_str(" #");
                text.push_str(&tag);
            }
            if self.chance(p_laugh) {
                text.push(' ');
                text.push_str(self.pick(&LAUGHS));
            }
            if self.chance(p_emoji) {
                text.push(' ');
                text.push(*EMOJI.choose(&mut self.rng).expect("non-empty"));
            }
            if self.chance(0.2) {
                text = format!("RT @friend{}: {text}", self.rng.gen_range(1..100));
            }
            tweets.push(Tweet::Text(text));
        }
        tweets.shuffle(&mut self.rng);
        tweets
    }

    fn predictors(&mut self, p: &Person, gender_known: bool, race_known: bool) -> Vec<PredictorOutput> {
        let out = |source, attribute, value: Option<String>, accuracy: f64| PredictorOutput {
            source,
            attribute,
            accuracy: value.as_ref().map(|_| (accuracy * 1000.0).round() / 1000.0),
            value,
        };
        let wrong_race = {
            let others: Vec<Race> = Race::ALL.into_iter().filter(|r| *r != p.race).collect();
            *others.choose(&mut self.rng).expect("five races")
        };
        let (a1, a2, a3, a4) = (
            self.rng.gen_range(0.85..0.99),
            self.rng.gen_range(0.5..0.8),
            self.rng.gen_range(0.7..0.95),
            self.rng.gen_range(0.3..0.65),
        );
        let face_gender = if self.chance(0.8) { p.gender } else { other_gender(p.gender) };
        let known = |k: bool, v: &str| k.then(|| v.to_owned());
        vec![
            out(PredictorSource::NameGender, PredictedAttribute::Gender, known(gender_known, p.gender.as_str()), a1),
            out(PredictorSource::Face, PredictedAttribute::Gender, known(gender_known, face_gender.as_str()), a2),
            out(PredictorSource::Face, PredictedAttribute::Race, known(race_known, p.race.as_str()), a3),
            out(PredictorSource::NameDemographics, PredictedAttribute::Race, known(race_known, wrong_race.as_str()), a4),
        ]
    }
}

fn other_gender(g: Gender) -> Gender {
    match g {
        Gender::Female => Gender::Male,
        Gender::Male => Gender::Female,
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    chars
        .next()
        .map(|c| c.to_uppercase().chain(chars).collect())
        .unwrap_or_default()
}

fn title_case(term: &str) -> String {
    term.split(' ').map(capitalize).collect::<Vec<_>>().join(" ")
}

struct CandidateSpec {
    person: Person,
    industry: String,
    major: String,
    interests: Vec<String>,
    planted_for: Option<usize>,
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let taxonomy = IndustryTaxonomy::bundled();
    let majors = StemMajorList::bundled();
    let genders: Vec<Gender> = config.gender_marginals.keys().copied().collect();
    let races: Vec<Race> = config.race_marginals.keys().copied().collect();
    let mut s = Sampler {
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        vocabulary: config.vocabulary(),
        gender_index: weights("gender_marginals", config.gender_marginals.values())?,
        genders,
        race_index: weights("race_marginals", config.race_marginals.values())?,
        races,
        city_index: weights("cities", config.cities.iter().map(|c| &c.weight))?,
        names: NameLookup::bundled(),
    };

    let mut students = Vec::with_capacity(config.students + config.non_college_users);
    let mut annotations = Vec::new();
    let mut people = Vec::with_capacity(config.students);
    let mut student_interests = Vec::with_capacity(config.students);
    for i in 0..config.students {
        let p = s.person();
        let m = config.missingness;
        let gender_known = !s.chance(m.gender);
        let race_known = !s.chance(m.race);
        let location_known = !s.chance(m.location);
        let interests_known = !s.chance(m.interests);
        let interests = s.interests(config.student_interests);
        let tags: Vec<String> = if interests_known {
            interests.iter().map(|t| hashtag_form(t)).collect()
        } else {
            Vec::new()
        };
        let bio = if s.chance(config.unlabeled_fraction) {
            s.fill_bio(&NEUTRAL_BIOS, &p)
        } else {
            s.fill_bio(&COLLEGE_BIOS, &p)
        };
        let id = format!("s{:05}", i + 1);
        let city = &config.cities[p.city];
        students.push(StudentRecord {
            id: id.clone(),
            tweets: s.tweets(&tags, true),
            bio,
            display_name: s.name(&p),
            location_raw: if location_known { s.location(&p) } else { String::new() },
            predictor_outputs: s.predictors(&p, gender_known, race_known),
        });
        annotations.push(GroundTruthAnnotation {
            subject_id: id,
            gender: gender_known.then_some(p.gender),
            race: race_known.then_some(p.race),
            city: location_known.then(|| city.city.clone()),
            state: location_known.then(|| city.state.clone()),
            is_stem_role_model: None,
            planted: Vec::new(),
        });
        people.push(p);
        student_interests.push(interests);
    }

    for i in 0..config.non_college_users {
        let p = s.person();
        let id = format!("u{:05}", i + 1);
        let city = &config.cities[p.city];
        students.push(StudentRecord {
            id: id.clone(),
            tweets: s.tweets(&[], false),
            bio: s.fill_bio(&NON_COLLEGE_BIOS, &p),
            display_name: s.name(&p),
            location_raw: s.location(&p),
            predictor_outputs: s.predictors(&p, true, true),
        });
        annotations.push(GroundTruthAnnotation {
            subject_id: id,
            gender: Some(p.gender),
            race: Some(p.race),
            city: Some(city.city.clone()),
            state: Some(city.state.clone()),
            is_stem_role_model: None,
            planted: Vec::new(),
        });
    }

    let stem_industries: Vec<&str> = taxonomy
        .entries()
        .iter()
        .filter(|e| e.group == IndustryGroup::Stem)
        .map(|e| e.industry.as_str())
        .collect();
    let all_industries: Vec<&str> = taxonomy.entries().iter().map(|e| e.industry.as_str()).collect();
    let stem_majors: Vec<&str> = majors.majors().collect();

    let mut planted_students: Vec<usize> = (0..config.students).collect();
    planted_students.shuffle(&mut s.rng);
    planted_students.truncate(config.planted_count());
    planted_students.sort_unstable();

    let mut specs = Vec::with_capacity(config.candidates);
    for &si in &planted_students {
        let own = &student_interests[si];
        let shared_n = s.rng.gen_range(own.len().div_ceil(2)..=own.len());
        let mut interests: Vec<String> = own
            .choose_multiple(&mut s.rng, shared_n)
            .map(|t| planted_term(t))
            .collect();
        let extra = s.rng.gen_range(0..=2);
        for t in s.interests((1, 2)).into_iter().take(extra) {
            if !own.contains(&t) {
                interests.push(t);
            }
        }
        let p = &people[si];
        specs.push(CandidateSpec {
            person: Person {
                gender: p.gender,
                race: p.race,
                city: p.city,
            },
            industry: s.pick(&stem_industries).to_owned(),
            major: s.pick(&stem_majors).to_owned(),
            interests,
            planted_for: Some(si),
        });
    }
    while specs.len() < config.candidates {
        let person = s.person();
        let major = if s.chance(0.5) { s.pick(&stem_majors) } else { s.pick(&NON_STEM_MAJORS) }.to_owned();
        let interests = s.interests(config.candidate_interests);
        specs.push(CandidateSpec {
            person,
            industry: s.pick(&all_industries).to_owned(),
            major,
            interests,
            planted_for: None,
        });
    }
    // Planted candidates get no id-order advantage in ties.
    specs.shuffle(&mut s.rng);

    let mut candidates = Vec::with_capacity(specs.len());
    for (j, spec) in specs.into_iter().enumerate() {
        let id = format!("c{:05}", j + 1);
        let p = &spec.person;
        let city = &config.cities[p.city];
        let record = CandidateRecord {
            id: id.clone(),
            full_name: s.name(p),
            industry: spec.industry,
            education_majors: vec![spec.major],
            interests_raw: spec.interests.iter().map(|t| title_case(t)).collect(),
            skills_raw: Vec::new(),
            location_raw: format!("{}, {}", city.city, city.state),
            predictor_outputs: s.predictors(p, true, true),
            profile_url: None,
        };
        if let Some(si) = spec.planted_for {
            annotations[si].planted.push(id.clone());
        }
        annotations.push(GroundTruthAnnotation {
            subject_id: id,
            gender: Some(p.gender),
            race: Some(p.race),
            city: Some(city.city.clone()),
            state: Some(city.state.clone()),
            is_stem_role_model: Some(is_role_model(&record, &taxonomy, &majors).is_role_model),
            planted: Vec::new(),
        });
        candidates.push(record);
    }

    Ok(SynthData {
        students,
        candidates,
        annotations,
    })
}
