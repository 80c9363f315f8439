//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stem_match::attributes::build_profile;
use stem_match::classifier::{cross_validate, FeatureVector, TrainConfig};
use stem_match::delivery::{generate_synthetic, run_pipeline, PipelineConfig, SynthConfig};
use stem_match::labeler::LabelClass;
use stem_match::matcher::{
    evaluate, match_corpus, rank, EvalLevel, GroundTruthAnnotation, MatchResult, RankedEntry,
};
use stem_match::profiles::{AttributeProfile, Gender, PersonProfile, Race};
use stem_match::rolemodel::{filter_role_models, IndustryTaxonomy, StemMajorList};
use stem_match::similarity::{
    combined_score, fuzzy_overlap, interest_similarity, lev_similarity, levenshtein, FuzzyThreshold,
    SimilarityBreakdown,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

// Oracles: written independently of the library code.

/// Edit distance by memoized recursion over (i, j) suffix positions.
fn lev_oracle(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), d);
        d
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

fn sim_oracle(a: &str, b: &str) -> f64 {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    (total - lev_oracle(&a, &b)) as f64 / total as f64
}

/// Largest one-to-one pairing, by trying every option for every left item.
fn matching_oracle(adj: &[Vec<bool>]) -> usize {
    fn go(adj: &[Vec<bool>], i: usize, used: &mut Vec<bool>) -> usize {
        if i == adj.len() {
            return 0;
        }
        let mut best = go(adj, i + 1, used);
        for j in 0..used.len() {
            if adj[i][j] && !used[j] {
                used[j] = true;
                best = best.max(1 + go(adj, i + 1, used));
                used[j] = false;
            }
        }
        best
    }
    let n_right = adj.first().map_or(0, Vec::len);
    go(adj, 0, &mut vec![false; n_right])
}

fn overlap_oracle(a: &BTreeSet<String>, b: &BTreeSet<String>, t: f64) -> usize {
    let adj: Vec<Vec<bool>> = a
        .iter()
        .map(|x| b.iter().map(|y| sim_oracle(x, y) >= t).collect())
        .collect();
    matching_oracle(&adj)
}

/// Mean of the present components in gender, race, location, interest order.
fn combined_oracle(s: &AttributeProfile, c: &AttributeProfile, t: f64) -> (f64, bool) {
    let cat = |x: Option<String>, y: Option<String>| match (x, y) {
        (Some(x), Some(y)) => Some(if x == y { 1.0 } else { 0.0 }),
        _ => None,
    };
    let parts = [
        cat(s.gender.map(|g| g.to_string()), c.gender.map(|g| g.to_string())),
        cat(s.race.map(|r| r.to_string()), c.race.map(|r| r.to_string())),
        match (&s.location, &c.location) {
            (Some(x), Some(y)) => Some(sim_oracle(x, y)),
            _ => None,
        },
        if s.interests.is_empty() || c.interests.is_empty() {
            None
        } else {
            let m = overlap_oracle(&s.interests, &c.interests, t);
            Some(m as f64 / (s.interests.len() + c.interests.len() - m) as f64)
        },
    ];
    let present: Vec<f64> = parts.into_iter().flatten().collect();
    if present.is_empty() {
        (0.0, true)
    } else {
        let mut sum = 0.0;
        for p in &present {
            sum += p;
        }
        (sum / present.len() as f64, false)
    }
}

// Criteria.

fn lev_spot_check() -> Outcome {
    let start = Instant::now();
    let got = lev_similarity("computersciencelife", "computer science");
    let elapsed = start.elapsed();
    let expected = 30.0 / 35.0;
    check((got - expected).abs() <= 1e-12, format!("got {got}, expected {expected}"))?;
    check(
        (sim_oracle("computersciencelife", "computer science") - expected).abs() <= 1e-12,
        "oracle disagrees with the spot value",
    )?;
    check(format!("{got:.2}") == "0.86", format!("{got} does not round to 0.86"))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("{got:.15} in {elapsed:?}"))
}

const ALPHABET: &[char] = &[
    'a', 'b', 'c', 'a', 'b', 'é', 'ß', 'Ω', 'ж', '中', '文', '😀', '🚀', ' ', '#', '\u{301}', 'Z',
];

fn random_string(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.1) {
                char::from_u32(rng.gen_range(0x20..0x3000)).unwrap_or('?')
            } else {
                *ALPHABET.choose(rng).unwrap()
            }
        })
        .collect()
}

fn edit_distance_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs: Vec<(String, String)> = (0..1000)
        .map(|_| (random_string(&mut rng, 12), random_string(&mut rng, 12)))
        .collect();
    let start = Instant::now();
    for (a, b) in &pairs {
        let got = levenshtein(a, b);
        let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let want = lev_oracle(&ca, &cb);
        check(got == want, format!("lev({a:?}, {b:?}) = {got}, oracle {want}"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("1000 pairs agree in {elapsed:?}"))
}

fn random_set(rng: &mut ChaCha8Rng, pool: &[&str], lo: usize, hi: usize) -> BTreeSet<String> {
    let n = rng.gen_range(lo..=hi);
    pool.choose_multiple(rng, n).map(|s| (*s).to_owned()).collect()
}

fn jaccard_degeneration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pool = [
        "coding", "codin", "robotics", "robots", "math", "maths", "art", "chess", "music", "ai", "physics", "bio",
    ];
    let exact = FuzzyThreshold::new(1.0).map_err(|e| e.to_string())?;
    for _ in 0..500 {
        let a = random_set(&mut rng, &pool, 1, 6);
        let b = random_set(&mut rng, &pool, 1, 6);
        let inter = a.intersection(&b).count();
        let union = a.union(&b).count();
        let classical = inter as f64 / union as f64;
        let got = interest_similarity(&a, &b, exact);
        check(got == Some(classical), format!("{a:?} vs {b:?}: {got:?} != {classical}"))?;
    }

    // Near-duplicate strings give dense fuzzy adjacency with real conflicts.
    let stems = ["science", "sciences", "scien", "coding", "codings", "code", "robot", "robots", "math"];
    let t = 0.8;
    let threshold = FuzzyThreshold::new(t).map_err(|e| e.to_string())?;
    let mut nontrivial = 0;
    for _ in 0..200 {
        let a = random_set(&mut rng, &stems, 0, 6);
        let b = random_set(&mut rng, &stems, 0, 6);
        let got = fuzzy_overlap(&a, &b, threshold);
        let want = overlap_oracle(&a, &b, t);
        check(got == want, format!("{a:?} vs {b:?}: m = {got}, exhaustive {want}"))?;
        nontrivial += usize::from(want > a.intersection(&b).count());
    }
    Ok(format!("500 exact Jaccard pairs; 200 matchings agree ({nontrivial} with fuzzy-only pairs)"))
}

fn random_profile(rng: &mut ChaCha8Rng) -> AttributeProfile {
    let locations = ["atlanta, ga", "atlanta ga", "austin, tx", "boston, ma", "dallas, tx"];
    let interests = ["coding", "codin", "robotics", "robots", "math", "chess", "art"];
    AttributeProfile {
        gender: rng.gen_bool(0.8).then(|| *Gender::ALL.choose(rng).unwrap()),
        race: rng.gen_bool(0.8).then(|| *Race::ALL[..2].choose(rng).unwrap()),
        location: rng.gen_bool(0.8).then(|| (*locations.choose(rng).unwrap()).to_owned()),
        interests: if rng.gen_bool(0.85) {
            random_set(rng, &interests, 1, 3)
        } else {
            BTreeSet::new()
        },
    }
}

fn ranking_oracle() -> Outcome {
    let t = FuzzyThreshold::default();
    let mut elapsed = Duration::ZERO;
    let mut ties = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut ids: Vec<usize> = (0..200).collect();
        ids.shuffle(&mut rng);
        let mut candidates: Vec<PersonProfile> = Vec::new();
        for (i, id) in ids.iter().enumerate() {
            // Every fourth candidate repeats an earlier profile to force ties.
            let profile = if i % 4 == 3 {
                candidates[rng.gen_range(0..i)].profile.clone()
            } else {
                random_profile(&mut rng)
            };
            candidates.push(PersonProfile {
                id: format!("c{id:03}"),
                profile,
            });
        }
        let k = if seed == 9 { 250 } else { 5 };
        for s in 0..50 {
            let student = PersonProfile {
                id: format!("s{s}"),
                profile: random_profile(&mut rng),
            };
            let start = Instant::now();
            let got = rank(&student, &candidates, k, t).map_err(|e| e.to_string())?;
            elapsed += start.elapsed();

            let mut all: Vec<(String, f64, bool)> = candidates
                .iter()
                .map(|c| {
                    let (score, no_signal) = combined_oracle(&student.profile, &c.profile, t.value());
                    (c.id.clone(), score, no_signal)
                })
                .collect();
            all.sort_by(|x, y| {
                x.2.cmp(&y.2)
                    .then(y.1.partial_cmp(&x.1).unwrap())
                    .then(x.0.cmp(&y.0))
            });
            all.truncate(k);
            ties += all.windows(2).filter(|w| w[0].1 == w[1].1).count();
            let got_rows: Vec<(String, f64, bool)> = got
                .ranked
                .iter()
                .map(|e| (e.candidate_id.clone(), e.breakdown.combined, e.breakdown.no_signal))
                .collect();
            check(
                got_rows == all,
                format!("seed {seed} student {s}: rank {got_rows:?} != oracle {all:?}"),
            )?;
        }
    }
    check(ties > 0, "fixtures produced no ties")?;
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("500 rankings agree, {ties} tied neighbours, rank() total {elapsed:?}"))
}

fn planted_recovery() -> Outcome {
    let config = SynthConfig {
        seed: 42,
        students: 1000,
        candidates: 5000,
        non_college_users: 0,
        planted_fraction: 1.0,
        missingness: Default::default(),
        ..SynthConfig::default()
    };
    let data = generate_synthetic(&config).map_err(|e| e.to_string())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let results = pool.install(|| {
        let (rolemodels, _) =
            filter_role_models(&data.candidates, &IndustryTaxonomy::bundled(), &StemMajorList::bundled());
        let students: Vec<PersonProfile> = data
            .students
            .iter()
            .map(|s| PersonProfile {
                id: s.id.clone(),
                profile: build_profile(s),
            })
            .collect();
        let rolemodels: Vec<PersonProfile> = rolemodels
            .iter()
            .map(|c| PersonProfile {
                id: c.id.clone(),
                profile: build_profile(*c),
            })
            .collect();
        match_corpus(&students, &rolemodels, 5, FuzzyThreshold::default())
    });
    let elapsed = start.elapsed();
    let results = results.map_err(|e| e.to_string())?;
    let planted: HashMap<&str, &str> = data
        .annotations
        .iter()
        .filter_map(|a| a.planted.first().map(|p| (a.subject_id.as_str(), p.as_str())))
        .collect();
    check(planted.len() == 1000, format!("{} students have a plant", planted.len()))?;
    let (mut top5, mut top1) = (0, 0);
    for r in &results {
        let plant = planted[r.student_id.as_str()];
        if let Some(pos) = r.ranked.iter().position(|e| e.candidate_id == plant) {
            top5 += 1;
            top1 += usize::from(pos == 0);
        }
    }
    let (r5, r1) = (top5 as f64 / 1000.0, top1 as f64 / 1000.0);
    let summary = format!("top-5 {r5:.3}, rank-1 {r1:.3}, single-threaded {elapsed:?}");
    check(r5 >= 0.95, format!("top-5 below 0.95: {summary}"))?;
    check(r1 >= 0.80, format!("rank-1 below 0.80: {summary}"))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(summary)
}

fn annotation(id: String, gender: Gender, city: &str, state: &str, stem: Option<bool>) -> GroundTruthAnnotation {
    GroundTruthAnnotation {
        subject_id: id,
        gender: Some(gender),
        race: Some(Race::Asian),
        city: Some(city.to_owned()),
        state: Some(state.to_owned()),
        is_stem_role_model: stem,
        planted: Vec::new(),
    }
}

fn accuracy_arithmetic() -> Outcome {
    // Students with exactly c correct (city level) matches in their top 5.
    let exact_counts = [(5usize, 100usize), (4, 100), (3, 150), (2, 190), (1, 300), (0, 1160)];
    let cities = [("Atlanta", "GA", "Savannah"), ("Rochester", "NY", "Buffalo")];
    let mut annotations = Vec::new();
    let mut results = Vec::new();
    let (mut city_at_least, mut state_at_least) = ([0usize; 5], [0usize; 5]);
    let mut in_top10 = 0;
    let mut sid = 0;
    for &(correct, students) in &exact_counts {
        for _ in 0..students {
            sid += 1;
            let (city, state, other_city) = cities[sid % 2];
            in_top10 += usize::from(city == "Atlanta");
            let student = format!("s{sid}");
            annotations.push(annotation(student.clone(), Gender::Female, city, state, None));
            // Every third student also gets a same-state, other-city match.
            let extra = correct < 5 && sid % 3 == 0;
            let mut ranked = Vec::new();
            for slot in 0..5 {
                let cid = format!("c{sid}_{slot}");
                let a = if slot < correct {
                    annotation(cid.clone(), Gender::Female, city, state, Some(true))
                } else if slot == correct && extra {
                    annotation(cid.clone(), Gender::Female, other_city, state, Some(true))
                } else if slot % 2 == 0 {
                    annotation(cid.clone(), Gender::Male, city, state, Some(true))
                } else {
                    annotation(cid.clone(), Gender::Female, city, state, Some(false))
                };
                annotations.push(a);
                ranked.push(RankedEntry {
                    candidate_id: cid,
                    breakdown: SimilarityBreakdown::from_components(Some(1.0), None, None, None),
                });
            }
            for slot in city_at_least.iter_mut().take(correct) {
                *slot += 1;
            }
            for slot in state_at_least.iter_mut().take(correct + usize::from(extra)) {
                *slot += 1;
            }
            results.push(MatchResult {
                student_id: student,
                ranked,
            });
        }
    }
    check(city_at_least[0] == 840, "fixture must have 840 students with a correct match")?;

    let top = vec!["Atlanta".to_owned()];
    let run = |level| evaluate(&results, &annotations, level, &top).map_err(|e| e.to_string());
    let city = run(EvalLevel::CityAll)?;
    let state = run(EvalLevel::StateAll)?;
    check(city.cohort_size == 2000, format!("cohort {}", city.cohort_size))?;
    check(city.accuracy[0] == 0.42, format!("n=1 city accuracy {}", city.accuracy[0]))?;
    for n in 0..5 {
        let want_city = city_at_least[n] as f64 / 2000.0;
        let want_state = state_at_least[n] as f64 / 2000.0;
        check(city.accuracy[n] == want_city, format!("city n={} {} != {want_city}", n + 1, city.accuracy[n]))?;
        check(state.accuracy[n] == want_state, format!("state n={} {} != {want_state}", n + 1, state.accuracy[n]))?;
    }
    let city10 = run(EvalLevel::CityTop10)?;
    let state10 = run(EvalLevel::StateTop10)?;
    check(city10.cohort_size == in_top10, format!("top-10 cohort {}", city10.cohort_size))?;
    for n in 0..5 {
        check(state.accuracy[n] >= city.accuracy[n], format!("state < city at n={}", n + 1))?;
        check(state10.accuracy[n] >= city10.accuracy[n], format!("top-10 state < city at n={}", n + 1))?;
    }
    check(state.accuracy[0] > city.accuracy[0], "fixture should separate state from city")?;
    Ok(format!(
        "city {:?}, state {:?}",
        city.accuracy, state.accuracy
    ))
}

fn class_bins(rng: &mut ChaCha8Rng, class: LabelClass) -> [u8; 4] {
    // College users: more emoji and laughter, fewer hashtags.
    let means = match class {
        LabelClass::College => [3.0, 1.0, 2.0],
        LabelClass::NonCollege => [1.0, 2.5, 0.5],
    };
    let mut draw = |mean: f64| {
        let noise: f64 = (0..4).map(|_| rng.gen_range(-1.0..1.0)).sum::<f64>();
        (mean + 1.2 * noise).round().clamp(0.0, 9.0) as u8
    };
    let (e, h, l) = (draw(means[0]), draw(means[1]), draw(means[2]));
    [e, h, l, rng.gen_range(0..10)]
}

fn noisy_set(seed: u64, n: usize) -> (Vec<FeatureVector>, Vec<LabelClass>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let class = if i % 2 == 0 { LabelClass::College } else { LabelClass::NonCollege };
        let [e, h, l, r] = class_bins(&mut rng, class);
        xs.push(FeatureVector::from_bins(e, h, l, Some(r)));
        ys.push(class);
    }
    (xs, ys)
}

fn classifier_sanity() -> Outcome {
    let cfg = TrainConfig::default();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..50 {
        xs.push(FeatureVector::from_bins(9, 9, 9, None));
        ys.push(LabelClass::College);
        xs.push(FeatureVector::from_bins(0, 0, 0, None));
        ys.push(LabelClass::NonCollege);
    }
    let separable = cross_validate(&xs, &ys, 10, &cfg).map_err(|e| e.to_string())?;
    check(separable == 1.0, format!("separable CV {separable}"))?;

    let (xs, mut ys) = noisy_set(1, 1000);
    ys.shuffle(&mut ChaCha8Rng::seed_from_u64(77));
    let shuffled = cross_validate(&xs, &ys, 10, &cfg).map_err(|e| e.to_string())?;
    check((shuffled - 0.5).abs() <= 0.1, format!("shuffled-label CV {shuffled}"))?;

    let (mut without, mut with) = (0.0, 0.0);
    for seed in 0..20u64 {
        let (xs, ys) = noisy_set(1000 + seed, 400);
        let base = TrainConfig { seed, ..cfg };
        let retweet = TrainConfig {
            with_retweet: true,
            ..base
        };
        without += cross_validate(&xs, &ys, 10, &base).map_err(|e| e.to_string())? / 20.0;
        with += cross_validate(&xs, &ys, 10, &retweet).map_err(|e| e.to_string())? / 20.0;
    }
    check(with <= without, format!("retweet raised mean CV: {with:.4} > {without:.4}"))?;
    Ok(format!(
        "separable {separable}, shuffled {shuffled:.3}, mean CV without retweet {without:.4} vs with {with:.4}"
    ))
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = generate_synthetic(&SynthConfig::default()).map_err(|e| e.to_string())?;
    let paths = data.write_to(&tmp.path().join("data")).map_err(|e| e.to_string())?;
    let run_into = |name: &str| {
        let cfg = PipelineConfig {
            students: paths.students.clone(),
            candidates: paths.candidates.clone(),
            annotations: Some(paths.annotations.clone()),
            out_dir: tmp.path().join(name),
            ..PipelineConfig::default()
        };
        run_pipeline(&cfg, true).map_err(|e| e.to_string()).map(|_| cfg.out_dir)
    };
    let a = run_into("a")?;
    let b = run_into("b")?;
    let (fa, fb) = (files_under(&a), files_under(&b));
    check(fa == fb, "artifact sets differ")?;
    let pages = fa.iter().filter(|p| p.starts_with("pages")).count();
    check(pages > 0, "no pages were written")?;
    for rel in &fa {
        let (x, y) = (std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap());
        check(x == y, format!("{} differs", rel.display()))?;
    }
    Ok(format!("{} files byte-identical ({pages} pages)", fa.len()))
}

fn missing_attribute_contract() -> Outcome {
    let t = FuzzyThreshold::default();
    let set = |xs: &[&str]| xs.iter().map(|s| (*s).to_owned()).collect::<BTreeSet<String>>();
    let student = AttributeProfile {
        gender: Some(Gender::Female),
        race: Some(Race::Black),
        location: Some("atlanta, ga".into()),
        interests: set(&["computersciencelife", "chess"]),
    };
    let candidates = [
        AttributeProfile {
            gender: Some(Gender::Female),
            race: Some(Race::Black),
            location: Some("atlanta ga".into()),
            interests: set(&["computer science", "robotics"]),
        },
        AttributeProfile {
            gender: Some(Gender::Male),
            race: Some(Race::Asian),
            location: Some("austin, tx".into()),
            interests: set(&["chess"]),
        },
        AttributeProfile {
            gender: Some(Gender::Female),
            race: None,
            location: None,
            interests: set(&["painting"]),
        },
        AttributeProfile {
            gender: Some(Gender::Male),
            race: Some(Race::Black),
            location: Some("atlanta, ga".into()),
            interests: BTreeSet::new(),
        },
    ];
    let mut stripped = student.clone();
    stripped.gender = None;
    let pool: Vec<PersonProfile> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| PersonProfile {
            id: format!("c{i}"),
            profile: c.clone(),
        })
        .collect();
    let ranked = rank(
        &PersonProfile {
            id: "s".into(),
            profile: stripped.clone(),
        },
        &pool,
        pool.len(),
        t,
    )
    .map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (i, c) in candidates.iter().enumerate() {
        let full = combined_score(&student, c, t);
        let without = combined_score(&stripped, c, t);
        check(without.gender.is_none(), format!("c{i}: gender still scored"))?;
        let rest: Vec<f64> = [full.race, full.location, full.interest].into_iter().flatten().collect();
        let mut sum = 0.0;
        for r in &rest {
            sum += r;
        }
        let want = sum / rest.len() as f64;
        check(without.combined == want, format!("c{i}: {} != mean {want}", without.combined))?;
        let (oracle, _) = combined_oracle(&stripped, c, t.value());
        check(oracle == want, format!("c{i}: oracle {oracle} != {want}"))?;
        let entry = ranked
            .ranked
            .iter()
            .find(|e| e.candidate_id == format!("c{i}"))
            .ok_or("candidate missing from ranking")?;
        check(entry.breakdown.combined == want, format!("c{i}: ranked score {}", entry.breakdown.combined))?;
        checked += 1;
    }
    // 1/3 of (race 1, location 20/21, interest 1/3) for the first fixture.
    let first = combined_score(&stripped, &candidates[0], t).combined;
    let by_hand = (1.0 + 20.0 / 21.0 + 1.0 / 3.0) / 3.0;
    check((first - by_hand).abs() <= 1e-12, format!("fixture 0: {first} vs {by_hand}"))?;
    Ok(format!("{checked} fixtures reduce to the mean of remaining components"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("lev-similarity spot check", lev_spot_check),
        ("edit-distance oracle", edit_distance_oracle),
        ("jaccard degeneration and matching count", jaccard_degeneration),
        ("ranking oracle", ranking_oracle),
        ("planted-match recovery", planted_recovery),
        ("accuracy arithmetic", accuracy_arithmetic),
        ("classifier sanity", classifier_sanity),
        ("pipeline determinism", determinism),
        ("missing-attribute contract", missing_attribute_contract),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| (*s).to_owned()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
