use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use stem_match::attributes::NameLookup;
use stem_match::classifier::TrainConfig;
use stem_match::delivery::pipeline::{self, RecordKind};
use stem_match::delivery::{generate_synthetic, run_pipeline, PipelineConfig, SynthConfig};
use stem_match::labeler::RuleSet;
use stem_match::matcher::{EvalLevel, DEFAULT_K, DEFAULT_TOP_CITIES};
use stem_match::rolemodel::{IndustryTaxonomy, StemMajorList};
use stem_match::similarity::{FuzzyThreshold, DEFAULT_FUZZY_THRESHOLD};

#[derive(Parser)]
#[command(name = "stem-match", version, about = "Match college students with STEM role models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weakly label students as college or non-college with keyword rules.
    Label {
        #[arg(long)]
        students: PathBuf,
        /// Rule file; the bundled rules are used when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train on weak labels and label every student.
    Classify {
        /// Labels produced by `label`.
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        students: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the weight file; defaults to model.txt next to --out.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        with_retweet: bool,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lambda: f64,
    },
    /// Keep candidates that qualify as STEM role models.
    Identify {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long)]
        majors: Option<PathBuf>,
    },
    /// Resolve gender, race, location and interests.
    Attributes {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        out: PathBuf,
        /// Only keep students the classifier labeled college (predicted.jsonl).
        #[arg(long)]
        college_only: Option<PathBuf>,
        /// Add the bundled name table as an extra predictor.
        #[arg(long)]
        name_lookup: bool,
    },
    /// Rank the top-k role models for every student.
    Rank {
        #[arg(long)]
        students: PathBuf,
        #[arg(long)]
        rolemodels: PathBuf,
        #[arg(short, long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_FUZZY_THRESHOLD)]
        fuzzy_threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Matching accuracy against annotated ground truth.
    Evaluate {
        #[arg(long)]
        matches: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value = "city-all")]
        level: EvalLevel,
        /// Comma-separated cities for the top-10 levels.
        #[arg(long, value_delimiter = ',')]
        top_cities: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage from a JSON config, skipping stages that are up to date.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long)]
        fuzzy_threshold: Option<f64>,
        #[arg(long)]
        with_retweet: bool,
        /// Rerun every stage.
        #[arg(long)]
        force: bool,
    },
    /// Generate a seeded synthetic population.
    Synth {
        /// JSON config; defaults apply to omitted fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KindArg {
    Student,
    Candidate,
}

fn report(notes: &[String]) {
    for n in notes {
        eprintln!("{n}");
    }
}

fn threshold(value: f64) -> Result<FuzzyThreshold> {
    Ok(FuzzyThreshold::new(value)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Label { students, rules, out } => {
            let rules = match rules {
                Some(p) => RuleSet::load(&p)?,
                None => RuleSet::bundled(),
            };
            report(&pipeline::label_stage(&students, &rules, &out)?);
        }
        Command::Classify {
            train,
            students,
            out,
            model,
            with_retweet,
            folds,
            seed,
            epochs,
            lambda,
        } => {
            let config = TrainConfig {
                seed,
                epochs,
                lambda,
                with_retweet,
            };
            let model = model.unwrap_or_else(|| out.with_file_name(pipeline::MODEL_FILE));
            report(&pipeline::classify_stage(&students, &train, &config, folds, &model, &out)?);
        }
        Command::Identify {
            candidates,
            out,
            taxonomy,
            majors,
        } => {
            let taxonomy = match taxonomy {
                Some(p) => IndustryTaxonomy::load(&p)?,
                None => IndustryTaxonomy::bundled(),
            };
            let majors = match majors {
                Some(p) => StemMajorList::load(&p)?,
                None => StemMajorList::bundled(),
            };
            report(&pipeline::identify_stage(&candidates, &taxonomy, &majors, &out)?);
        }
        Command::Attributes {
            input,
            kind,
            out,
            college_only,
            name_lookup,
        } => {
            let kind = match kind {
                KindArg::Student => RecordKind::Student,
                KindArg::Candidate => RecordKind::Candidate,
            };
            let keep = college_only.map(|p| pipeline::college_ids(&p)).transpose()?;
            let lookup = name_lookup.then(NameLookup::bundled);
            report(&pipeline::attributes_stage(&input, kind, keep.as_ref(), lookup.as_ref(), &out)?);
        }
        Command::Rank {
            students,
            rolemodels,
            k,
            fuzzy_threshold,
            out,
        } => {
            anyhow::ensure!(k > 0, "k must be positive");
            report(&pipeline::rank_stage(&students, &rolemodels, k, threshold(fuzzy_threshold)?, &out)?);
        }
        Command::Evaluate {
            matches,
            annotations,
            level,
            top_cities,
            out,
        } => {
            let top = top_cities.unwrap_or_else(|| DEFAULT_TOP_CITIES.iter().map(|c| (*c).to_owned()).collect());
            let mut reports = pipeline::evaluate_stage(&matches, &annotations, &[level], &top)?;
            let report = reports.pop().expect("one level requested");
            pipeline::write_json(&out, &report)?;
            eprintln!(
                "accuracy by n: {:?} over {} students",
                report.accuracy, report.cohort_size
            );
        }
        Command::Pipeline {
            config,
            out_dir,
            k,
            fuzzy_threshold,
            with_retweet,
            force,
        } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            if let Some(k) = k {
                cfg.k = k;
            }
            if let Some(t) = fuzzy_threshold {
                cfg.fuzzy_threshold = threshold(t)?;
            }
            cfg.classifier.with_retweet |= with_retweet;
            let outcome = run_pipeline(&cfg, force)?;
            report(&outcome.notes);
            if !outcome.skipped.is_empty() {
                eprintln!("up to date: {}", outcome.skipped.join(", "));
            }
            eprintln!("artifacts in {}", cfg.out_dir.display());
        }
        Command::Synth { config, out_dir, seed } => {
            let mut cfg: SynthConfig = match config {
                Some(p) => read_json(&p)?,
                None => SynthConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let data = generate_synthetic(&cfg)?;
            let paths = data.write_to(&out_dir)?;
            eprintln!(
                "wrote {} students, {} candidates and {} annotations to {}",
                data.students.len(),
                data.candidates.len(),
                data.annotations.len(),
                paths.students.parent().unwrap_or(Path::new(".")).display()
            );
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
