//! Batch front end: corpus statistics, disambiguation, evaluation and
//! window-size sweeps.
//!
//! Exit codes: 0 on success, 1 when an input cannot be read or parsed,
//! 2 for invalid configuration (including clap usage errors).

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baselines::{
    build_frequency_table, build_salience, most_frequent_baseline, random_baseline, sussna_baseline, yarowsky_baseline,
    BaselineError, SussnaOptions, YAROWSKY_WINDOW,
};
use crate::corpus::{corpus_stats, extract_nouns, format_stats_table, parse_plain, parse_semcor, retain_in_vocabulary, CorpusError, NounStream};
use crate::density::{DensityParams, MarkCounting, NhypMode, DEFAULT_SMOOTHING_EXPONENT};
use crate::disambiguator::{
    disambiguate_document, format_assignment, read_assignments, AssignmentParseError, Assignment, DisambiguationOptions,
    Fallback, WindowError, DEFAULT_WINDOW,
};
use crate::evaluation::{compare, format_sweep, score, EvalError, EvalReport, Level, Population, ScoringMode};
use crate::taxonomy::{load_taxonomy, RelationMode, Taxonomy, TaxonomyError};

#[derive(Debug, Parser)]
#[command(name = "cdwsd", version, about = "Noun sense disambiguation by Conceptual Density")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-text word and noun counts.
    Stats(StatsArgs),
    /// Write one assignment line per noun.
    Disambiguate(RunArgs),
    /// Score a system (or an assignment file) against the gold tags.
    Evaluate(EvaluateArgs),
    /// Score a system once per window size.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Semcor,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Relations {
    #[value(name = "hyper")]
    Hyper,
    #[value(name = "hyper+mero")]
    HyperMero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NhypArg {
    Local,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FallbackArg {
    None,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    None,
    Random,
    Mfs,
    Yarowsky,
    Sussna,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Sense,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PopulationArg {
    All,
    Polysemous,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "semcor")]
    pub format: InputFormat,
    /// Window size in nouns; defaults to 30 (50 for yarowsky, 41 for sussna).
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, value_enum, default_value = "hyper")]
    pub relations: Relations,
    #[arg(long, value_enum, default_value = "global")]
    pub nhyp: NhypArg,
    #[arg(long, default_value_t = DEFAULT_SMOOTHING_EXPONENT, allow_negative_numbers = true)]
    pub exponent: f64,
    #[arg(long, value_enum, default_value = "none")]
    pub fallback: FallbackArg,
    /// Count every occurrence of a repeated lemma as separate marks.
    #[arg(long)]
    pub per_occurrence_marks: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "none")]
    pub baseline: Baseline,
    /// Gold-tagged SemCor training texts for mfs and yarowsky.
    #[arg(long, num_args = 1..)]
    pub train: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[arg(long, value_enum, default_value = "file")]
    pub level: LevelArg,
    #[arg(long, value_enum, default_value = "all")]
    pub population: PopulationArg,
    /// Count partial answers as answered, correct when gold is among them.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub scoring: ScoreArgs,
    /// Score this assignment file instead of running a system.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub scoring: ScoreArgs,
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25,30")]
    pub windows: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Taxonomy { path: PathBuf, source: TaxonomyError },
    #[error("{path}: {source}")]
    Corpus { path: PathBuf, source: CorpusError },
    #[error("{path}: {source}")]
    Assignments { path: PathBuf, source: AssignmentParseError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Eval(_) => 2,
            CliError::Baseline(BaselineError::EmptyTraining | BaselineError::MissingGold { .. } | BaselineError::Window(_)) => 2,
            _ => 1,
        }
    }
}

impl From<WindowError> for CliError {
    fn from(e: WindowError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Validated run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub taxonomy: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub format: InputFormat,
    pub window: Option<usize>,
    pub density: DensityParams,
    pub fallback: Fallback,
    pub seed: u64,
    pub baseline: Baseline,
    pub train: Vec<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        if args.window == Some(0) {
            return Err(CliError::Config("--window must be at least 1".into()));
        }
        let density = DensityParams {
            smoothing_exponent: args.exponent,
            nhyp_mode: match args.nhyp {
                NhypArg::Local => NhypMode::Local,
                NhypArg::Global => NhypMode::Global,
            },
            relation_mode: match args.relations {
                Relations::Hyper => RelationMode::HypernymyOnly,
                Relations::HyperMero => RelationMode::HypernymyPlusMeronymy,
            },
            mark_counting: if args.per_occurrence_marks {
                MarkCounting::PerOccurrence
            } else {
                MarkCounting::PerLemma
            },
        };
        density.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if matches!(args.baseline, Baseline::Mfs | Baseline::Yarowsky) && args.train.is_empty() {
            return Err(CliError::Config("--baseline mfs and yarowsky need --train".into()));
        }
        Ok(RunConfig {
            taxonomy: args.taxonomy.clone(),
            inputs: args.input.clone(),
            format: args.format,
            window: args.window,
            density,
            fallback: match args.fallback {
                FallbackArg::None => Fallback::None,
                FallbackArg::Random => Fallback::Random,
            },
            seed: args.seed,
            baseline: args.baseline,
            train: args.train.clone(),
            out: args.out.clone(),
        })
    }

    /// Window used by the selected system unless overridden.
    pub fn effective_window(&self) -> usize {
        self.window.unwrap_or(match self.baseline {
            Baseline::Yarowsky => YAROWSKY_WINDOW,
            Baseline::Sussna => SussnaOptions::default().window,
            _ => DEFAULT_WINDOW,
        })
    }

    pub fn method_name(&self) -> &'static str {
        match (self.baseline, self.fallback) {
            (Baseline::None, Fallback::None) => "cd",
            (Baseline::None, Fallback::Random) => "cd+fallback",
            (Baseline::Random, _) => "random",
            (Baseline::Mfs, _) => "mfs",
            (Baseline::Yarowsky, _) => "yarowsky",
            (Baseline::Sussna, _) => "sussna",
        }
    }
}

fn scoring(args: &ScoreArgs) -> (Level, Population, ScoringMode) {
    (
        match args.level {
            LevelArg::Sense => Level::Sense,
            LevelArg::File => Level::File,
        },
        match args.population {
            PopulationArg::All => Population::All,
            PopulationArg::Polysemous => Population::PolysemousOnly,
        },
        if args.lenient {
            ScoringMode::Lenient
        } else {
            ScoringMode::Strict
        },
    )
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_taxonomy_file(path: &Path, mode: RelationMode) -> Result<Taxonomy, CliError> {
    load_taxonomy(open(path)?, mode).map_err(|source| CliError::Taxonomy {
        path: path.to_path_buf(),
        source,
    })
}

fn document_id(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn read_semcor(path: &Path) -> Result<crate::corpus::Document, CliError> {
    parse_semcor(open(path)?, document_id(path)).map_err(|source| CliError::Corpus {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads each input into its in-vocabulary noun stream.
pub fn load_streams(paths: &[PathBuf], format: InputFormat, t: &Taxonomy) -> Result<Vec<NounStream>, CliError> {
    paths
        .iter()
        .map(|path| match format {
            InputFormat::Semcor => Ok(extract_nouns(&read_semcor(path)?, t)),
            InputFormat::Plain => {
                let nouns = parse_plain(open(path)?).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                let (nouns, dropped) = retain_in_vocabulary(nouns, t);
                Ok(NounStream {
                    id: document_id(path),
                    nouns,
                    gold: Vec::new(),
                    out_of_vocabulary: dropped,
                    unresolved_gold: 0,
                })
            }
        })
        .collect()
}

/// Runs the configured system over every stream. Randomness comes from a
/// single generator seeded with `config.seed` and consumed in input order.
pub fn run_system(
    config: &RunConfig,
    t: &Taxonomy,
    streams: &[NounStream],
    training: &[NounStream],
    window: usize,
) -> Result<Vec<Vec<Assignment>>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match config.baseline {
        Baseline::None => {
            let options = DisambiguationOptions {
                density: config.density,
                window,
                fallback: config.fallback,
            };
            streams
                .iter()
                .map(|s| Ok(disambiguate_document(t, &s.nouns, &options, &mut rng)?))
                .collect()
        }
        Baseline::Random => Ok(streams.iter().map(|s| random_baseline(t, &s.nouns, &mut rng)).collect()),
        Baseline::Mfs => {
            let table = build_frequency_table(t, training);
            Ok(streams
                .iter()
                .map(|s| most_frequent_baseline(t, &s.nouns, &table))
                .collect())
        }
        Baseline::Yarowsky => {
            let table = build_salience(t, training, window)?;
            streams
                .iter()
                .map(|s| Ok(yarowsky_baseline(t, &s.nouns, &table, window)?))
                .collect()
        }
        Baseline::Sussna => {
            let options = SussnaOptions {
                window,
                ..SussnaOptions::default()
            };
            Ok(streams
                .iter()
                .map(|s| sussna_baseline(t, &s.nouns, &options, &mut rng))
                .collect())
        }
    }
}

fn load_training(config: &RunConfig, t: &Taxonomy) -> Result<Vec<NounStream>, CliError> {
    if matches!(config.baseline, Baseline::Mfs | Baseline::Yarowsky) {
        load_streams(&config.train, InputFormat::Semcor, t)
    } else {
        Ok(Vec::new())
    }
}

fn require_gold(streams: &[NounStream]) -> Result<(), CliError> {
    match streams.iter().find(|s| !s.nouns.is_empty() && !s.has_gold()) {
        Some(s) => Err(CliError::Config(format!("input `{}` carries no gold sense tags", s.id))),
        None => Ok(()),
    }
}

fn score_all(
    t: &Taxonomy,
    streams: &[NounStream],
    assignments: &[Vec<Assignment>],
    (level, population, mode): (Level, Population, ScoringMode),
) -> Result<EvalReport, CliError> {
    let mut report = EvalReport::empty(level, population);
    for (stream, a) in streams.iter().zip(assignments) {
        report.merge(&score(t, a, &stream.gold, level, population, mode)?)?;
    }
    Ok(report)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

pub fn cmd_stats(args: &StatsArgs) -> Result<String, CliError> {
    let t = load_taxonomy_file(&args.taxonomy, RelationMode::HypernymyOnly)?;
    let rows = args
        .input
        .iter()
        .map(|path| {
            let doc = read_semcor(path)?;
            Ok((doc.id.clone(), corpus_stats(&doc, &t)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(format_stats_table(&rows))
}

pub fn cmd_disambiguate(config: &RunConfig) -> Result<String, CliError> {
    let t = load_taxonomy_file(&config.taxonomy, config.density.relation_mode)?;
    let streams = load_streams(&config.inputs, config.format, &t)?;
    let training = load_training(config, &t)?;
    let results = run_system(config, &t, &streams, &training, config.effective_window())?;
    let mut out = String::new();
    for (stream, assignments) in streams.iter().zip(&results) {
        if streams.len() > 1 {
            out.push_str(&format!("# {}\n", stream.id));
        }
        for a in assignments {
            out.push_str(&format_assignment(&t, a));
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<String, CliError> {
    let config = RunConfig::from_args(&args.run)?;
    let t = load_taxonomy_file(&config.taxonomy, config.density.relation_mode)?;
    let streams = load_streams(&config.inputs, config.format, &t)?;
    require_gold(&streams)?;
    let (results, name) = match &args.assignments {
        Some(path) => {
            let docs = read_assignments(open(path)?, &t).map_err(|source| CliError::Assignments {
                path: path.clone(),
                source,
            })?;
            let docs = if docs.is_empty() { vec![Vec::new()] } else { docs };
            if docs.len() != streams.len() {
                return Err(CliError::Config(format!(
                    "assignment file holds {} documents, inputs hold {}",
                    docs.len(),
                    streams.len()
                )));
            }
            (docs, document_id(path))
        }
        None => {
            let training = load_training(&config, &t)?;
            let results = run_system(&config, &t, &streams, &training, config.effective_window())?;
            (results, config.method_name().to_string())
        }
    };
    let report = score_all(&t, &streams, &results, scoring(&args.scoring))?;
    let oov: usize = streams.iter().map(|s| s.out_of_vocabulary).sum();
    let mut out = report.to_key_values();
    out.push_str(&format!("out_of_vocabulary: {oov}\n\n"));
    out.push_str(&compare(&[(name, report)])?);
    Ok(out)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let config = RunConfig::from_args(&args.run)?;
    if args.windows.is_empty() || args.windows.contains(&0) {
        return Err(CliError::Config("--windows needs sizes of at least 1".into()));
    }
    let t = load_taxonomy_file(&config.taxonomy, config.density.relation_mode)?;
    let streams = load_streams(&config.inputs, config.format, &t)?;
    require_gold(&streams)?;
    let training = load_training(&config, &t)?;
    let rows = args
        .windows
        .iter()
        .map(|&w| {
            let results = run_system(&config, &t, &streams, &training, w)?;
            Ok((w, score_all(&t, &streams, &results, scoring(&args.scoring))?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(format_sweep(&rows))
}

/// Executes a parsed command line, writing to `--out` or stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (text, out) = match &cli.command {
        Command::Stats(args) => (cmd_stats(args)?, args.out.clone()),
        Command::Disambiguate(args) => {
            let config = RunConfig::from_args(args)?;
            (cmd_disambiguate(&config)?, config.out)
        }
        Command::Evaluate(args) => (cmd_evaluate(args)?, args.run.out.clone()),
        Command::Sweep(args) => (cmd_sweep(args)?, args.run.out.clone()),
    };
    emit(out.as_deref(), &text)
}
