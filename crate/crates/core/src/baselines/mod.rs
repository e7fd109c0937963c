//! Comparison systems: random guessing, most frequent sense, category
//! salience over lexicographer files, and shortest-path conceptual distance.

mod frequency;
mod random;
mod salience;
mod sussna;

use thiserror::Error;

pub use frequency::{build_frequency_table, most_frequent_baseline, FrequencyTable};
pub use random::{analytic_random_expectation, random_baseline, RandomExpectation};
pub use salience::{build_salience, yarowsky_baseline, SalienceTable, YAROWSKY_WINDOW};
pub use sussna::{conceptual_distance, mutual_constraint, sussna_baseline, DistanceCache, SussnaOptions};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("training corpus contains no gold-tagged nouns")]
    EmptyTraining,
    #[error("{nouns} nouns but {gold} gold tags")]
    MissingGold { nouns: usize, gold: usize },
    #[error("line {line}: {message}")]
    TableSyntax { line: usize, message: String },
    #[error(transparent)]
    Window(#[from] crate::disambiguator::WindowError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
