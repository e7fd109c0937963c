//! Coverage, precision and recall of assignments against gold tags.
//!
//! Only full answers count as answered; partial and empty outcomes are
//! failures to disambiguate. Reports keep raw counts so that shards can be
//! merged and the identity `recall = precision × coverage` holds exactly.

use std::fmt::{self, Write as _};

use num_rational::Ratio;
use thiserror::Error;

use crate::corpus::GoldTag;
use crate::disambiguator::{Assignment, Outcome};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Sense,
    /// Lexicographer-file granularity.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Population {
    All,
    PolysemousOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoringMode {
    #[default]
    Strict,
    /// Partial outcomes count as answered, correct when the gold sense is
    /// among them.
    Lenient,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Sense => "sense",
            Level::File => "file",
        })
    }
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Population::All => "all",
            Population::PolysemousOnly => "polysemous",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{assignments} assignments but {gold} gold tags")]
    LengthMismatch { assignments: usize, gold: usize },
    #[error("category answers can only be scored at file level")]
    CategoryAtSenseLevel,
    #[error("cannot merge a {0} report into a {1} report")]
    Incompatible(String, String),
    #[error("cannot compare reports of different level or population")]
    MixedReports,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalReport {
    pub level: Level,
    pub population: Population,
    pub total: u64,
    pub answered: u64,
    pub correct: u64,
    /// Nouns left out because their gold tag does not resolve and the
    /// system gave no answer.
    pub excluded_unresolved: u64,
}

impl EvalReport {
    pub fn empty(level: Level, population: Population) -> Self {
        EvalReport {
            level,
            population,
            total: 0,
            answered: 0,
            correct: 0,
            excluded_unresolved: 0,
        }
    }

    pub fn coverage(&self) -> Option<Ratio<u64>> {
        (self.total > 0).then(|| Ratio::new(self.answered, self.total))
    }

    pub fn precision(&self) -> Option<Ratio<u64>> {
        (self.answered > 0).then(|| Ratio::new(self.correct, self.answered))
    }

    pub fn recall(&self) -> Option<Ratio<u64>> {
        (self.total > 0).then(|| Ratio::new(self.correct, self.total))
    }

    pub fn merge(&mut self, other: &EvalReport) -> Result<(), EvalError> {
        if (self.level, self.population) != (other.level, other.population) {
            return Err(EvalError::Incompatible(
                format!("{}/{}", other.level, other.population),
                format!("{}/{}", self.level, self.population),
            ));
        }
        self.total += other.total;
        self.answered += other.answered;
        self.correct += other.correct;
        self.excluded_unresolved += other.excluded_unresolved;
        Ok(())
    }

    /// `key: value` block.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "level: {}", self.level);
        let _ = writeln!(out, "population: {}", self.population);
        let _ = writeln!(out, "total: {}", self.total);
        let _ = writeln!(out, "answered: {}", self.answered);
        let _ = writeln!(out, "correct: {}", self.correct);
        let _ = writeln!(out, "excluded_unresolved: {}", self.excluded_unresolved);
        let _ = writeln!(out, "coverage: {}", format_percent(self.coverage()));
        let _ = writeln!(out, "precision: {}", format_percent(self.precision()));
        let _ = writeln!(out, "recall: {}", format_percent(self.recall()));
        out
    }
}

/// Percentage with one decimal, rounded half up; `-` when undefined.
pub fn format_percent(ratio: Option<Ratio<u64>>) -> String {
    match ratio {
        None => "-".to_string(),
        Some(r) => {
            let tenths = (2000 * *r.numer() + *r.denom()) / (2 * *r.denom());
            format!("{}.{}", tenths / 10, tenths % 10)
        }
    }
}

pub fn score(
    t: &Taxonomy,
    assignments: &[Assignment],
    gold: &[GoldTag],
    level: Level,
    population: Population,
    mode: ScoringMode,
) -> Result<EvalReport, EvalError> {
    if assignments.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            assignments: assignments.len(),
            gold: gold.len(),
        });
    }
    let mut report = EvalReport::empty(level, population);
    for (a, g) in assignments.iter().zip(gold) {
        if population == Population::PolysemousOnly && t.polysemy(&a.occurrence.lemma) <= 1 {
            continue;
        }
        let answered = match (&a.outcome, mode) {
            (Outcome::Full(_), _) => true,
            (Outcome::Category(_), _) => {
                if level == Level::Sense {
                    return Err(EvalError::CategoryAtSenseLevel);
                }
                true
            }
            (Outcome::Partial(_), ScoringMode::Lenient) => true,
            _ => false,
        };
        let Some(gold_sense) = g.synset else {
            if answered {
                report.total += 1;
                report.answered += 1;
            } else {
                report.excluded_unresolved += 1;
            }
            continue;
        };
        report.total += 1;
        if !answered {
            continue;
        }
        report.answered += 1;
        let gold_file = t.lexfile(gold_sense);
        let correct = match (&a.outcome, level) {
            (Outcome::Full(s), Level::Sense) => *s == gold_sense,
            (Outcome::Full(s), Level::File) => t.lexfile(*s) == gold_file,
            (Outcome::Partial(set), Level::Sense) => set.contains(&gold_sense),
            (Outcome::Partial(set), Level::File) => set.iter().any(|s| t.lexfile(*s) == gold_file),
            (Outcome::Category(c), _) => c == gold_file,
            (Outcome::None, _) => false,
        };
        if correct {
            report.correct += 1;
        }
    }
    Ok(report)
}

/// Comparison table: one row per method with coverage, precision and
/// recall percentages.
pub fn compare(reports: &[(String, EvalReport)]) -> Result<String, EvalError> {
    if let Some((_, first)) = reports.first() {
        if reports
            .iter()
            .any(|(_, r)| (r.level, r.population) != (first.level, first.population))
        {
            return Err(EvalError::MixedReports);
        }
    }
    let mut out = String::from("method\tcover\tprec\trecall\n");
    for (name, r) in reports {
        let _ = writeln!(
            out,
            "{name}\t{}\t{}\t{}",
            format_percent(r.coverage()),
            format_percent(r.precision()),
            format_percent(r.recall())
        );
    }
    Ok(out)
}

/// Window-size sweep table.
pub fn format_sweep(rows: &[(usize, EvalReport)]) -> String {
    let mut out = String::from("window\tcoverage\tprecision\trecall\ttotal\tanswered\tcorrect\n");
    for (window, r) in rows {
        let _ = writeln!(
            out,
            "{window}\t{}\t{}\t{}\t{}\t{}\t{}",
            format_percent(r.coverage()),
            format_percent(r.precision()),
            format_percent(r.recall()),
            r.total,
            r.answered,
            r.correct
        );
    }
    out
}
