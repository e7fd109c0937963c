use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use super::BaselineError;
use crate::corpus::NounStream;
use crate::disambiguator::{Assignment, Method, NounOccurrence, Outcome};
use crate::taxonomy::Taxonomy;

/// Sense counts per lemma, gathered from gold-tagged training text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyTable {
    /// lemma → synset id → count
    counts: BTreeMap<String, BTreeMap<String, u64>>,
}

impl FrequencyTable {
    pub fn count(&self, lemma: &str, synset_id: &str) -> u64 {
        self.counts
            .get(&lemma.to_lowercase())
            .and_then(|m| m.get(synset_id))
            .copied()
            .unwrap_or(0)
    }

    pub fn add(&mut self, lemma: &str, synset_id: &str, n: u64) {
        if n > 0 {
            *self
                .counts
                .entry(lemma.to_lowercase())
                .or_default()
                .entry(synset_id.to_string())
                .or_default() += n;
        }
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        self.counts.contains_key(&lemma.to_lowercase())
    }

    /// `lemma TAB synset_id TAB count` lines.
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (lemma, senses) in &self.counts {
            for (id, n) in senses {
                writeln!(out, "{lemma}\t{id}\t{n}")?;
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, BaselineError> {
        let mut table = FrequencyTable::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: &str| BaselineError::TableSyntax {
                line: n + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad("expected lemma, synset and count"));
            }
            let count = fields[2].parse::<u64>().map_err(|_| bad("count is not an integer"))?;
            if count == 0 {
                return Err(bad("counts must be positive"));
            }
            table.add(fields[0], fields[1], count);
        }
        Ok(table)
    }
}

/// Counts resolved gold senses of the training streams.
pub fn build_frequency_table(t: &Taxonomy, training: &[NounStream]) -> FrequencyTable {
    let mut table = FrequencyTable::default();
    for stream in training {
        for (noun, gold) in stream.nouns.iter().zip(&stream.gold) {
            if let Some(sense) = gold.synset {
                table.add(&noun.lemma, t.id(sense), 1);
            }
        }
    }
    table
}

/// Answers with the most frequent training sense; lemmas without counts
/// stay unanswered. Ties go to the lower synset id.
pub fn most_frequent_baseline(t: &Taxonomy, nouns: &[NounOccurrence], table: &FrequencyTable) -> Vec<Assignment> {
    nouns
        .iter()
        .map(|n| {
            let mut best = None;
            for &sense in t.senses_of(&n.lemma) {
                let c = table.count(&n.lemma, t.id(sense));
                if c > 0 && best.is_none_or(|(_, b)| c > b) {
                    best = Some((sense, c));
                }
            }
            Assignment {
                occurrence: n.clone(),
                outcome: best.map_or(Outcome::None, |(s, _)| Outcome::Full(s)),
                method: Method::MostFrequent,
                winning_cd: None,
            }
        })
        .collect()
}
