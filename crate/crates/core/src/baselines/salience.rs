//! Category salience in the style of Roget-category classifiers, adapted to
//! lexicographer files: context lemmas are associated with the file of the
//! noun they surround, and a target gets the candidate file whose summed
//! salience over its context is highest.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use super::BaselineError;
use crate::corpus::NounStream;
use crate::disambiguator::{build_window, Assignment, Method, NounOccurrence, Outcome};
use crate::taxonomy::Taxonomy;

pub const YAROWSKY_WINDOW: usize = 50;

const PRIOR_ROW: &str = "*";

/// Association ratio `P(w|c) · log2(P(w|c) / P(w))` per context lemma and
/// category, with add-one smoothing of `P(w|c)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SalienceTable {
    categories: Vec<String>,
    salience: BTreeMap<String, Vec<f64>>,
    priors: Vec<f64>,
}

impl SalienceTable {
    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    fn category_index(&self, category: &str) -> Option<usize> {
        self.categories.binary_search_by(|c| c.as_str().cmp(category)).ok()
    }

    pub fn salience(&self, lemma: &str, category: &str) -> Option<f64> {
        let i = self.category_index(category)?;
        self.salience.get(&lemma.to_lowercase()).map(|row| row[i])
    }

    pub fn prior(&self, category: &str) -> Option<f64> {
        self.category_index(category).map(|i| self.priors[i])
    }

    /// Summed salience of `category` over the context lemmas. Unknown
    /// lemmas contribute nothing.
    pub fn score<S: AsRef<str>>(&self, category: &str, context: &[S]) -> f64 {
        let Some(i) = self.category_index(category) else {
            return 0.0;
        };
        context
            .iter()
            .filter_map(|w| self.salience.get(&w.as_ref().to_lowercase()))
            .map(|row| row[i])
            .sum()
    }

    /// `lemma TAB category TAB value` lines; priors use the lemma `*`.
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (c, p) in self.categories.iter().zip(&self.priors) {
            writeln!(out, "{PRIOR_ROW}\t{c}\t{p}")?;
        }
        for (lemma, row) in &self.salience {
            for (c, v) in self.categories.iter().zip(row) {
                writeln!(out, "{lemma}\t{c}\t{v}")?;
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, BaselineError> {
        let mut priors: BTreeMap<String, f64> = BTreeMap::new();
        let mut cells: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
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
                return Err(bad("expected lemma, category and value"));
            }
            let value: f64 = fields[2].parse().map_err(|_| bad("value is not a number"))?;
            if !value.is_finite() {
                return Err(bad("value is not finite"));
            }
            if fields[0] == PRIOR_ROW {
                priors.insert(fields[1].to_string(), value);
            } else {
                cells
                    .entry(fields[0].to_string())
                    .or_default()
                    .insert(fields[1].to_string(), value);
            }
        }
        let categories: Vec<String> = priors.keys().cloned().collect();
        let mut salience = BTreeMap::new();
        for (lemma, row) in cells {
            let mut values = vec![0.0; categories.len()];
            for (c, v) in row {
                let i = categories
                    .binary_search(&c)
                    .map_err(|_| BaselineError::TableSyntax {
                        line: 0,
                        message: format!("category `{c}` has no prior row"),
                    })?;
                values[i] = v;
            }
            salience.insert(lemma, values);
        }
        Ok(SalienceTable {
            categories,
            salience,
            priors: priors.into_values().collect(),
        })
    }
}

/// Collects co-occurrence counts between each gold-tagged training noun's
/// file and the other nouns of its `window`, then turns them into
/// association ratios.
pub fn build_salience(t: &Taxonomy, training: &[NounStream], window: usize) -> Result<SalienceTable, BaselineError> {
    let mut categories: Vec<String> = t.lexfiles().to_vec();
    for stream in training {
        categories.extend(stream.gold.iter().filter_map(|g| g.key.as_ref().map(|k| k.lexfile.clone())));
    }
    categories.sort_unstable();
    categories.dedup();
    let n_cat = categories.len();
    let cat_index = |c: &str| categories.binary_search_by(|x| x.as_str().cmp(c)).expect("category collected");

    let mut counts: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    let mut tags = vec![0u64; n_cat];
    for stream in training {
        for (i, gold) in stream.gold.iter().enumerate().take(stream.nouns.len()) {
            let Some(key) = &gold.key else { continue };
            let c = cat_index(&key.lexfile);
            tags[c] += 1;
            let w = build_window(&stream.nouns, i, window)?;
            for &m in w.members.iter().filter(|&&m| m != i) {
                counts
                    .entry(stream.nouns[m].lemma.to_lowercase())
                    .or_insert_with(|| vec![0; n_cat])[c] += 1;
            }
        }
    }
    let tagged: u64 = tags.iter().sum();
    if tagged == 0 {
        return Err(BaselineError::EmptyTraining);
    }

    let vocabulary = counts.len() as f64;
    let mut per_category = vec![0u64; n_cat];
    for row in counts.values() {
        for (c, n) in row.iter().enumerate() {
            per_category[c] += n;
        }
    }
    let grand: u64 = per_category.iter().sum();

    let salience = counts
        .into_iter()
        .map(|(lemma, row)| {
            let p_w = row.iter().sum::<u64>() as f64 / grand as f64;
            let values = row
                .iter()
                .zip(&per_category)
                .map(|(&n, &n_c)| {
                    let p_w_c = (n as f64 + 1.0) / (n_c as f64 + vocabulary);
                    p_w_c * (p_w_c / p_w).log2()
                })
                .collect();
            (lemma, values)
        })
        .collect();
    let priors = tags
        .iter()
        .map(|&n| (n as f64 + 1.0) / (tagged as f64 + n_cat as f64))
        .collect();

    Ok(SalienceTable {
        categories,
        salience,
        priors,
    })
}

/// File-level answers for every noun: the candidate file of its senses
/// with the highest summed salience over the window, ties to the
/// alphabetically first file.
pub fn yarowsky_baseline(
    t: &Taxonomy,
    nouns: &[NounOccurrence],
    table: &SalienceTable,
    window: usize,
) -> Result<Vec<Assignment>, BaselineError> {
    (0..nouns.len())
        .map(|i| {
            let mut candidates: Vec<&str> = t.senses_of(&nouns[i].lemma).iter().map(|&s| t.lexfile(s)).collect();
            candidates.sort_unstable();
            candidates.dedup();
            let w = build_window(nouns, i, window)?;
            let context: Vec<&str> = w
                .members
                .iter()
                .filter(|&&m| m != i)
                .map(|&m| nouns[m].lemma.as_str())
                .collect();
            let mut best: Option<(&str, f64)> = None;
            for c in candidates {
                let s = table.score(c, &context);
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((c, s));
                }
            }
            Ok(Assignment {
                occurrence: nouns[i].clone(),
                outcome: best.map_or(Outcome::None, |(c, _)| Outcome::Category(c.to_string())),
                method: Method::Yarowsky,
                winning_cd: None,
            })
        })
        .collect()
}
