//! Conceptual Density of a concept given the senses ("marks") of window
//! nouns that fall inside its subhierarchy:
//!
//! ```text
//! CD(c, m) = Σ_{i=0}^{m-1} nhyp^(i^e) / descendants(c)
//! ```
//!
//! with smoothing exponent `e` (0.20 by default).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::disambiguator::Lattice;
use crate::taxonomy::{RelationMode, SubhierarchyMetrics, SynsetIdx, Taxonomy};

pub const DEFAULT_SMOOTHING_EXPONENT: f64 = 0.20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NhypMode {
    /// One nhyp per concept, from its own size and height.
    Local,
    /// One nhyp for the whole hierarchy.
    #[default]
    Global,
}

/// How repeated occurrences of a lemma inside one window are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkCounting {
    /// A lemma's senses contribute once, however often it occurs.
    #[default]
    PerLemma,
    PerOccurrence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    pub smoothing_exponent: f64,
    pub nhyp_mode: NhypMode,
    pub relation_mode: RelationMode,
    pub mark_counting: MarkCounting,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams {
            smoothing_exponent: DEFAULT_SMOOTHING_EXPONENT,
            nhyp_mode: NhypMode::default(),
            relation_mode: RelationMode::default(),
            mark_counting: MarkCounting::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("smoothing exponent must be positive and finite, got {0}")]
pub struct InvalidExponent(pub f64);

impl DensityParams {
    pub fn validate(&self) -> Result<(), InvalidExponent> {
        if self.smoothing_exponent.is_finite() && self.smoothing_exponent > 0.0 {
            Ok(())
        } else {
            Err(InvalidExponent(self.smoothing_exponent))
        }
    }

    /// The nhyp value the formula should use for `metrics`.
    pub fn nhyp(&self, metrics: &SubhierarchyMetrics, global_nhyp: f64) -> f64 {
        match self.nhyp_mode {
            NhypMode::Local => metrics.local_nhyp,
            NhypMode::Global => global_nhyp,
        }
    }
}

/// Evaluates the density formula. The `i = 0` term is 1 even when nhyp is 0.
pub fn conceptual_density(metrics: &SubhierarchyMetrics, marks: usize, params: &DensityParams, global_nhyp: f64) -> f64 {
    let nhyp = params.nhyp(metrics, global_nhyp);
    smoothed_area(nhyp, marks, params.smoothing_exponent) / metrics.descendants as f64
}

/// Numerator of the density formula.
pub fn smoothed_area(nhyp: f64, marks: usize, exponent: f64) -> f64 {
    (0..marks)
        .map(|i| if i == 0 { 1.0 } else { nhyp.powf((i as f64).powf(exponent)) })
        .sum()
}

/// Marks of one concept within a lattice.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Marks {
    pub count: usize,
    /// Window occurrence → its remaining senses that lie under the concept.
    pub covered: BTreeMap<usize, Vec<SynsetIdx>>,
}

/// Counts the remaining lattice senses under `concept` by walking the
/// concept's downward set.
pub fn collect_marks(t: &Taxonomy, concept: SynsetIdx, lattice: &Lattice, params: &DensityParams) -> Marks {
    let below: BTreeSet<SynsetIdx> = t.descendants_of(concept, params.relation_mode).into_iter().collect();
    let mut marks = Marks::default();
    for slot in lattice.slots() {
        let hits: Vec<SynsetIdx> = slot.remaining.iter().copied().filter(|s| below.contains(s)).collect();
        if hits.is_empty() {
            continue;
        }
        marks.count += hits.len() * slot.weight(params.mark_counting);
        for &occurrence in &slot.occurrences {
            marks.covered.insert(occurrence, hits.clone());
        }
    }
    marks
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityScore {
    pub concept: SynsetIdx,
    pub cd: f64,
    pub marks: usize,
    pub descendants: usize,
    /// Window occurrence → covered subset of its remaining senses.
    pub covered: BTreeMap<usize, Vec<SynsetIdx>>,
    /// Distinct lemmas with at least one sense under the concept.
    pub covered_lemmas: usize,
    /// True when choosing this concept would narrow some still-ambiguous,
    /// unfrozen occurrence.
    pub resolvable: bool,
}

impl DensityScore {
    pub fn covered_words(&self) -> BTreeSet<usize> {
        self.covered.keys().copied().collect()
    }

    /// Eligible for selection: relates two or more lemmas and makes progress.
    pub fn qualifies(&self) -> bool {
        self.covered_lemmas >= 2 && self.resolvable
    }
}

/// Ranking order: higher cd first, then the smaller subhierarchy, then
/// ascending synset id.
pub fn rank(a: &DensityScore, b: &DensityScore) -> Ordering {
    b.cd
        .partial_cmp(&a.cd)
        .unwrap_or(Ordering::Equal)
        .then(a.descendants.cmp(&b.descendants))
        .then(a.concept.cmp(&b.concept))
}

/// Scores every concept that is an ancestor of some remaining sense in the
/// lattice, ranked by [`rank`].
pub fn score_candidates(t: &Taxonomy, lattice: &Lattice, params: &DensityParams) -> Vec<DensityScore> {
    let mode = params.relation_mode;
    let global_nhyp = t.global_nhyp_in(mode);

    // concept → (marks, slot → covered senses)
    let mut tally: HashMap<SynsetIdx, (usize, BTreeMap<usize, Vec<SynsetIdx>>)> = HashMap::new();
    for (slot_no, slot) in lattice.slots().iter().enumerate() {
        let weight = slot.weight(params.mark_counting);
        for &sense in &slot.remaining {
            for &ancestor in lattice.ancestors(sense) {
                let entry = tally.entry(ancestor).or_default();
                entry.0 += weight;
                entry.1.entry(slot_no).or_default().push(sense);
            }
        }
    }

    let mut scores: Vec<DensityScore> = tally
        .into_iter()
        .map(|(concept, (marks, by_slot))| {
            let metrics = t.metrics(concept, mode);
            let slots = lattice.slots();
            let resolvable = by_slot.iter().any(|(&s, hits)| {
                let slot = &slots[s];
                !slot.frozen && hits.len() < slot.remaining.len()
            });
            let mut covered = BTreeMap::new();
            for (&s, hits) in &by_slot {
                for &occurrence in &slots[s].occurrences {
                    covered.insert(occurrence, hits.clone());
                }
            }
            DensityScore {
                concept,
                cd: conceptual_density(&metrics, marks, params, global_nhyp),
                marks,
                descendants: metrics.descendants,
                covered,
                covered_lemmas: by_slot.len(),
                resolvable,
            }
        })
        .collect();
    scores.sort_by(rank);
    scores
}
