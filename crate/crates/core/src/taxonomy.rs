//! The noun taxonomy: synsets linked by hypernym and meronym edges, a
//! lemma index, and the per-concept subhierarchy metrics consumed by the
//! density formula.
//!
//! Taxonomies are read from TIF, a line-oriented tab-separated format:
//!
//! ```text
//! # comment
//! S   <id>        <lexfile>   <lemma>:<lex_id>[,<lemma>:<lex_id>...]
//! H   <child_id>  <parent_id>
//! M   <whole_id>  <part_id>
//! ```
//!
//! Records may appear in any order; edges are resolved at end of stream.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::BufRead;
use std::sync::OnceLock;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

/// Maximum bisection steps used by [`solve_nhyp`].
pub const NHYP_MAX_ITERATIONS: usize = 200;

/// Dense handle to a synset of one [`Taxonomy`].
///
/// Handles are assigned in ascending order of the synset id strings, so
/// comparing handles orders synsets by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SynsetIdx(u32);

impl SynsetIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    fn new(index: usize) -> Self {
        SynsetIdx(u32::try_from(index).expect("taxonomy larger than u32::MAX synsets"))
    }
}

/// Which edges make up a concept's subhierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RelationMode {
    #[default]
    HypernymyOnly,
    /// Meronym edges (whole to part) act as extra parent to child edges.
    HypernymyPlusMeronymy,
}

impl RelationMode {
    fn slot(self) -> usize {
        match self {
            RelationMode::HypernymyOnly => 0,
            RelationMode::HypernymyPlusMeronymy => 1,
        }
    }

    pub fn includes_meronymy(self) -> bool {
        self == RelationMode::HypernymyPlusMeronymy
    }
}

/// A lexicographer-file sense key as used by SemCor: `noun.group.0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SenseKey {
    pub lexfile: String,
    pub lex_id: u32,
}

impl SenseKey {
    pub fn new(lexfile: impl Into<String>, lex_id: u32) -> Self {
        SenseKey {
            lexfile: lexfile.into(),
            lex_id,
        }
    }

    /// Parses `lexfile.lex_id`, splitting on the final dot.
    pub fn parse(text: &str) -> Option<SenseKey> {
        let (lexfile, digits) = text.rsplit_once('.')?;
        if lexfile.is_empty() || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(SenseKey::new(lexfile, digits.parse().ok()?))
    }
}

impl fmt::Display for SenseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.lexfile, self.lex_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma {
    pub text: String,
    pub lex_id: u32,
}

#[derive(Debug, Clone)]
pub struct Synset {
    pub id: String,
    pub lexfile: String,
    pub lemmas: Vec<Lemma>,
    pub hypernyms: Vec<SynsetIdx>,
    /// Parts of this synset (edges point whole to part).
    pub meronyms: Vec<SynsetIdx>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubhierarchyMetrics {
    pub concept: SynsetIdx,
    /// Distinct synsets reachable downward, the concept included.
    pub descendants: usize,
    /// Longest downward path, in edges.
    pub height: usize,
    pub local_nhyp: f64,
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: edge references unknown synset `{id}`")]
    DanglingReference { line: usize, id: String },
    #[error("hypernym cycle through synset `{0}`")]
    HypernymCycle(String),
    #[error("line {line}: duplicate synset id `{id}`")]
    DuplicateSynset { line: usize, id: String },
    #[error("line {line}: duplicate sense `{lemma}` {key}")]
    DuplicateSense {
        line: usize,
        lemma: String,
        key: SenseKey,
    },
    #[error("taxonomy contains no synsets")]
    Empty,
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable, validated noun taxonomy.
///
/// Metrics are computed lazily per [`RelationMode`] and memoized, so a
/// shared `&Taxonomy` can be queried from several threads.
#[derive(Debug)]
pub struct Taxonomy {
    synsets: Vec<Synset>,
    hyponyms: Vec<Vec<SynsetIdx>>,
    holonyms: Vec<Vec<SynsetIdx>>,
    id_index: HashMap<String, SynsetIdx>,
    lemma_index: HashMap<String, Vec<SynsetIdx>>,
    key_index: HashMap<(String, SenseKey), SynsetIdx>,
    lexfiles: Vec<String>,
    roots: Vec<SynsetIdx>,
    relation_mode: RelationMode,
    metrics: [OnceLock<Vec<SubhierarchyMetrics>>; 2],
    global_nhyp: [OnceLock<f64>; 2],
}

struct RawSynset {
    line: usize,
    id: String,
    lexfile: String,
    lemmas: Vec<Lemma>,
}

struct RawEdge {
    line: usize,
    from: String,
    to: String,
}

fn syntax(line: usize, message: impl Into<String>) -> TaxonomyError {
    TaxonomyError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_lemma_list(line: usize, field: &str) -> Result<Vec<Lemma>, TaxonomyError> {
    let mut lemmas = Vec::new();
    for item in field.split(',') {
        let (text, lex_id) = item
            .rsplit_once(':')
            .ok_or_else(|| syntax(line, format!("lemma `{item}` lacks `:lex_id`")))?;
        let text = text.trim();
        if text.is_empty() || text.contains(char::is_whitespace) {
            return Err(syntax(line, format!("invalid lemma `{item}`")));
        }
        let lex_id = lex_id
            .trim()
            .parse::<u32>()
            .map_err(|_| syntax(line, format!("invalid lex_id in `{item}`")))?;
        lemmas.push(Lemma {
            text: text.to_lowercase(),
            lex_id,
        });
    }
    Ok(lemmas)
}

/// Reads and validates a TIF stream.
pub fn load_taxonomy<R: BufRead>(reader: R, relation_mode: RelationMode) -> Result<Taxonomy, TaxonomyError> {
    let mut raw_synsets = Vec::new();
    let mut hypernym_edges = Vec::new();
    let mut meronym_edges = Vec::new();

    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields[0] {
            "S" => {
                if fields.len() != 4 {
                    return Err(syntax(line_no, format!("synset record needs 4 fields, found {}", fields.len())));
                }
                let (id, lexfile) = (fields[1].trim(), fields[2].trim());
                if id.is_empty() {
                    return Err(syntax(line_no, "empty synset id"));
                }
                if lexfile.is_empty() {
                    return Err(syntax(line_no, "empty lexfile"));
                }
                raw_synsets.push(RawSynset {
                    line: line_no,
                    id: id.to_string(),
                    lexfile: lexfile.to_string(),
                    lemmas: parse_lemma_list(line_no, fields[3])?,
                });
            }
            tag @ ("H" | "M") => {
                if fields.len() != 3 {
                    return Err(syntax(line_no, format!("edge record needs 3 fields, found {}", fields.len())));
                }
                let edge = RawEdge {
                    line: line_no,
                    from: fields[1].trim().to_string(),
                    to: fields[2].trim().to_string(),
                };
                if tag == "H" {
                    hypernym_edges.push(edge);
                } else {
                    meronym_edges.push(edge);
                }
            }
            other => return Err(syntax(line_no, format!("unknown record type `{other}`"))),
        }
    }

    Taxonomy::build(raw_synsets, hypernym_edges, meronym_edges, relation_mode)
}

impl Taxonomy {
    fn build(
        mut raw: Vec<RawSynset>,
        hypernym_edges: Vec<RawEdge>,
        meronym_edges: Vec<RawEdge>,
        relation_mode: RelationMode,
    ) -> Result<Taxonomy, TaxonomyError> {
        if raw.is_empty() {
            return Err(TaxonomyError::Empty);
        }
        raw.sort_by(|a, b| a.id.cmp(&b.id).then(a.line.cmp(&b.line)));

        let mut id_index = HashMap::with_capacity(raw.len());
        for (i, r) in raw.iter().enumerate() {
            if id_index.insert(r.id.clone(), SynsetIdx::new(i)).is_some() {
                return Err(TaxonomyError::DuplicateSynset {
                    line: r.line,
                    id: r.id.clone(),
                });
            }
        }

        let mut lemma_index: HashMap<String, Vec<SynsetIdx>> = HashMap::new();
        let mut key_index = HashMap::new();
        for (i, r) in raw.iter().enumerate() {
            let idx = SynsetIdx::new(i);
            for lemma in &r.lemmas {
                let key = SenseKey::new(r.lexfile.clone(), lemma.lex_id);
                if key_index.insert((lemma.text.clone(), key.clone()), idx).is_some() {
                    return Err(TaxonomyError::DuplicateSense {
                        line: r.line,
                        lemma: lemma.text.clone(),
                        key,
                    });
                }
                let senses = lemma_index.entry(lemma.text.clone()).or_default();
                if senses.last() != Some(&idx) {
                    senses.push(idx);
                }
            }
        }

        let resolve = |edge: &RawEdge| -> Result<(SynsetIdx, SynsetIdx), TaxonomyError> {
            let look = |id: &str| {
                id_index.get(id).copied().ok_or_else(|| TaxonomyError::DanglingReference {
                    line: edge.line,
                    id: id.to_string(),
                })
            };
            Ok((look(&edge.from)?, look(&edge.to)?))
        };

        let n = raw.len();
        let mut hypernyms = vec![Vec::new(); n];
        let mut hyponyms = vec![Vec::new(); n];
        for edge in &hypernym_edges {
            let (child, parent) = resolve(edge)?;
            hypernyms[child.index()].push(parent);
            hyponyms[parent.index()].push(child);
        }
        let mut meronyms = vec![Vec::new(); n];
        let mut holonyms = vec![Vec::new(); n];
        for edge in &meronym_edges {
            let (whole, part) = resolve(edge)?;
            meronyms[whole.index()].push(part);
            holonyms[part.index()].push(whole);
        }
        for list in hypernyms
            .iter_mut()
            .chain(hyponyms.iter_mut())
            .chain(meronyms.iter_mut())
            .chain(holonyms.iter_mut())
        {
            list.sort_unstable();
            list.dedup();
        }

        check_hypernyms_acyclic(&hypernyms, &hyponyms).map_err(|idx| TaxonomyError::HypernymCycle(raw[idx.index()].id.clone()))?;

        let roots = (0..n)
            .filter(|&i| hypernyms[i].is_empty())
            .map(SynsetIdx::new)
            .collect();
        let mut lexfiles: Vec<String> = raw.iter().map(|r| r.lexfile.clone()).collect();
        lexfiles.sort_unstable();
        lexfiles.dedup();

        let synsets = raw
            .into_iter()
            .zip(hypernyms.into_iter().zip(meronyms))
            .map(|(r, (hypernyms, meronyms))| Synset {
                id: r.id,
                lexfile: r.lexfile,
                lemmas: r.lemmas,
                hypernyms,
                meronyms,
            })
            .collect();

        Ok(Taxonomy {
            synsets,
            hyponyms,
            holonyms,
            id_index,
            lemma_index,
            key_index,
            lexfiles,
            roots,
            relation_mode,
            metrics: [OnceLock::new(), OnceLock::new()],
            global_nhyp: [OnceLock::new(), OnceLock::new()],
        })
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// The relation mode chosen at load time.
    pub fn relation_mode(&self) -> RelationMode {
        self.relation_mode
    }

    pub fn synset(&self, idx: SynsetIdx) -> &Synset {
        &self.synsets[idx.index()]
    }

    pub fn synsets(&self) -> impl Iterator<Item = (SynsetIdx, &Synset)> {
        self.synsets.iter().enumerate().map(|(i, s)| (SynsetIdx::new(i), s))
    }

    pub fn id(&self, idx: SynsetIdx) -> &str {
        &self.synsets[idx.index()].id
    }

    pub fn lexfile(&self, idx: SynsetIdx) -> &str {
        &self.synsets[idx.index()].lexfile
    }

    /// All lexicographer files present, sorted.
    pub fn lexfiles(&self) -> &[String] {
        &self.lexfiles
    }

    pub fn lookup(&self, id: &str) -> Result<SynsetIdx, TaxonomyError> {
        self.id_index
            .get(id)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownSynset(id.to_string()))
    }

    pub fn roots(&self) -> &[SynsetIdx] {
        &self.roots
    }

    pub fn hyponyms(&self, idx: SynsetIdx) -> &[SynsetIdx] {
        &self.hyponyms[idx.index()]
    }

    /// Wholes that have `idx` as a part.
    pub fn holonyms(&self, idx: SynsetIdx) -> &[SynsetIdx] {
        &self.holonyms[idx.index()]
    }

    /// Senses of a lemma in ascending id order. Matching is case-insensitive.
    pub fn senses_of(&self, lemma: &str) -> &[SynsetIdx] {
        let found = match self.lemma_index.get(lemma) {
            Some(senses) => Some(senses),
            None => self.lemma_index.get(&lemma.to_lowercase()),
        };
        found.map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        !self.senses_of(lemma).is_empty()
    }

    pub fn polysemy(&self, lemma: &str) -> usize {
        self.senses_of(lemma).len()
    }

    /// Resolves a gold `(lemma, lexfile, lex_id)` triple to its synset.
    pub fn resolve_key(&self, lemma: &str, key: &SenseKey) -> Option<SynsetIdx> {
        self.key_index.get(&(lemma.to_lowercase(), key.clone())).copied()
    }

    /// The sense key under which `lemma` appears in `sense`.
    pub fn sense_key(&self, sense: SynsetIdx, lemma: &str) -> Option<SenseKey> {
        let synset = self.synset(sense);
        let lemma = lemma.to_lowercase();
        synset
            .lemmas
            .iter()
            .find(|l| l.text == lemma)
            .map(|l| SenseKey::new(synset.lexfile.clone(), l.lex_id))
    }

    /// Downward neighbours under `mode`.
    pub fn children(&self, idx: SynsetIdx, mode: RelationMode) -> impl Iterator<Item = SynsetIdx> + '_ {
        let parts: &[SynsetIdx] = if mode.includes_meronymy() {
            &self.synsets[idx.index()].meronyms
        } else {
            &[]
        };
        self.hyponyms[idx.index()].iter().chain(parts).copied()
    }

    /// Upward neighbours under `mode`.
    pub fn parents(&self, idx: SynsetIdx, mode: RelationMode) -> impl Iterator<Item = SynsetIdx> + '_ {
        let wholes: &[SynsetIdx] = if mode.includes_meronymy() {
            &self.holonyms[idx.index()]
        } else {
            &[]
        };
        self.synsets[idx.index()].hypernyms.iter().chain(wholes).copied()
    }

    /// Every synset reachable downward from `concept` (itself included), sorted.
    pub fn descendants_of(&self, concept: SynsetIdx, mode: RelationMode) -> Vec<SynsetIdx> {
        self.reach(concept, |n| self.children(n, mode).collect())
    }

    /// Every synset reachable upward from `sense` (itself included), sorted.
    pub fn ancestors(&self, sense: SynsetIdx, mode: RelationMode) -> Vec<SynsetIdx> {
        self.reach(sense, |n| self.parents(n, mode).collect())
    }

    /// [`Taxonomy::ancestors`] under the load-time relation mode.
    pub fn ancestors_of(&self, sense: SynsetIdx) -> Vec<SynsetIdx> {
        self.ancestors(sense, self.relation_mode)
    }

    fn reach<F>(&self, start: SynsetIdx, next: F) -> Vec<SynsetIdx>
    where
        F: Fn(SynsetIdx) -> Vec<SynsetIdx>,
    {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([start]);
        seen[start.index()] = true;
        let mut out = Vec::new();
        while let Some(node) = queue.pop_front() {
            out.push(node);
            for n in next(node) {
                if !seen[n.index()] {
                    seen[n.index()] = true;
                    queue.push_back(n);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Metrics under the load-time relation mode.
    pub fn subhierarchy_metrics(&self, concept: SynsetIdx) -> SubhierarchyMetrics {
        self.metrics(concept, self.relation_mode)
    }

    pub fn metrics(&self, concept: SynsetIdx, mode: RelationMode) -> SubhierarchyMetrics {
        self.metrics_table(mode)[concept.index()]
    }

    fn metrics_table(&self, mode: RelationMode) -> &[SubhierarchyMetrics] {
        self.metrics[mode.slot()].get_or_init(|| self.compute_metrics(mode))
    }

    /// nhyp for the whole hierarchy under the load-time relation mode.
    pub fn global_nhyp(&self) -> f64 {
        self.global_nhyp_in(self.relation_mode)
    }

    pub fn global_nhyp_in(&self, mode: RelationMode) -> f64 {
        *self.global_nhyp[mode.slot()].get_or_init(|| {
            let table = self.metrics_table(mode);
            let height = self.roots.iter().map(|r| table[r.index()].height).max().unwrap_or(0);
            solve_nhyp(self.len(), height)
        })
    }

    fn compute_metrics(&self, mode: RelationMode) -> Vec<SubhierarchyMetrics> {
        let n = self.len();
        let heights = self.heights(mode);

        // one stamped visited array shared by all traversals
        let mut stamp = vec![usize::MAX; n];
        let mut stack = Vec::new();
        (0..n)
            .map(|i| {
                let concept = SynsetIdx::new(i);
                let mut count = 0;
                stamp[i] = i;
                stack.push(concept);
                while let Some(node) = stack.pop() {
                    count += 1;
                    for child in self.children(node, mode) {
                        if stamp[child.index()] != i {
                            stamp[child.index()] = i;
                            stack.push(child);
                        }
                    }
                }
                SubhierarchyMetrics {
                    concept,
                    descendants: count,
                    height: heights[i],
                    local_nhyp: solve_nhyp(count, heights[i]),
                }
            })
            .collect()
    }

    /// Longest downward path per node. With meronymy the combined graph may
    /// contain cycles; each strongly connected component then counts as a
    /// single level.
    fn heights(&self, mode: RelationMode) -> Vec<usize> {
        let n = self.len();
        let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, n);
        for _ in 0..n {
            graph.add_node(());
        }
        for i in 0..n {
            for child in self.children(SynsetIdx::new(i), mode) {
                graph.add_edge(NodeIndex::new(i), NodeIndex::new(child.index()), ());
            }
        }
        // components come out in reverse topological order: sinks first
        let components = tarjan_scc(&graph);
        let mut component_of = vec![0; n];
        for (c, members) in components.iter().enumerate() {
            for m in members {
                component_of[m.index()] = c;
            }
        }
        let mut component_height = vec![0usize; components.len()];
        for (c, members) in components.iter().enumerate() {
            let mut best = 0;
            for m in members {
                for child in self.children(SynsetIdx::new(m.index()), mode) {
                    let other = component_of[child.index()];
                    if other != c {
                        best = best.max(component_height[other] + 1);
                    }
                }
            }
            component_height[c] = best;
        }
        (0..n).map(|i| component_height[component_of[i]]).collect()
    }
}

fn check_hypernyms_acyclic(hypernyms: &[Vec<SynsetIdx>], hyponyms: &[Vec<SynsetIdx>]) -> Result<(), SynsetIdx> {
    let n = hypernyms.len();
    let mut pending: Vec<usize> = hypernyms.iter().map(Vec::len).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut done = 0;
    while let Some(node) = ready.pop() {
        done += 1;
        for child in &hyponyms[node] {
            pending[child.index()] -= 1;
            if pending[child.index()] == 0 {
                ready.push(child.index());
            }
        }
    }
    if done == n {
        Ok(())
    } else {
        let stuck = (0..n).find(|&i| pending[i] > 0).expect("unfinished node exists");
        Err(SynsetIdx::new(stuck))
    }
}

/// Σ_{i=0..height} x^i by Horner's rule.
pub fn geometric_sum(x: f64, height: usize) -> f64 {
    (0..height).fold(1.0, |acc, _| acc * x + 1.0)
}

/// Mean branching factor of a subhierarchy: the non-negative root of
/// `Σ_{i=0..height} x^i = size`, found by bisection on `[0, size]`.
///
/// A subhierarchy of height 0 has nhyp 0.
pub fn solve_nhyp(size: usize, height: usize) -> f64 {
    if height == 0 || size <= 1 {
        return 0.0;
    }
    let target = size as f64;
    let residual = |x: f64| geometric_sum(x, height) - target;
    let (mut lo, mut hi) = (0.0_f64, target);
    for _ in 0..NHYP_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = residual(mid);
        if r == 0.0 {
            return mid;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if residual(lo).abs() <= residual(hi).abs() {
        lo
    } else {
        hi
    }
}
