//! Window-by-window disambiguation of a noun stream.
//!
//! For each noun the window of nearest nouns is turned into a lattice of
//! senses and their ancestors. The loop then repeatedly picks the densest
//! qualifying concept and keeps, for every word it covers, only the senses
//! below it. Whatever is left for the middle noun is the answer.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::density::{score_candidates, DensityParams, DensityScore, MarkCounting};
use crate::taxonomy::{SenseKey, SynsetIdx, Taxonomy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounOccurrence {
    /// Index among the document's in-vocabulary nouns.
    pub doc_position: usize,
    pub lemma: String,
    pub sentence_id: usize,
}

impl NounOccurrence {
    pub fn new(doc_position: usize, lemma: impl Into<String>, sentence_id: usize) -> Self {
        NounOccurrence {
            doc_position,
            lemma: lemma.into(),
            sentence_id,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("cannot build a window over an empty noun list")]
    Empty,
    #[error("window size must be at least 1")]
    ZeroSize,
    #[error("target {target} out of range for {len} nouns")]
    TargetOutOfRange { target: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    /// Document index of the noun being disambiguated.
    pub target: usize,
    /// Document indices of the window, in document order.
    pub members: Vec<usize>,
    pub size: usize,
}

impl Window {
    /// Position of the target inside `members`.
    pub fn target_offset(&self) -> usize {
        self.target - self.members[0]
    }
}

/// Selects `min(size, len)` consecutive nouns around `target`.
///
/// The target sits in the middle; an even size puts the extra noun after
/// it. Near either end of the document the window slides inward instead of
/// shrinking.
pub fn build_window(nouns: &[NounOccurrence], target: usize, size: usize) -> Result<Window, WindowError> {
    window_range(nouns.len(), target, size).map(|(start, end)| Window {
        target,
        members: (start..end).collect(),
        size,
    })
}

fn window_range(len: usize, target: usize, size: usize) -> Result<(usize, usize), WindowError> {
    if len == 0 {
        return Err(WindowError::Empty);
    }
    if size == 0 {
        return Err(WindowError::ZeroSize);
    }
    if target >= len {
        return Err(WindowError::TargetOutOfRange { target, len });
    }
    let span = size.min(len);
    let before = (size - 1) / 2;
    let start = target.saturating_sub(before).min(len - span);
    Ok((start, start + span))
}

/// Per-lemma state of the lattice. Occurrences of the same lemma share one
/// slot, so they always hold identical sense sets.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSlot {
    pub lemma: String,
    /// All senses of the lemma.
    pub senses: Vec<SynsetIdx>,
    pub remaining: Vec<SynsetIdx>,
    pub frozen: bool,
    /// Window positions holding this lemma.
    pub occurrences: Vec<usize>,
}

impl LatticeSlot {
    pub fn weight(&self, counting: MarkCounting) -> usize {
        match counting {
            MarkCounting::PerLemma => 1,
            MarkCounting::PerOccurrence => self.occurrences.len(),
        }
    }

    pub fn is_ambiguous(&self) -> bool {
        !self.frozen && self.remaining.len() > 1
    }
}

/// Working state for one window: remaining senses per word plus the
/// ancestor closure of every sense.
#[derive(Debug, Clone)]
pub struct Lattice {
    slots: Vec<LatticeSlot>,
    occurrence_slot: Vec<usize>,
    ancestors: HashMap<SynsetIdx, Vec<SynsetIdx>>,
}

impl Lattice {
    pub fn build<S: AsRef<str>>(t: &Taxonomy, lemmas: &[S], params: &DensityParams) -> Lattice {
        let mut slots: Vec<LatticeSlot> = Vec::new();
        let mut by_lemma: HashMap<String, usize> = HashMap::new();
        let mut occurrence_slot = Vec::with_capacity(lemmas.len());
        for (position, lemma) in lemmas.iter().enumerate() {
            let key = lemma.as_ref().to_lowercase();
            let slot = *by_lemma.entry(key.clone()).or_insert_with(|| {
                let senses = t.senses_of(&key).to_vec();
                slots.push(LatticeSlot {
                    lemma: key,
                    remaining: senses.clone(),
                    senses,
                    frozen: false,
                    occurrences: Vec::new(),
                });
                slots.len() - 1
            });
            slots[slot].occurrences.push(position);
            occurrence_slot.push(slot);
        }
        let mut ancestors = HashMap::new();
        for slot in &slots {
            for &sense in &slot.senses {
                ancestors
                    .entry(sense)
                    .or_insert_with(|| t.ancestors(sense, params.relation_mode));
            }
        }
        Lattice {
            slots,
            occurrence_slot,
            ancestors,
        }
    }

    pub fn slots(&self) -> &[LatticeSlot] {
        &self.slots
    }

    pub fn slot_of(&self, occurrence: usize) -> &LatticeSlot {
        &self.slots[self.occurrence_slot[occurrence]]
    }

    /// Ancestors of a lattice sense, itself included.
    pub fn ancestors(&self, sense: SynsetIdx) -> &[SynsetIdx] {
        &self.ancestors[&sense]
    }

    /// Candidate concepts: the union of ancestors of all remaining senses.
    pub fn candidates(&self) -> Vec<SynsetIdx> {
        let mut out: Vec<SynsetIdx> = self
            .slots
            .iter()
            .flat_map(|s| s.remaining.iter().flat_map(|sense| self.ancestors(*sense).iter().copied()))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Keeps, for every unfrozen word the winner covers, only the covered
    /// senses and freezes it. Returns the window positions frozen.
    pub fn freeze(&mut self, winner: &DensityScore) -> Vec<usize> {
        let mut frozen = Vec::new();
        let mut touched = Vec::new();
        for (&occurrence, hits) in &winner.covered {
            let slot_no = self.occurrence_slot[occurrence];
            let slot = &mut self.slots[slot_no];
            if slot.frozen && !touched.contains(&slot_no) {
                continue;
            }
            slot.remaining = hits.clone();
            slot.frozen = true;
            touched.push(slot_no);
            frozen.push(occurrence);
        }
        frozen
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Full(SynsetIdx),
    /// Narrowed to two or more senses.
    Partial(Vec<SynsetIdx>),
    None,
    /// A lexicographer-file answer with no specific sense.
    Category(String),
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Full(_) => "full",
            Outcome::Partial(_) => "partial",
            Outcome::None => "none",
            Outcome::Category(_) => "category",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ConceptualDensity,
    Fallback,
    Monosemous,
    Random,
    MostFrequent,
    Yarowsky,
    Sussna,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ConceptualDensity => "cd",
            Method::Fallback => "fallback",
            Method::Monosemous => "monosemous",
            Method::Random => "random",
            Method::MostFrequent => "mfs",
            Method::Yarowsky => "yarowsky",
            Method::Sussna => "sussna",
        }
    }

    pub fn from_label(label: &str) -> Option<Method> {
        [
            Method::ConceptualDensity,
            Method::Fallback,
            Method::Monosemous,
            Method::Random,
            Method::MostFrequent,
            Method::Yarowsky,
            Method::Sussna,
        ]
        .into_iter()
        .find(|m| m.label() == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub occurrence: NounOccurrence,
    pub outcome: Outcome,
    pub method: Method,
    pub winning_cd: Option<f64>,
}

/// One iteration of the selection loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub concept: SynsetIdx,
    pub cd: f64,
    pub marks: usize,
    /// Window positions frozen by this step.
    pub frozen: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub assignment: Assignment,
    pub trace: Vec<TraceStep>,
}

pub fn disambiguate_window(t: &Taxonomy, nouns: &[NounOccurrence], window: &Window, params: &DensityParams) -> WindowResult {
    let occurrence = nouns[window.target].clone();
    let senses = t.senses_of(&occurrence.lemma);
    if senses.len() == 1 {
        return WindowResult {
            assignment: Assignment {
                occurrence,
                outcome: Outcome::Full(senses[0]),
                method: Method::Monosemous,
                winning_cd: None,
            },
            trace: Vec::new(),
        };
    }

    let lemmas: Vec<&str> = window.members.iter().map(|&m| nouns[m].lemma.as_str()).collect();
    let mut lattice = Lattice::build(t, &lemmas, params);
    let target = window.target_offset();
    let mut trace = Vec::new();
    let mut target_cd = None;

    loop {
        let scores = score_candidates(t, &lattice, params);
        let Some(winner) = scores.into_iter().find(DensityScore::qualifies) else {
            break;
        };
        let frozen = lattice.freeze(&winner);
        if frozen.contains(&target) {
            target_cd = Some(winner.cd);
        }
        trace.push(TraceStep {
            concept: winner.concept,
            cd: winner.cd,
            marks: winner.marks,
            frozen,
        });
    }

    let slot = lattice.slot_of(target);
    let outcome = match slot.remaining.len() {
        1 if slot.senses.len() > 1 => Outcome::Full(slot.remaining[0]),
        n if n > 1 && n < slot.senses.len() => Outcome::Partial(slot.remaining.clone()),
        _ => Outcome::None,
    };
    let winning_cd = match outcome {
        Outcome::None => None,
        _ => target_cd,
    };
    WindowResult {
        assignment: Assignment {
            occurrence,
            outcome,
            method: Method::ConceptualDensity,
            winning_cd,
        },
        trace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fallback {
    #[default]
    None,
    /// Replace partial and empty outcomes by a uniformly drawn sense.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisambiguationOptions {
    pub density: DensityParams,
    pub window: usize,
    pub fallback: Fallback,
}

pub const DEFAULT_WINDOW: usize = 30;

impl Default for DisambiguationOptions {
    fn default() -> Self {
        DisambiguationOptions {
            density: DensityParams::default(),
            window: DEFAULT_WINDOW,
            fallback: Fallback::None,
        }
    }
}

/// One assignment per noun, in document order. Windows are independent
/// and evaluated in parallel; fallback draws consume `rng` in document order.
pub fn disambiguate_document<R: Rng>(
    t: &Taxonomy,
    nouns: &[NounOccurrence],
    options: &DisambiguationOptions,
    rng: &mut R,
) -> Result<Vec<Assignment>, WindowError> {
    if nouns.is_empty() {
        return Ok(Vec::new());
    }
    let mut assignments = (0..nouns.len())
        .into_par_iter()
        .map(|target| {
            let window = build_window(nouns, target, options.window)?;
            Ok(disambiguate_window(t, nouns, &window, &options.density).assignment)
        })
        .collect::<Result<Vec<_>, WindowError>>()?;

    if options.fallback == Fallback::Random {
        for assignment in &mut assignments {
            apply_random_fallback(t, assignment, rng);
        }
    }
    Ok(assignments)
}

fn apply_random_fallback<R: Rng>(t: &Taxonomy, assignment: &mut Assignment, rng: &mut R) {
    let pool: Vec<SynsetIdx> = match &assignment.outcome {
        Outcome::Partial(set) => set.clone(),
        Outcome::None => t.senses_of(&assignment.occurrence.lemma).to_vec(),
        Outcome::Full(_) | Outcome::Category(_) => return,
    };
    if pool.is_empty() {
        return;
    }
    assignment.outcome = Outcome::Full(pool[rng.gen_range(0..pool.len())]);
    assignment.method = Method::Fallback;
    assignment.winning_cd = None;
}

/// Formats one assignment line:
/// `position TAB lemma TAB outcome TAB sense_keys TAB method TAB cd`.
///
/// Sense keys are `lexfile.lex_id`, comma-separated; absent fields are `-`.
pub fn format_assignment(t: &Taxonomy, a: &Assignment) -> String {
    let keys = match &a.outcome {
        Outcome::Full(s) => key_string(t, *s, &a.occurrence.lemma),
        Outcome::Partial(set) => set
            .iter()
            .map(|&s| key_string(t, s, &a.occurrence.lemma))
            .collect::<Vec<_>>()
            .join(","),
        Outcome::None => "-".to_string(),
        Outcome::Category(c) => c.clone(),
    };
    let cd = a.winning_cd.map_or_else(|| "-".to_string(), |cd| format!("{cd:.6}"));
    let mut line = String::new();
    let _ = write!(
        line,
        "{}\t{}\t{}\t{}\t{}\t{}",
        a.occurrence.doc_position,
        a.occurrence.lemma,
        a.outcome.label(),
        keys,
        a.method.label(),
        cd
    );
    line
}

fn key_string(t: &Taxonomy, sense: SynsetIdx, lemma: &str) -> String {
    t.sense_key(sense, lemma)
        .map_or_else(|| t.id(sense).to_string(), |k| k.to_string())
}

pub fn write_assignments<W: Write>(mut out: W, t: &Taxonomy, assignments: &[Assignment]) -> io::Result<()> {
    for a in assignments {
        writeln!(out, "{}", format_assignment(t, a))?;
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum AssignmentParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads assignment lines back. `#` lines separate documents; each
/// returned group is one document.
pub fn read_assignments<R: BufRead>(reader: R, t: &Taxonomy) -> Result<Vec<Vec<Assignment>>, AssignmentParseError> {
    let mut documents: Vec<Vec<Assignment>> = Vec::new();
    let mut current: Option<Vec<Assignment>> = None;
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let err = |message: String| AssignmentParseError::Syntax { line: line_no, message };
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('#') {
            documents.extend(current.take());
            current = Some(Vec::new());
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let doc_position = fields[0]
            .parse()
            .map_err(|_| err(format!("bad position `{}`", fields[0])))?;
        let lemma = fields[1].to_string();
        let resolve = |key: &str| -> Result<SynsetIdx, AssignmentParseError> {
            SenseKey::parse(key)
                .and_then(|k| t.resolve_key(&lemma, &k))
                .or_else(|| t.lookup(key).ok())
                .ok_or_else(|| err(format!("unknown sense `{key}` for `{lemma}`")))
        };
        let outcome = match fields[2] {
            "full" => Outcome::Full(resolve(fields[3])?),
            "partial" => Outcome::Partial(fields[3].split(',').map(resolve).collect::<Result<_, _>>()?),
            "none" => Outcome::None,
            "category" => Outcome::Category(fields[3].to_string()),
            other => return Err(err(format!("unknown outcome `{other}`"))),
        };
        let method = Method::from_label(fields[4]).ok_or_else(|| err(format!("unknown method `{}`", fields[4])))?;
        let winning_cd = match fields[5] {
            "-" => None,
            v => Some(v.parse().map_err(|_| err(format!("bad cd `{v}`")))?),
        };
        current.get_or_insert_with(Vec::new).push(Assignment {
            occurrence: NounOccurrence::new(doc_position, lemma, 0),
            outcome,
            method,
            winning_cd,
        });
    }
    documents.extend(current);
    Ok(documents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{load_taxonomy, RelationMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nouns(lemmas: &[&str]) -> Vec<NounOccurrence> {
        lemmas
            .iter()
            .enumerate()
            .map(|(i, l)| NounOccurrence::new(i, *l, 0))
            .collect()
    }

    #[test]
    fn window_edges() {
        let one = nouns(&["a"]);
        assert_eq!(build_window(&one, 0, 3).unwrap().members, vec![0]);

        let ten = nouns(&["x"; 10]);
        assert_eq!(build_window(&ten, 0, 5).unwrap().members, vec![0, 1, 2, 3, 4]);
        assert_eq!(build_window(&ten, 9, 5).unwrap().members, vec![5, 6, 7, 8, 9]);

        let eleven = nouns(&["x"; 11]);
        assert_eq!(build_window(&eleven, 5, 5).unwrap().members, vec![3, 4, 5, 6, 7]);
        // even sizes lean forward
        assert_eq!(build_window(&eleven, 5, 4).unwrap().members, vec![4, 5, 6, 7]);

        assert_eq!(build_window(&[], 0, 3), Err(WindowError::Empty));
        assert_eq!(build_window(&ten, 0, 0), Err(WindowError::ZeroSize));
        assert!(build_window(&ten, 10, 3).is_err());
    }

    const SMALL: &str = "\
S\tr\tnoun.Tops\tthing:0
S\ta\tnoun.artifact\tdevice:0
S\ta1\tnoun.artifact\tkey:0
S\ta2\tnoun.artifact\tlock:0
S\tb\tnoun.plant\tplant:0
S\tb1\tnoun.plant\tkey:1
S\tc\tnoun.state\tlock:1
S\td\tnoun.state\tcalm:0
H\ta\tr
H\tb\tr
H\ta1\ta
H\ta2\ta
H\tb1\tb
";

    #[test]
    fn monosemous_and_lonely_targets() {
        let t = load_taxonomy(SMALL.as_bytes(), RelationMode::HypernymyOnly).unwrap();
        let p = DensityParams::default();
        let doc = nouns(&["calm", "key"]);
        let w = build_window(&doc, 0, 3).unwrap();
        let r = disambiguate_window(&t, &doc, &w, &p);
        assert_eq!(r.assignment.method, Method::Monosemous);
        assert!(r.trace.is_empty());

        let single = nouns(&["key"]);
        let w = build_window(&single, 0, 3).unwrap();
        assert_eq!(disambiguate_window(&t, &single, &w, &p).assignment.outcome, Outcome::None);
    }

    #[test]
    fn key_and_lock_resolve_to_artifacts() {
        let t = load_taxonomy(SMALL.as_bytes(), RelationMode::HypernymyOnly).unwrap();
        let p = DensityParams::default();
        let doc = nouns(&["key", "lock"]);
        let w = build_window(&doc, 0, 3).unwrap();
        let r = disambiguate_window(&t, &doc, &w, &p);
        assert_eq!(r.assignment.outcome, Outcome::Full(t.lookup("a1").unwrap()));
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0].concept, t.lookup("a").unwrap());
        assert_eq!(r.assignment.winning_cd, Some(r.trace[0].cd));
    }

    #[test]
    fn fallback_fills_every_gap() {
        let t = load_taxonomy(SMALL.as_bytes(), RelationMode::HypernymyOnly).unwrap();
        let doc = nouns(&["key", "calm", "calm", "calm", "calm", "lock"]);
        let options = DisambiguationOptions {
            window: 3,
            fallback: Fallback::Random,
            ..DisambiguationOptions::default()
        };
        let a = disambiguate_document(&t, &doc, &options, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a.len(), doc.len());
        assert!(a.iter().all(|x| matches!(x.outcome, Outcome::Full(_))));
        assert_eq!(a[0].method, Method::Fallback);
        let b = disambiguate_document(&t, &doc, &options, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn assignment_lines_round_trip() {
        let t = load_taxonomy(SMALL.as_bytes(), RelationMode::HypernymyOnly).unwrap();
        let doc = nouns(&["key", "lock", "calm"]);
        let options = DisambiguationOptions {
            window: 3,
            ..DisambiguationOptions::default()
        };
        let a = disambiguate_document(&t, &doc, &options, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mut buf = Vec::new();
        write_assignments(&mut buf, &t, &a).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("0\tkey\tfull\tnoun.artifact.0\tcd\t"), "{text}");
        assert!(text.ends_with("2\tcalm\tfull\tnoun.state.0\tmonosemous\t-\n"));
        let back = read_assignments(buf.as_slice(), &t).unwrap();
        assert_eq!(back.len(), 1);
        let outcomes: Vec<_> = back[0].iter().map(|x| x.outcome.clone()).collect();
        assert_eq!(outcomes, a.iter().map(|x| x.outcome.clone()).collect::<Vec<_>>());
    }
}
