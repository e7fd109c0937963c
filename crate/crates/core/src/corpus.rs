//! Readers for sense-tagged SemCor text and plain lemma lists, noun
//! extraction and per-text statistics.
//!
//! The SemCor subset understood here is line oriented:
//!
//! ```text
//! <s>
//! <wd>jury</wd><sn>[noun.group.0]</sn><tag>NN</tag>
//! <wd>prison_farms</wd><mwd>prison_farm</mwd><msn>[noun.artifact.0]</msn><tag>NN</tag>
//! </s>
//! ```

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::disambiguator::NounOccurrence;
use crate::taxonomy::{SenseKey, SynsetIdx, Taxonomy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemcorToken {
    pub wordform: String,
    /// Multiword lemma from `<mwd>`, verbatim.
    pub multiword: Option<String>,
    /// Lowercased `<mwd>` content when present, else lowercased wordform.
    pub lemma: String,
    pub sense_key: Option<SenseKey>,
    /// The key came from `<msn>` rather than `<sn>`.
    pub multiword_sense: bool,
    pub pos: Option<String>,
}

impl SemcorToken {
    pub fn is_noun(&self) -> bool {
        self.pos.as_deref().is_some_and(|p| p.starts_with("NN"))
    }

    /// Punctuation tokens do not count as words.
    pub fn is_word(&self) -> bool {
        self.wordform.chars().any(char::is_alphanumeric)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Vec<SemcorToken>>,
}

impl Document {
    pub fn tokens(&self) -> impl Iterator<Item = &SemcorToken> {
        self.sentences.iter().flatten()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: sense key `{text}` does not match [lexfile.digits]")]
    BadSenseKey { line: usize, text: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn malformed(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Malformed {
        line,
        message: message.into(),
    }
}

/// Splits a token line into `(element, content)` pairs.
fn elements(line_no: usize, line: &str) -> Result<Vec<(&str, &str)>, CorpusError> {
    let mut out = Vec::new();
    let mut rest = line.trim();
    while !rest.is_empty() {
        let Some(after_lt) = rest.strip_prefix('<') else {
            return Err(malformed(line_no, format!("text outside of an element: `{rest}`")));
        };
        let close = after_lt
            .find('>')
            .ok_or_else(|| malformed(line_no, "unterminated tag"))?;
        let name = &after_lt[..close];
        if name.starts_with('/') {
            return Err(malformed(line_no, format!("unexpected closing tag <{name}>")));
        }
        if !matches!(name, "wd" | "mwd" | "sn" | "msn" | "tag") {
            return Err(malformed(line_no, format!("unsupported element <{name}>")));
        }
        let body = &after_lt[close + 1..];
        let end = body
            .find('<')
            .ok_or_else(|| malformed(line_no, format!("<{name}> is never closed")))?;
        let content = &body[..end];
        let closing = format!("</{name}>");
        let Some(tail) = body[end..].strip_prefix(closing.as_str()) else {
            return Err(malformed(line_no, format!("<{name}> must be closed by {closing}")));
        };
        out.push((name, content));
        rest = tail.trim_start();
    }
    Ok(out)
}

fn parse_sense_key(line_no: usize, text: &str) -> Result<SenseKey, CorpusError> {
    text.strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .and_then(SenseKey::parse)
        .ok_or_else(|| CorpusError::BadSenseKey {
            line: line_no,
            text: text.to_string(),
        })
}

fn parse_token(line_no: usize, line: &str) -> Result<SemcorToken, CorpusError> {
    let mut wordform = None;
    let mut multiword = None;
    let mut sense = None;
    let mut pos = None;
    for (name, content) in elements(line_no, line)? {
        let duplicate = match name {
            "wd" => wordform.replace(content.to_string()).is_some(),
            "mwd" => multiword.replace(content.to_string()).is_some(),
            "sn" | "msn" => sense
                .replace((parse_sense_key(line_no, content)?, name == "msn"))
                .is_some(),
            _ => pos.replace(content.to_string()).is_some(),
        };
        if duplicate {
            return Err(malformed(line_no, format!("repeated <{name}> in one token")));
        }
    }
    let wordform = wordform.ok_or_else(|| malformed(line_no, "token without <wd>"))?;
    let lemma = multiword.as_deref().unwrap_or(&wordform).to_lowercase();
    let (sense_key, multiword_sense) = match sense {
        Some((key, msn)) => (Some(key), msn),
        None => (None, false),
    };
    Ok(SemcorToken {
        wordform,
        multiword,
        lemma,
        sense_key,
        multiword_sense,
        pos,
    })
}

pub fn parse_semcor<R: BufRead>(reader: R, id: impl Into<String>) -> Result<Document, CorpusError> {
    let mut doc = Document {
        id: id.into(),
        sentences: Vec::new(),
    };
    let mut open: Option<(usize, Vec<SemcorToken>)> = None;
    let mut line_no = 0;
    for line in reader.lines() {
        line_no += 1;
        let line = line?;
        let trimmed = line.trim();
        match trimmed {
            "" => {}
            "<s>" => {
                if let Some((start, _)) = open {
                    return Err(malformed(line_no, format!("<s> opened while sentence from line {start} is open")));
                }
                open = Some((line_no, Vec::new()));
            }
            "</s>" => {
                let (_, tokens) = open
                    .take()
                    .ok_or_else(|| malformed(line_no, "</s> without matching <s>"))?;
                doc.sentences.push(tokens);
            }
            _ => {
                let token = parse_token(line_no, trimmed)?;
                match open.as_mut() {
                    Some((_, tokens)) => tokens.push(token),
                    None => return Err(malformed(line_no, "token outside of a sentence")),
                }
            }
        }
    }
    if let Some((start, _)) = open {
        return Err(malformed(start, "sentence is never closed"));
    }
    Ok(doc)
}

/// Serializes a document in canonical element order
/// (`wd`, `mwd`, `sn`/`msn`, `tag`).
pub fn write_semcor<W: Write>(mut out: W, doc: &Document) -> io::Result<()> {
    for sentence in &doc.sentences {
        writeln!(out, "<s>")?;
        for token in sentence {
            let mut line = format!("<wd>{}</wd>", token.wordform);
            if let Some(m) = &token.multiword {
                let _ = write!(line, "<mwd>{m}</mwd>");
            }
            if let Some(key) = &token.sense_key {
                let tag = if token.multiword_sense { "msn" } else { "sn" };
                let _ = write!(line, "<{tag}>[{key}]</{tag}>");
            }
            if let Some(pos) = &token.pos {
                let _ = write!(line, "<tag>{pos}</tag>");
            }
            writeln!(out, "{line}")?;
        }
        writeln!(out, "</s>")?;
    }
    Ok(())
}

/// Gold annotation of one extracted noun.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldTag {
    pub key: Option<SenseKey>,
    /// The synset the key resolves to, when it resolves.
    pub synset: Option<SynsetIdx>,
}

/// In-vocabulary nouns of a document with their gold tags.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NounStream {
    pub id: String,
    pub nouns: Vec<NounOccurrence>,
    /// Parallel to `nouns`; empty for untagged input.
    pub gold: Vec<GoldTag>,
    pub out_of_vocabulary: usize,
    /// Gold keys that are present but do not resolve to a synset.
    pub unresolved_gold: usize,
}

impl NounStream {
    pub fn has_gold(&self) -> bool {
        !self.nouns.is_empty() && self.gold.len() == self.nouns.len() && self.gold.iter().any(|g| g.key.is_some())
    }
}

pub fn extract_nouns(doc: &Document, t: &Taxonomy) -> NounStream {
    let mut stream = NounStream {
        id: doc.id.clone(),
        ..NounStream::default()
    };
    for (sentence_id, sentence) in doc.sentences.iter().enumerate() {
        for token in sentence.iter().filter(|t| t.is_noun()) {
            if !t.contains_lemma(&token.lemma) {
                stream.out_of_vocabulary += 1;
                continue;
            }
            let synset = token.sense_key.as_ref().and_then(|k| t.resolve_key(&token.lemma, k));
            if token.sense_key.is_some() && synset.is_none() {
                stream.unresolved_gold += 1;
            }
            stream
                .nouns
                .push(NounOccurrence::new(stream.nouns.len(), token.lemma.clone(), sentence_id));
            stream.gold.push(GoldTag {
                key: token.sense_key.clone(),
                synset,
            });
        }
    }
    stream
}

/// Whitespace-separated lemmas, one sentence per line; blank lines skipped.
pub fn parse_plain<R: BufRead>(reader: R) -> Result<Vec<NounOccurrence>, io::Error> {
    let mut nouns = Vec::new();
    let mut sentence_id = 0;
    for line in reader.lines() {
        let line = line?;
        let mut any = false;
        for lemma in line.split_whitespace() {
            nouns.push(NounOccurrence::new(nouns.len(), lemma, sentence_id));
            any = true;
        }
        if any {
            sentence_id += 1;
        }
    }
    Ok(nouns)
}

/// Drops lemmas the taxonomy does not know and renumbers positions.
/// Returns the kept nouns and the number dropped.
pub fn retain_in_vocabulary(nouns: Vec<NounOccurrence>, t: &Taxonomy) -> (Vec<NounOccurrence>, usize) {
    let total = nouns.len();
    let kept: Vec<NounOccurrence> = nouns
        .into_iter()
        .filter(|n| t.contains_lemma(&n.lemma))
        .enumerate()
        .map(|(i, mut n)| {
            n.doc_position = i;
            n
        })
        .collect();
    let dropped = total - kept.len();
    (kept, dropped)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub words: usize,
    pub nouns: usize,
    pub nouns_in_taxonomy: usize,
    pub monosemous: usize,
}

impl CorpusStats {
    /// Monosemous share of in-taxonomy nouns as a whole percent, rounded half up.
    pub fn monosemous_percent(&self) -> Option<usize> {
        (self.nouns_in_taxonomy > 0).then(|| (200 * self.monosemous + self.nouns_in_taxonomy) / (2 * self.nouns_in_taxonomy))
    }

    pub fn add(&mut self, other: &CorpusStats) {
        self.words += other.words;
        self.nouns += other.nouns;
        self.nouns_in_taxonomy += other.nouns_in_taxonomy;
        self.monosemous += other.monosemous;
    }
}

pub fn corpus_stats(doc: &Document, t: &Taxonomy) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for token in doc.tokens() {
        if token.is_word() {
            stats.words += 1;
        }
        if !token.is_noun() {
            continue;
        }
        stats.nouns += 1;
        match t.polysemy(&token.lemma) {
            0 => {}
            1 => {
                stats.nouns_in_taxonomy += 1;
                stats.monosemous += 1;
            }
            _ => stats.nouns_in_taxonomy += 1,
        }
    }
    stats
}

/// Tab-separated statistics table: one row per text, plus a total row
/// when there is more than one.
pub fn format_stats_table(rows: &[(String, CorpusStats)]) -> String {
    let mut out = String::from("text\twords\tnouns\tnouns_in_taxonomy\tmonosemous\n");
    let row = |out: &mut String, name: &str, s: &CorpusStats| {
        let percent = s.monosemous_percent().map_or_else(|| "-".to_string(), |p| format!("{p}%"));
        let _ = writeln!(
            out,
            "{name}\t{}\t{}\t{}\t{} ({percent})",
            s.words, s.nouns, s.nouns_in_taxonomy, s.monosemous
        );
    };
    let mut total = CorpusStats::default();
    for (name, stats) in rows {
        row(&mut out, name, stats);
        total.add(stats);
    }
    if rows.len() > 1 {
        row(&mut out, "total", &total);
    }
    out
}
