//! Test support: random taxonomies and documents, plus a deliberately naive
//! reference implementation of the density computations.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::PathBuf;

use conceptual_density::corpus::{Document, SemcorToken};
use conceptual_density::{load_taxonomy, RelationMode, SenseKey, Taxonomy};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load_fixture(name: &str, mode: RelationMode) -> Taxonomy {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture readable");
    load_taxonomy(text.as_bytes(), mode).expect("fixture loads")
}

/// A generated taxonomy. Node `i` has id `s{i:04}`, so node numbers and
/// `SynsetIdx` order agree. All edges point from a lower to a higher node.
#[derive(Debug, Clone)]
pub struct Generated {
    pub tif: String,
    /// Parents of each node.
    pub hypernyms: Vec<Vec<usize>>,
    /// Parts of each node.
    pub meronyms: Vec<Vec<usize>>,
    /// (lemma, lexfile, lex_id) per node.
    pub lemmas: Vec<Vec<(String, String, u32)>>,
}

impl Generated {
    pub fn len(&self) -> usize {
        self.hypernyms.len()
    }

    pub fn load(&self, mode: RelationMode) -> Taxonomy {
        load_taxonomy(self.tif.as_bytes(), mode).expect("generated taxonomy loads")
    }

    /// Lemmas that name at least one node.
    pub fn vocabulary(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.lemmas.iter().flatten().map(|(l, _, _)| l).collect();
        set.into_iter().cloned().collect()
    }

    pub fn senses(&self, lemma: &str) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.lemmas[i].iter().any(|(l, _, _)| l == lemma))
            .collect()
    }

    pub fn key_of(&self, node: usize, lemma: &str) -> SenseKey {
        let (_, lexfile, lex_id) = self.lemmas[node]
            .iter()
            .find(|(l, _, _)| l == lemma)
            .expect("lemma names node");
        SenseKey::new(lexfile.clone(), *lex_id)
    }
}

pub fn random_taxonomy<R: Rng>(rng: &mut R, max_synsets: usize, with_meronyms: bool) -> Generated {
    let n = rng.gen_range(2..=max_synsets);
    let mut hypernyms = vec![Vec::new(); n];
    for (i, parents) in hypernyms.iter_mut().enumerate().skip(1) {
        if rng.gen_bool(0.05) {
            continue;
        }
        let k = if i > 1 && rng.gen_bool(0.15) { 2 } else { 1 };
        let mut pool: Vec<usize> = (0..i).collect();
        pool.shuffle(rng);
        parents.extend(pool.into_iter().take(k));
        parents.sort_unstable();
    }
    let mut meronyms = vec![Vec::new(); n];
    if with_meronyms {
        for (i, parts) in meronyms.iter_mut().enumerate().take(n - 1) {
            if rng.gen_bool(0.2) {
                parts.push(rng.gen_range(i + 1..n));
            }
        }
    }

    let pool_size = (n / 3).max(2);
    let lexfiles = ["noun.artifact", "noun.animal", "noun.act", "noun.group"];
    let mut next_id: BTreeMap<(String, String), u32> = BTreeMap::new();
    let mut lemmas = Vec::with_capacity(n);
    for i in 0..n {
        let lexfile = lexfiles[i % lexfiles.len()].to_string();
        let mut words: Vec<String> = (0..rng.gen_range(1..=2))
            .map(|_| format!("w{}", rng.gen_range(0..pool_size)))
            .collect();
        words.sort();
        words.dedup();
        lemmas.push(
            words
                .into_iter()
                .map(|w| {
                    let id = next_id.entry((w.clone(), lexfile.clone())).or_insert(0);
                    *id += 1;
                    (w, lexfile.clone(), *id - 1)
                })
                .collect::<Vec<_>>(),
        );
    }

    let mut tif = String::from("# generated\n");
    for (i, ls) in lemmas.iter().enumerate() {
        let list: Vec<String> = ls.iter().map(|(l, _, id)| format!("{l}:{id}")).collect();
        writeln!(tif, "S\ts{i:04}\t{}\t{}", lexfiles[i % lexfiles.len()], list.join(",")).unwrap();
    }
    for (i, parents) in hypernyms.iter().enumerate() {
        for p in parents {
            writeln!(tif, "H\ts{i:04}\ts{p:04}").unwrap();
        }
    }
    for (i, parts) in meronyms.iter().enumerate() {
        for p in parts {
            writeln!(tif, "M\ts{i:04}\ts{p:04}").unwrap();
        }
    }
    Generated {
        tif,
        hypernyms,
        meronyms,
        lemmas,
    }
}

/// A random window of in-vocabulary lemmas, repeats allowed.
pub fn random_window<R: Rng>(rng: &mut R, g: &Generated, max_len: usize) -> Vec<String> {
    let vocabulary = g.vocabulary();
    (0..rng.gen_range(1..=max_len))
        .map(|_| vocabulary.choose(rng).unwrap().clone())
        .collect()
}

/// A SemCor document over `g` with a random gold sense on every noun, some
/// non-noun filler and some out-of-vocabulary nouns.
pub fn random_document<R: Rng>(rng: &mut R, g: &Generated, nouns: usize, id: &str) -> Document {
    let vocabulary = g.vocabulary();
    let mut sentences = vec![Vec::new()];
    let filler = |word: &str, tag: &str| SemcorToken {
        wordform: word.to_string(),
        multiword: None,
        lemma: word.to_lowercase(),
        sense_key: None,
        multiword_sense: false,
        pos: Some(tag.to_string()),
    };
    for _ in 0..nouns {
        let sentence = sentences.last_mut().unwrap();
        if rng.gen_bool(0.3) {
            sentence.push(filler("the", "DT"));
        }
        if rng.gen_bool(0.05) {
            sentence.push(filler("Zork", "NNP"));
        }
        let lemma = vocabulary.choose(rng).unwrap().clone();
        let sense = *g.senses(&lemma).choose(rng).unwrap();
        sentence.push(SemcorToken {
            wordform: lemma.clone(),
            multiword: None,
            lemma: lemma.clone(),
            sense_key: Some(g.key_of(sense, &lemma)),
            multiword_sense: false,
            pos: Some("NN".into()),
        });
        if rng.gen_bool(0.15) {
            sentence.push(filler(".", "."));
            sentences.push(Vec::new());
        }
    }
    sentences.retain(|s| !s.is_empty());
    Document {
        id: id.to_string(),
        sentences,
    }
}

/// Brute-force counterpart of the taxonomy metrics and candidate scoring.
pub struct Reference {
    pub below: Vec<Vec<bool>>,
    pub height: Vec<usize>,
}

impl Reference {
    pub fn new(g: &Generated, mode: RelationMode) -> Reference {
        let n = g.len();
        let mut children = vec![Vec::new(); n];
        for (child, parents) in g.hypernyms.iter().enumerate() {
            for &p in parents {
                children[p].push(child);
            }
        }
        if mode == RelationMode::HypernymyPlusMeronymy {
            for (whole, parts) in g.meronyms.iter().enumerate() {
                children[whole].extend(parts);
            }
        }
        let below = (0..n)
            .map(|c| {
                let mut seen = vec![false; n];
                let mut stack = vec![c];
                while let Some(x) = stack.pop() {
                    if !seen[x] {
                        seen[x] = true;
                        stack.extend(&children[x]);
                    }
                }
                seen
            })
            .collect();
        // edges only point to higher nodes, so a reverse sweep sees children first
        let mut height = vec![0; n];
        for c in (0..n).rev() {
            height[c] = children[c].iter().map(|&x| height[x] + 1).max().unwrap_or(0);
        }
        Reference { below, height }
    }

    pub fn descendants(&self, c: usize) -> usize {
        self.below[c].iter().filter(|&&b| b).count()
    }

    pub fn global_nhyp(&self) -> f64 {
        bisect(self.below.len(), self.height.iter().copied().max().unwrap_or(0))
    }

    /// (concept, marks, cd) for every concept with at least one mark,
    /// counting each distinct lemma once.
    pub fn scores(&self, g: &Generated, window: &[String], exponent: f64, global: bool) -> Vec<(usize, usize, f64)> {
        let lemmas: BTreeSet<&String> = window.iter().collect();
        let senses: Vec<Vec<usize>> = lemmas.iter().map(|l| g.senses(l)).collect();
        let global_nhyp = self.global_nhyp();
        (0..g.len())
            .filter_map(|c| {
                let marks = senses.iter().flatten().filter(|&&s| self.below[c][s]).count();
                if marks == 0 {
                    return None;
                }
                let d = self.descendants(c);
                let nhyp = if global {
                    global_nhyp
                } else {
                    bisect(d, self.height[c])
                };
                let area: f64 = (0..marks)
                    .map(|i| if i == 0 { 1.0 } else { nhyp.powf((i as f64).powf(exponent)) })
                    .sum();
                Some((c, marks, area / d as f64))
            })
            .collect()
    }
}

pub fn power_sum(x: f64, h: usize) -> f64 {
    (0..=h).map(|i| x.powi(i as i32)).sum()
}

/// Root of Σ_{i=0..h} x^i = size by plain bisection.
pub fn bisect(size: usize, h: usize) -> f64 {
    if h == 0 || size <= 1 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, size as f64);
    for _ in 0..2000 {
        let mid = (lo + hi) / 2.0;
        if mid == lo || mid == hi {
            break;
        }
        if power_sum(mid, h) < size as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

/// Undirected breadth-first distances from `from` over every edge kind.
pub fn bfs_distances(g: &Generated, from: usize) -> Vec<Option<u64>> {
    let n = g.len();
    let mut adjacent = vec![Vec::new(); n];
    for (a, others) in g.hypernyms.iter().chain(&g.meronyms).enumerate() {
        let a = a % n;
        for &b in others {
            adjacent[a].push(b);
            adjacent[b].push(a);
        }
    }
    let mut dist = vec![None; n];
    dist[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &y in &adjacent[x] {
            if dist[y].is_none() {
                dist[y] = Some(dist[x].unwrap() + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}
