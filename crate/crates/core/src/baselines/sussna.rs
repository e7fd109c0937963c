//! Shortest-path conceptual distance over the undirected hypernym and
//! meronym graph, with every edge weighing 1.
//!
//! The first nouns of a document are assigned jointly by minimizing the
//! summed pairwise distance of their senses (the mutual constraint). Each
//! later noun takes the sense closest to the frozen senses of the nouns
//! before it. Ties are broken uniformly at random.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;

use crate::disambiguator::{Assignment, Method, NounOccurrence, Outcome};
use crate::taxonomy::{SynsetIdx, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SussnaOptions {
    /// Nouns considered when scoring a later noun, the noun itself included.
    pub window: usize,
    /// Number of leading nouns assigned jointly.
    pub mutual: usize,
}

impl Default for SussnaOptions {
    fn default() -> Self {
        SussnaOptions { window: 41, mutual: 10 }
    }
}

fn neighbours(t: &Taxonomy, node: SynsetIdx) -> impl Iterator<Item = SynsetIdx> + '_ {
    let s = t.synset(node);
    s.hypernyms
        .iter()
        .chain(t.hyponyms(node))
        .chain(&s.meronyms)
        .chain(t.holonyms(node))
        .copied()
}

/// Unweighted shortest-path length; `None` when no path exists.
pub fn conceptual_distance(t: &Taxonomy, a: SynsetIdx, b: SynsetIdx) -> Option<u32> {
    DistanceCache::new(t).distance(a, b)
}

/// Memoized distances. Disconnected pairs cost the taxonomy size.
pub struct DistanceCache<'a> {
    t: &'a Taxonomy,
    known: HashMap<(SynsetIdx, SynsetIdx), Option<u32>>,
}

impl<'a> DistanceCache<'a> {
    pub fn new(t: &'a Taxonomy) -> Self {
        DistanceCache {
            t,
            known: HashMap::new(),
        }
    }

    pub fn penalty(&self) -> u64 {
        self.t.len() as u64
    }

    pub fn distance(&mut self, a: SynsetIdx, b: SynsetIdx) -> Option<u32> {
        if a == b {
            return Some(0);
        }
        if let Some(d) = self.known.get(&(a, b)) {
            return *d;
        }
        self.prepare(a, &[b]);
        self.known[&(a, b)]
    }

    /// Distance with disconnected pairs mapped to [`DistanceCache::penalty`].
    pub fn cost(&mut self, a: SynsetIdx, b: SynsetIdx) -> u64 {
        self.distance(a, b).map_or_else(|| self.penalty(), u64::from)
    }

    /// One breadth-first search from `from` that settles every target not
    /// already known.
    pub fn prepare(&mut self, from: SynsetIdx, targets: &[SynsetIdx]) {
        let mut wanted: HashSet<SynsetIdx> = targets
            .iter()
            .copied()
            .filter(|&x| x != from && !self.known.contains_key(&(from, x)))
            .collect();
        if wanted.is_empty() {
            return;
        }
        let mut depth = vec![u32::MAX; self.t.len()];
        depth[from.index()] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            let d = depth[node.index()];
            if wanted.remove(&node) {
                self.known.insert((from, node), Some(d));
                self.known.insert((node, from), Some(d));
                if wanted.is_empty() {
                    return;
                }
            }
            for n in neighbours(self.t, node) {
                if depth[n.index()] == u32::MAX {
                    depth[n.index()] = d + 1;
                    queue.push_back(n);
                }
            }
        }
        for x in wanted {
            self.known.insert((from, x), None);
            self.known.insert((x, from), None);
        }
    }
}

struct Search<'r, R> {
    costs: Vec<Vec<Vec<Vec<u64>>>>,
    sizes: Vec<usize>,
    /// Lower bound on the pairwise cost among nouns `d..`.
    tail_pairs: Vec<u64>,
    /// `partial[r][s]`: cost of sense `s` of noun `r` against the choices so far.
    partial: Vec<Vec<u64>>,
    choice: Vec<usize>,
    best: Option<(u64, Vec<usize>)>,
    ties: u64,
    rng: &'r mut R,
}

impl<R: Rng> Search<'_, R> {
    fn run(&mut self, depth: usize, so_far: u64) {
        let k = self.sizes.len();
        if depth == k {
            match &self.best {
                Some((b, _)) if so_far > *b => {}
                Some((b, _)) if so_far == *b => {
                    self.ties += 1;
                    if self.rng.gen_range(0..self.ties) == 0 {
                        self.best = Some((so_far, self.choice.clone()));
                    }
                }
                _ => {
                    self.ties = 1;
                    self.best = Some((so_far, self.choice.clone()));
                }
            }
            return;
        }
        for s in 0..self.sizes[depth] {
            let cost = so_far + self.partial[depth][s];
            for r in depth + 1..k {
                for t in 0..self.sizes[r] {
                    self.partial[r][t] += self.costs[depth][r][s][t];
                }
            }
            let bound = cost
                + (depth + 1..k)
                    .map(|r| self.partial[r].iter().copied().min().unwrap_or(0))
                    .sum::<u64>()
                + self.tail_pairs[depth + 1];
            if self.best.as_ref().is_none_or(|(b, _)| bound <= *b) {
                self.choice[depth] = s;
                self.run(depth + 1, cost);
            }
            for r in depth + 1..k {
                for t in 0..self.sizes[r] {
                    self.partial[r][t] -= self.costs[depth][r][s][t];
                }
            }
        }
    }
}

/// Jointly assigns one sense per set, minimizing the summed pairwise cost.
/// The search is exact (branch and bound); among equally good combinations
/// one is drawn uniformly.
///
/// Every set must be non-empty.
pub fn mutual_constraint<R: Rng>(cache: &mut DistanceCache<'_>, sets: &[Vec<SynsetIdx>], rng: &mut R) -> Vec<SynsetIdx> {
    let k = sets.len();
    if k == 0 {
        return Vec::new();
    }
    assert!(sets.iter().all(|s| !s.is_empty()), "every noun needs at least one sense");
    let everything: Vec<SynsetIdx> = sets.iter().flatten().copied().collect();
    for &s in &everything {
        cache.prepare(s, &everything);
    }

    let mut costs = vec![vec![Vec::new(); k]; k];
    let mut min_pair = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let m: Vec<Vec<u64>> = sets[i]
                .iter()
                .map(|&a| sets[j].iter().map(|&b| cache.cost(a, b)).collect())
                .collect();
            min_pair[i][j] = m.iter().flatten().copied().min().unwrap_or(0);
            costs[i][j] = m;
        }
    }
    let mut tail_pairs = vec![0u64; k + 1];
    for d in (0..k).rev() {
        tail_pairs[d] = tail_pairs[d + 1] + (d + 1..k).map(|j| min_pair[d][j]).sum::<u64>();
    }

    let mut search = Search {
        costs,
        sizes: sets.iter().map(Vec::len).collect(),
        tail_pairs,
        partial: sets.iter().map(|s| vec![0; s.len()]).collect(),
        choice: vec![0; k],
        best: None,
        ties: 0,
        rng,
    };
    search.run(0, 0);
    let (_, choice) = search.best.expect("search visits at least one combination");
    choice.iter().enumerate().map(|(i, &c)| sets[i][c]).collect()
}

pub fn sussna_baseline<R: Rng>(t: &Taxonomy, nouns: &[NounOccurrence], options: &SussnaOptions, rng: &mut R) -> Vec<Assignment> {
    let sets: Vec<Vec<SynsetIdx>> = nouns.iter().map(|n| t.senses_of(&n.lemma).to_vec()).collect();
    let mut cache = DistanceCache::new(t);
    let mut chosen: Vec<Option<SynsetIdx>> = vec![None; nouns.len()];

    // leading nouns with senses, jointly
    let lead: Vec<usize> = (0..nouns.len().min(options.mutual))
        .filter(|&i| !sets[i].is_empty())
        .collect();
    let lead_sets: Vec<Vec<SynsetIdx>> = lead.iter().map(|&i| sets[i].clone()).collect();
    for (&i, s) in lead.iter().zip(mutual_constraint(&mut cache, &lead_sets, rng)) {
        chosen[i] = Some(s);
    }

    let reach = options.window.saturating_sub(1);
    for i in options.mutual.min(nouns.len())..nouns.len() {
        if sets[i].is_empty() {
            continue;
        }
        let context: Vec<SynsetIdx> = chosen[i.saturating_sub(reach)..i].iter().flatten().copied().collect();
        let mut best_cost = u64::MAX;
        let mut ties = Vec::new();
        for &s in &sets[i] {
            cache.prepare(s, &context);
            let c: u64 = context.iter().map(|&f| cache.cost(s, f)).sum();
            if c < best_cost {
                best_cost = c;
                ties.clear();
            }
            if c == best_cost {
                ties.push(s);
            }
        }
        let pick = if ties.len() > 1 {
            ties[rng.gen_range(0..ties.len())]
        } else {
            ties[0]
        };
        chosen[i] = Some(pick);
    }

    nouns
        .iter()
        .zip(chosen)
        .map(|(n, c)| Assignment {
            occurrence: n.clone(),
            outcome: c.map_or(Outcome::None, Outcome::Full),
            method: Method::Sussna,
            winning_cd: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{load_taxonomy, RelationMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // r
    // ├── m (music): m1 bass:0, m2 drum:0, m3 horn:0
    // └── f (fish):  f1 bass:1, f2 drum:1
    //                h  horn:1, part of f
    // x (isolated): horn:2
    const TAX: &str = "\
S\tr\tn.t\troot:0
S\tm\tn.m\tmusic:0
S\tm1\tn.m\tbass:0
S\tm2\tn.m\tdrum:0
S\tm3\tn.m\thorn:0
S\tf\tn.f\tfish:0
S\tf1\tn.f\tbass:1
S\tf2\tn.f\tdrum:1
S\th\tn.f\thorn:1
S\tx\tn.x\thorn:2
H\tm\tr
H\tf\tr
H\tm1\tm
H\tm2\tm
H\tm3\tm
H\tf1\tf
H\tf2\tf
M\tf\th
";

    fn tax() -> Taxonomy {
        load_taxonomy(TAX.as_bytes(), RelationMode::HypernymyOnly).unwrap()
    }

    #[test]
    fn distances() {
        let t = tax();
        let id = |s: &str| t.lookup(s).unwrap();
        assert_eq!(conceptual_distance(&t, id("m1"), id("m1")), Some(0));
        assert_eq!(conceptual_distance(&t, id("m"), id("m1")), Some(1));
        assert_eq!(conceptual_distance(&t, id("m1"), id("f1")), Some(4));
        // meronym edge counts regardless of relation mode
        assert_eq!(conceptual_distance(&t, id("h"), id("f1")), Some(2));
        assert_eq!(conceptual_distance(&t, id("x"), id("r")), None);
        let mut cache = DistanceCache::new(&t);
        assert_eq!(cache.cost(id("x"), id("r")), t.len() as u64);
    }

    #[test]
    fn three_nouns_match_enumeration() {
        let t = tax();
        let sets: Vec<Vec<SynsetIdx>> = ["bass", "drum", "horn"].iter().map(|l| t.senses_of(l).to_vec()).collect();
        let mut cache = DistanceCache::new(&t);
        let mut best = u64::MAX;
        let mut argmin = Vec::new();
        for &a in &sets[0] {
            for &b in &sets[1] {
                for &c in &sets[2] {
                    let cost = cache.cost(a, b) + cache.cost(a, c) + cache.cost(b, c);
                    if cost < best {
                        best = cost;
                        argmin.clear();
                    }
                    if cost == best {
                        argmin.push(vec![a, b, c]);
                    }
                }
            }
        }
        // all music: 2+2+2; fish with horn part of f: 2+2+2 as well
        assert_eq!(best, 6);
        assert_eq!(argmin.len(), 2);
        let mut seen = HashSet::new();
        for seed in 0..40 {
            let got = mutual_constraint(&mut cache, &sets, &mut ChaCha8Rng::seed_from_u64(seed));
            assert!(argmin.contains(&got));
            seen.insert(got);
        }
        assert_eq!(seen.len(), 2, "both optimal combinations should be drawn");
    }

    #[test]
    fn later_nouns_follow_frozen_context() {
        let t = tax();
        let nouns: Vec<NounOccurrence> = ["music", "bass", "drum"]
            .iter()
            .enumerate()
            .map(|(i, l)| NounOccurrence::new(i, *l, 0))
            .collect();
        let options = SussnaOptions { window: 41, mutual: 2 };
        let a = sussna_baseline(&t, &nouns, &options, &mut ChaCha8Rng::seed_from_u64(1));
        let id = |s: &str| t.lookup(s).unwrap();
        assert_eq!(a[1].outcome, Outcome::Full(id("m1")));
        assert_eq!(a[2].outcome, Outcome::Full(id("m2")));
        assert!(a.iter().all(|x| x.method == Method::Sussna));
    }
}
