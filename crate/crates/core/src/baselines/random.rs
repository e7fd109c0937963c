use rand::Rng;

use super::BaselineError;
use crate::corpus::GoldTag;
use crate::disambiguator::{Assignment, Method, NounOccurrence, Outcome};
use crate::taxonomy::Taxonomy;

/// Picks a uniformly random sense for every noun, drawing in document order.
pub fn random_baseline<R: Rng>(t: &Taxonomy, nouns: &[NounOccurrence], rng: &mut R) -> Vec<Assignment> {
    nouns
        .iter()
        .map(|n| {
            let senses = t.senses_of(&n.lemma);
            let outcome = match senses.len() {
                0 => Outcome::None,
                1 => Outcome::Full(senses[0]),
                k => Outcome::Full(senses[rng.gen_range(0..k)]),
            };
            Assignment {
                occurrence: n.clone(),
                outcome,
                method: Method::Random,
                winning_cd: None,
            }
        })
        .collect()
}

/// Expected precision of random guessing, per level and population.
///
/// Unresolvable gold tags count with expectation 0, matching how the
/// scorer treats answered nouns with unresolvable gold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomExpectation {
    pub sense_all: Option<f64>,
    pub file_all: Option<f64>,
    pub sense_polysemous: Option<f64>,
    pub file_polysemous: Option<f64>,
}

pub fn analytic_random_expectation(
    t: &Taxonomy,
    nouns: &[NounOccurrence],
    gold: &[GoldTag],
) -> Result<RandomExpectation, BaselineError> {
    if nouns.len() != gold.len() {
        return Err(BaselineError::MissingGold {
            nouns: nouns.len(),
            gold: gold.len(),
        });
    }
    // (sum, count) for sense/file × all/polysemous
    let mut acc = [(0.0, 0usize); 4];
    for (n, g) in nouns.iter().zip(gold) {
        let senses = t.senses_of(&n.lemma);
        if senses.is_empty() {
            continue;
        }
        let k = senses.len() as f64;
        let (sense_p, file_p) = match g.synset {
            Some(gold_sense) => {
                let file = t.lexfile(gold_sense);
                let same_file = senses.iter().filter(|s| t.lexfile(**s) == file).count();
                (1.0 / k, same_file as f64 / k)
            }
            None => (0.0, 0.0),
        };
        let mut add = |slot: usize, p: f64| {
            acc[slot].0 += p;
            acc[slot].1 += 1;
        };
        add(0, sense_p);
        add(1, file_p);
        if senses.len() > 1 {
            add(2, sense_p);
            add(3, file_p);
        }
    }
    let mean = |(sum, count): (f64, usize)| (count > 0).then(|| sum / count as f64);
    Ok(RandomExpectation {
        sense_all: mean(acc[0]),
        file_all: mean(acc[1]),
        sense_polysemous: mean(acc[2]),
        file_polysemous: mean(acc[3]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{load_taxonomy, RelationMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TAX: &str = "\
S\ta\tnoun.artifact\tbass:0
S\tb\tnoun.animal\tbass:0
S\tc\tnoun.animal\tbass:1
S\td\tnoun.state\tcalm:0
S\te\tnoun.act\tcoin:0
S\tf\tnoun.artifact\tcoin:0
";

    fn nouns(lemmas: &[&str]) -> Vec<NounOccurrence> {
        lemmas.iter().enumerate().map(|(i, l)| NounOccurrence::new(i, *l, 0)).collect()
    }

    #[test]
    fn monosemous_and_determinism() {
        let t = load_taxonomy(TAX.as_bytes(), RelationMode::HypernymyOnly).unwrap();
        let doc = nouns(&["calm", "bass", "coin", "bass"]);
        for seed in 0..5 {
            let a = random_baseline(&t, &doc, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(a[0].outcome, Outcome::Full(t.lookup("d").unwrap()));
            assert_eq!(a, random_baseline(&t, &doc, &mut ChaCha8Rng::seed_from_u64(seed)));
        }
    }

    #[test]
    fn two_sense_draws_are_balanced() {
        let t = load_taxonomy(TAX.as_bytes(), RelationMode::HypernymyOnly).unwrap();
        let doc = nouns(&["coin"; 10_000]);
        let a = random_baseline(&t, &doc, &mut ChaCha8Rng::seed_from_u64(3));
        let e = t.lookup("e").unwrap();
        let hits = a.iter().filter(|x| x.outcome == Outcome::Full(e)).count() as f64 / 10_000.0;
        // sd of a fair proportion over 10k draws is 0.005
        assert!((hits - 0.5).abs() < 0.02, "{hits}");
    }

    #[test]
    fn expectations() {
        let t = load_taxonomy(TAX.as_bytes(), RelationMode::HypernymyOnly).unwrap();
        let g = |id: &str| GoldTag {
            key: None,
            synset: Some(t.lookup(id).unwrap()),
        };
        let mono = analytic_random_expectation(&t, &nouns(&["calm", "calm"]), &[g("d"), g("d")]).unwrap();
        assert_eq!(mono.sense_all, Some(1.0));
        assert_eq!(mono.sense_polysemous, None);

        // bass gold b: sense 1/3, file 2/3; coin gold e: 1/2, 1/2; calm: 1, 1
        let doc = nouns(&["bass", "coin", "calm"]);
        let e = analytic_random_expectation(&t, &doc, &[g("b"), g("e"), g("d")]).unwrap();
        let close = |x: Option<f64>, y: f64| (x.unwrap() - y).abs() < 1e-12;
        assert!(close(e.sense_all, (1.0 / 3.0 + 0.5 + 1.0) / 3.0));
        assert!(close(e.file_all, (2.0 / 3.0 + 0.5 + 1.0) / 3.0));
        assert!(close(e.sense_polysemous, (1.0 / 3.0 + 0.5) / 2.0));
        assert!(close(e.file_polysemous, (2.0 / 3.0 + 0.5) / 2.0));

        assert!(analytic_random_expectation(&t, &doc, &[]).is_err());
    }
}
