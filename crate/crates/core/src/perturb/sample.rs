use rayon::prelude::*;
use serde_json::Value;

use super::{find_candidates, perturb, ErrorKind, PerturbationPair, VerbLexicon};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, item_rng};

pub const DEFAULT_SAMPLE_SIZE: usize = 1500;

/// Draws up to `n` candidates without replacement and perturbs each one.
///
/// Selection keeps the `n` candidates with the smallest hashed rank, and each
/// pair's random draws come from its own seed, so the result does not depend
/// on candidate order or worker count. Output follows corpus order.
pub fn sample_pairs(
    corpus: &Corpus,
    kind: ErrorKind,
    n: usize,
    seed: u64,
    lexicon: &VerbLexicon,
) -> Result<Vec<PerturbationPair>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let candidates = find_candidates(corpus, kind, lexicon);
    if candidates.is_empty() {
        return Err(Error::Data(format!("no {kind} candidates in corpus")));
    }
    if candidates.len() < n {
        log::warn!(
            "only {} {kind} candidates available, fewer than the requested {n}; using all",
            candidates.len()
        );
    }
    let mut ranked: Vec<(u64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (derive_seed(seed, &format!("rank:{}", c.id)), i))
        .collect();
    ranked.sort_unstable();
    ranked.truncate(n);
    let mut chosen: Vec<usize> = ranked.into_iter().map(|(_, i)| i).collect();
    chosen.sort_unstable();

    let results: Vec<Result<PerturbationPair>> = chosen
        .par_iter()
        .map(|&i| {
            let c = &candidates[i];
            let item_seed = derive_seed(seed, &c.id);
            let mut rng = item_rng(item_seed);
            let mut pair = perturb(&c.caption, kind, lexicon, &mut rng)?;
            pair.id = c.id.clone();
            pair.meta.insert("item_seed".into(), Value::from(item_seed));
            Ok(pair)
        })
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::at(i, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Caption, CaptionedClip, Source};

    fn corpus(captions: &[String]) -> Corpus {
        let items = captions
            .iter()
            .enumerate()
            .map(|(i, c)| {
                CaptionedClip::new(
                    format!("clip{i}"),
                    format!("clip{i}.wav"),
                    vec![Caption::new(c.as_str()).unwrap()],
                    Source::Audiocaps,
                    16000,
                    10.0,
                )
                .unwrap()
            })
            .collect();
        Corpus::new(items).unwrap()
    }

    fn temporal(n: usize) -> Corpus {
        corpus(
            &(0..n)
                .map(|i| format!("bell{i} rings followed by dog{i} barks"))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn shortfall_returns_all() {
        let pairs = sample_pairs(&temporal(10), ErrorKind::Temporal, 1500, 1, &VerbLexicon::default()).unwrap();
        assert_eq!(pairs.len(), 10);
    }

    #[test]
    fn exact_sample_size_distinct() {
        let pairs = sample_pairs(&temporal(5000), ErrorKind::Temporal, 1500, 9, &VerbLexicon::default()).unwrap();
        assert_eq!(pairs.len(), 1500);
        let mut ids: Vec<&str> = pairs.iter().map(|p| p.original.text()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 1500);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let c = temporal(200);
        let l = VerbLexicon::default();
        let a = sample_pairs(&c, ErrorKind::Temporal, 50, 3, &l).unwrap();
        let b = sample_pairs(&c, ErrorKind::Temporal, 50, 3, &l).unwrap();
        let d = sample_pairs(&c, ErrorKind::Temporal, 50, 4, &l).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn no_candidates_is_an_error() {
        let c = corpus(&["a dog barks".into()]);
        assert!(sample_pairs(&c, ErrorKind::Spatial, 5, 0, &VerbLexicon::default()).is_err());
        assert!(sample_pairs(&temporal(3), ErrorKind::Temporal, 0, 0, &VerbLexicon::default()).is_err());
    }
}
