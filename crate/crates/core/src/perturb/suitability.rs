use rayon::prelude::*;

use super::{ErrorKind, PerturbationPair};
use crate::corpus::{tokenize, Corpus};
use crate::error::{Error, Result};
use crate::metrics::{build_corpus_stats, Metric, Scorer};

/// What a perturbed caption is scored against.
#[derive(Debug, Clone, Copy, Default)]
pub enum ReferenceMode<'a> {
    /// The single unperturbed caption.
    #[default]
    Original,
    /// Every caption of the source clip, looked up by the pair id's clip part.
    ClipCaptions(&'a Corpus),
}

impl ReferenceMode<'_> {
    fn references(&self, pair: &PerturbationPair) -> Result<Vec<String>> {
        match self {
            ReferenceMode::Original => Ok(vec![pair.original.text().to_owned()]),
            ReferenceMode::ClipCaptions(corpus) => {
                let clip_id = pair.id.rsplit_once('#').map_or(pair.id.as_str(), |(c, _)| c);
                let clip = corpus
                    .get(clip_id)
                    .ok_or_else(|| Error::Data(format!("pair {}: clip {clip_id:?} not in corpus", pair.id)))?;
                Ok(clip.captions.iter().map(|c| c.text().to_owned()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuitabilityResult {
    pub metric: Metric,
    pub kind: ErrorKind,
    pub n_pairs: usize,
    pub n_ties: usize,
    pub pct_type1_higher: f64,
}

/// Percentage of pairs whose type-1 caption scores strictly above type-2.
/// Ties count as failures and are reported separately. All pairs must share
/// one error kind.
pub fn run_suitability(
    metric: Metric,
    pairs: &[PerturbationPair],
    scorer: &Scorer<'_>,
    mode: ReferenceMode<'_>,
) -> Result<SuitabilityResult> {
    let Some(first) = pairs.first() else {
        return Err(Error::invalid("pairs", "no pairs to score"));
    };
    let kind = first.kind;
    if let Some(p) = pairs.iter().find(|p| p.kind != kind) {
        return Err(Error::invalid(
            "pairs",
            format!("mixed error kinds: {kind} and {} ({})", p.kind, p.id),
        ));
    }
    let refs: Vec<Vec<String>> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| mode.references(p).map_err(|e| Error::at(i, e)))
        .collect::<Result<_>>()?;

    let owned_stats;
    let mut scorer = *scorer;
    if metric == Metric::CiderD && scorer.stats.is_none() {
        let docs: Vec<Vec<String>> = refs.iter().flatten().map(|r| tokenize(r)).collect();
        owned_stats = build_corpus_stats(&docs)?;
        scorer.stats = Some(&owned_stats);
    }
    scorer.check(metric)?;

    let outcomes: Vec<Result<(f64, f64)>> = pairs
        .par_iter()
        .zip(refs.par_iter())
        .map(|(p, r)| {
            let s1 = scorer.score(metric, p.type1.text(), r)?.value;
            let s2 = scorer.score(metric, p.type2.text(), r)?.value;
            Ok((s1, s2))
        })
        .collect();
    let mut wins = 0usize;
    let mut ties = 0usize;
    for (i, o) in outcomes.into_iter().enumerate() {
        let (s1, s2) = o.map_err(|e| Error::at(i, e))?;
        if s1 > s2 {
            wins += 1;
        } else if s1 == s2 {
            ties += 1;
        }
    }
    Ok(SuitabilityResult {
        metric,
        kind,
        n_pairs: pairs.len(),
        n_ties: ties,
        pct_type1_higher: 100.0 * wins as f64 / pairs.len() as f64,
    })
}

/// One result per metric and error kind present in `pairs`, metric-major,
/// kinds in canonical order.
pub fn suitability_grid(
    metrics: &[Metric],
    pairs: &[PerturbationPair],
    scorer: &Scorer<'_>,
    mode: ReferenceMode<'_>,
) -> Result<Vec<SuitabilityResult>> {
    if metrics.is_empty() {
        return Err(Error::invalid("metrics", "no metric selected"));
    }
    if pairs.is_empty() {
        return Err(Error::invalid("pairs", "no pairs to score"));
    }
    let groups: Vec<Vec<PerturbationPair>> = ErrorKind::ALL
        .iter()
        .map(|k| pairs.iter().filter(|p| p.kind == *k).cloned().collect::<Vec<_>>())
        .filter(|g| !g.is_empty())
        .collect();
    let mut out = Vec::with_capacity(metrics.len() * groups.len());
    for &m in metrics {
        for g in &groups {
            out.push(run_suitability(m, g, scorer, mode)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Caption, CaptionedClip, Source};
    use crate::metrics::LexicalCosine;
    use std::collections::BTreeMap;

    fn pair(id: &str, kind: ErrorKind, o: &str, t1: &str, t2: &str) -> PerturbationPair {
        PerturbationPair {
            id: id.into(),
            kind,
            original: Caption::new(o).unwrap(),
            type1: Caption::new(t1).unwrap(),
            type2: Caption::new(t2).unwrap(),
            meta: BTreeMap::new(),
        }
    }

    #[test]
    fn three_of_four() {
        let o = "a b c d";
        let pairs = vec![
            pair("1", ErrorKind::Temporal, o, "a b c d", "x y z w"),
            pair("2", ErrorKind::Temporal, o, "a b c", "a x"),
            pair("3", ErrorKind::Temporal, o, "a b c d", "a b"),
            pair("4", ErrorKind::Temporal, o, "x", "a b c d"),
        ];
        let r = run_suitability(Metric::RougeL, &pairs, &Scorer::default(), ReferenceMode::Original).unwrap();
        assert_eq!(r.pct_type1_higher, 75.0);
        assert_eq!(r.n_ties, 0);
    }

    #[test]
    fn all_ties() {
        let pairs = vec![
            pair("1", ErrorKind::Spatial, "a b", "b a", "b a"),
            pair("2", ErrorKind::Spatial, "a b", "x", "y"),
        ];
        let r = run_suitability(Metric::RougeL, &pairs, &Scorer::default(), ReferenceMode::Original).unwrap();
        assert_eq!(r.pct_type1_higher, 0.0);
        assert_eq!(r.n_ties, 2);
    }

    #[test]
    fn rejects_mixed_kinds_and_empty() {
        let pairs = vec![
            pair("1", ErrorKind::Spatial, "a b", "b a", "b a"),
            pair("2", ErrorKind::Temporal, "a b", "x", "y"),
        ];
        let s = Scorer::default();
        assert!(run_suitability(Metric::RougeL, &pairs, &s, ReferenceMode::Original).is_err());
        assert!(run_suitability(Metric::RougeL, &[], &s, ReferenceMode::Original).is_err());
        let grid = suitability_grid(&[Metric::RougeL, Metric::Bleu4], &pairs, &s, ReferenceMode::Original).unwrap();
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[0].kind, ErrorKind::Temporal);
        assert_eq!(grid[3].metric, Metric::Bleu4);
    }

    #[test]
    fn lexical_cosine_prefers_reordering() {
        let lex = LexicalCosine::default();
        let s = Scorer {
            similarity: Some(&lex),
            ..Scorer::default()
        };
        let pairs = vec![pair(
            "c#0",
            ErrorKind::Semantic,
            "a dog barks and a car passes",
            "a car passes and a dog barks",
            "a dog whistles and a car passes",
        )];
        let r = run_suitability(Metric::FenseStar, &pairs, &s, ReferenceMode::Original).unwrap();
        assert_eq!(r.pct_type1_higher, 100.0);
    }

    #[test]
    fn clip_caption_references() {
        let clip = CaptionedClip::new(
            "c",
            "c.wav",
            vec![Caption::new("rain falls followed by thunder").unwrap()],
            Source::Audiocaps,
            16000,
            1.0,
        )
        .unwrap();
        let corpus = Corpus::new(vec![clip]).unwrap();
        let p = pair("c#0", ErrorKind::Temporal, "a b", "rain falls and thunder", "x y");
        let r = run_suitability(
            Metric::RougeL,
            std::slice::from_ref(&p),
            &Scorer::default(),
            ReferenceMode::ClipCaptions(&corpus),
        )
        .unwrap();
        assert_eq!(r.pct_type1_higher, 100.0);
        let missing = PerturbationPair { id: "zz#0".into(), ..p };
        let err = run_suitability(
            Metric::RougeL,
            &[missing],
            &Scorer::default(),
            ReferenceMode::ClipCaptions(&corpus),
        )
        .unwrap_err();
        assert!(matches!(err, Error::AtItem { index: 0, .. }));
    }
}
