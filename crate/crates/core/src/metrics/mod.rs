//! Caption metrics: BLEU, ROUGE-L, METEOR-lite, CIDEr-D and FENSE/FENSE*
//! over pluggable backends.

mod bleu;
mod cider;
mod fense;
mod meteor;
mod remote;
mod rouge;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::tokenize;
use crate::error::{Error, Result};

pub use bleu::bleu;
pub use cider::{build_corpus_stats, cider_d, CiderParams, CorpusNgramStats, MAX_ORDER};
pub use fense::{
    fense, fense_star, lexical_cosine, Aggregation, FenseConfig, FluencyBackend, LexicalCosine, SimilarityBackend,
};
pub use meteor::{align, count_chunks, meteor_lite, MeteorParams};
pub use remote::{RemoteScorer, DEFAULT_TIMEOUT};
pub use rouge::{lcs_len, rouge_l};

/// A metric value plus named sub-scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricScore {
    pub value: f64,
    pub components: BTreeMap<String, f64>,
}

impl MetricScore {
    pub fn new(value: f64) -> Self {
        MetricScore {
            value,
            components: BTreeMap::new(),
        }
    }
}

pub(crate) fn check_inputs<S, R: AsRef<[S]>>(hyp: &[S], refs: &[R]) -> Result<()> {
    if hyp.is_empty() {
        return Err(Error::invalid("hypothesis", "is empty"));
    }
    if refs.is_empty() {
        return Err(Error::invalid("references", "reference set is empty"));
    }
    if refs.iter().any(|r| r.as_ref().is_empty()) {
        return Err(Error::invalid("references", "contains an empty reference"));
    }
    Ok(())
}

pub const ROUGE_BETA: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Bleu4,
    RougeL,
    Meteor,
    CiderD,
    FenseStar,
    Fense,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Bleu4,
        Metric::RougeL,
        Metric::Meteor,
        Metric::CiderD,
        Metric::FenseStar,
        Metric::Fense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Bleu4 => "bleu4",
            Metric::RougeL => "rougel",
            Metric::Meteor => "meteor",
            Metric::CiderD => "ciderd",
            Metric::FenseStar => "fense_star",
            Metric::Fense => "fense",
        }
    }

    pub fn needs_similarity(self) -> bool {
        matches!(self, Metric::FenseStar | Metric::Fense)
    }

    pub fn needs_fluency(self) -> bool {
        self == Metric::Fense
    }

    /// Parses a comma-separated metric list.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>> {
        let list = s
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Metric>>>()?;
        if list.is_empty() {
            return Err(Error::invalid("metrics", "no metric selected"));
        }
        Ok(list)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid("metric", format!("unknown metric {s:?}")))
    }
}

/// Everything a metric may need besides the captions themselves.
#[derive(Clone, Copy, Default)]
pub struct Scorer<'a> {
    pub similarity: Option<&'a dyn SimilarityBackend>,
    pub fluency: Option<&'a dyn FluencyBackend>,
    pub stats: Option<&'a CorpusNgramStats>,
    pub fense: FenseConfig,
}

impl<'a> Scorer<'a> {
    pub fn with_stats(self, stats: &'a CorpusNgramStats) -> Self {
        Scorer {
            stats: Some(stats),
            ..self
        }
    }

    /// Fails early when `metric` lacks a backend or IDF statistics.
    pub fn check(&self, metric: Metric) -> Result<()> {
        if metric.needs_similarity() && self.similarity.is_none() {
            return Err(Error::invalid(
                "backend",
                format!("{metric} needs a similarity backend"),
            ));
        }
        if metric.needs_fluency() && self.fluency.is_none() {
            return Err(Error::invalid("backend", format!("{metric} needs a fluency backend")));
        }
        if metric == Metric::CiderD && self.stats.is_none() {
            return Err(Error::invalid("stats", "ciderd needs reference-pool statistics"));
        }
        Ok(())
    }

    pub fn score(&self, metric: Metric, hyp: &str, refs: &[String]) -> Result<MetricScore> {
        self.check(metric)?;
        match metric {
            Metric::FenseStar => return fense_star(hyp, refs, self.similarity.expect("checked"), &self.fense),
            Metric::Fense => {
                return fense(
                    hyp,
                    refs,
                    self.similarity.expect("checked"),
                    self.fluency.expect("checked"),
                    &self.fense,
                )
            }
            _ => {}
        }
        let h = tokenize(hyp);
        let r: Vec<Vec<String>> = refs.iter().map(|x| tokenize(x)).collect();
        match metric {
            Metric::Bleu4 => bleu(&h, &r, 4),
            Metric::RougeL => rouge_l(&h, &r, ROUGE_BETA),
            Metric::Meteor => meteor_lite(&h, &r, MeteorParams::default()),
            Metric::CiderD => cider_d(&h, &r, self.stats.expect("checked"), CiderParams::default()),
            Metric::FenseStar | Metric::Fense => unreachable!(),
        }
    }
}

/// A hypothesis and its references.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringItem {
    pub hypothesis: String,
    pub references: Vec<String>,
}

/// Per-item scores in input order plus their arithmetic mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScores {
    pub items: Vec<MetricScore>,
    pub mean: f64,
}

/// Scores every item, in parallel, keeping input order. For CIDEr-D without
/// supplied statistics, IDF is built over all references of the batch.
pub fn score_pairs(metric: Metric, items: &[ScoringItem], scorer: &Scorer<'_>) -> Result<PairScores> {
    if items.is_empty() {
        return Err(Error::invalid("items", "nothing to score"));
    }
    let owned_stats;
    let mut scorer = *scorer;
    if metric == Metric::CiderD && scorer.stats.is_none() {
        let docs: Vec<Vec<String>> = items
            .iter()
            .flat_map(|it| it.references.iter().map(|r| tokenize(r)))
            .collect();
        owned_stats = build_corpus_stats(&docs)?;
        scorer.stats = Some(&owned_stats);
    }
    scorer.check(metric)?;
    let results: Vec<Result<MetricScore>> = items
        .par_iter()
        .map(|it| scorer.score(metric, &it.hypothesis, &it.references))
        .collect();
    let mut scores = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        scores.push(r.map_err(|e| Error::at(i, e))?);
    }
    let mean = scores.iter().map(|s| s.value).sum::<f64>() / scores.len() as f64;
    Ok(PairScores { items: scores, mean })
}
