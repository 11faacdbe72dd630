//! CIDEr-D: TF-IDF n-gram cosine with count clipping and a Gaussian length
//! penalty, averaged over orders and references and scaled by 10.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{check_inputs, MetricScore};
use crate::corpus::ngrams;
use crate::error::{Error, Result};

/// Highest n-gram order for which document frequencies are collected.
pub const MAX_ORDER: usize = 4;

/// Reference-pool document frequencies backing the IDF weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusNgramStats {
    /// `doc_freq[n - 1]` maps an n-gram to the number of documents containing it.
    pub doc_freq: Vec<HashMap<String, u64>>,
    pub num_docs: u64,
}

impl CorpusNgramStats {
    /// `ln(num_docs / doc_freq)`, with unseen n-grams treated as df = 1.
    pub fn idf(&self, order: usize, gram: &str) -> f64 {
        let df = self
            .doc_freq
            .get(order - 1)
            .and_then(|m| m.get(gram))
            .copied()
            .unwrap_or(1)
            .max(1);
        (self.num_docs as f64 / df as f64).ln()
    }
}

pub fn build_corpus_stats<S: AsRef<str>>(documents: &[Vec<S>]) -> Result<CorpusNgramStats> {
    if documents.is_empty() {
        return Err(Error::invalid(
            "documents",
            "at least one reference document is required",
        ));
    }
    let mut doc_freq = vec![HashMap::new(); MAX_ORDER];
    for doc in documents {
        for (n, df) in doc_freq.iter_mut().enumerate() {
            let distinct: HashSet<String> = ngrams(doc, n + 1)?.into_keys().collect();
            for g in distinct {
                *df.entry(g).or_insert(0) += 1;
            }
        }
    }
    Ok(CorpusNgramStats {
        doc_freq,
        num_docs: documents.len() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiderParams {
    pub max_order: usize,
    pub sigma: f64,
    pub scale: f64,
}

impl Default for CiderParams {
    fn default() -> Self {
        CiderParams {
            max_order: 4,
            sigma: 6.0,
            scale: 10.0,
        }
    }
}

struct TfIdf {
    weights: BTreeMap<String, f64>,
    norm: f64,
}

fn tfidf<S: AsRef<str>>(tokens: &[S], order: usize, stats: &CorpusNgramStats) -> Result<TfIdf> {
    let weights: BTreeMap<String, f64> = ngrams(tokens, order)?
        .into_iter()
        .map(|(g, tf)| {
            let w = tf as f64 * stats.idf(order, &g);
            (g, w)
        })
        .collect();
    let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
    Ok(TfIdf { weights, norm })
}

/// Clipped cosine between hypothesis and reference vectors of one order.
fn similarity(hyp: &TfIdf, reference: &TfIdf) -> f64 {
    if hyp.norm == 0.0 || reference.norm == 0.0 {
        return 0.0;
    }
    let dot: f64 = hyp
        .weights
        .iter()
        .filter_map(|(g, &h)| reference.weights.get(g).map(|&r| h.min(r) * r))
        .sum();
    dot / (hyp.norm * reference.norm)
}

pub fn cider_d<S: AsRef<str>>(
    hyp: &[S],
    refs: &[Vec<S>],
    stats: &CorpusNgramStats,
    params: CiderParams,
) -> Result<MetricScore> {
    check_inputs(hyp, refs)?;
    if stats.num_docs == 0 {
        return Err(Error::invalid("stats", "built over zero documents"));
    }
    if params.max_order == 0 || params.max_order > stats.doc_freq.len() {
        return Err(Error::invalid(
            "max_order",
            format!("must lie in 1..={}", stats.doc_freq.len()),
        ));
    }
    let two_sigma_sq = 2.0 * params.sigma * params.sigma;
    let ref_vectors = (1..=params.max_order)
        .map(|n| refs.iter().map(|r| tfidf(r, n, stats)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let mut score = MetricScore::new(0.0);
    let mut order_sum = 0.0;
    for n in 1..=params.max_order {
        let h = tfidf(hyp, n, stats)?;
        let mut per_ref = 0.0;
        for (r_tokens, r_vec) in refs.iter().zip(&ref_vectors[n - 1]) {
            let delta = hyp.len() as f64 - r_tokens.len() as f64;
            per_ref += similarity(&h, r_vec) * (-(delta * delta) / two_sigma_sq).exp();
        }
        let mean = per_ref / refs.len() as f64;
        score.components.insert(format!("sim{n}"), mean);
        order_sum += mean;
    }
    score.value = params.scale * order_sum / params.max_order as f64;
    Ok(score)
}
