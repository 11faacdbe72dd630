use std::collections::HashMap;

use super::Corpus;
use crate::error::{Error, Result};

/// Word counts over every caption of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabStats {
    pub counts: HashMap<String, u64>,
    pub total_tokens: u64,
    /// Words by descending count, ties broken lexicographically.
    pub ranked: Vec<String>,
}

impl VocabStats {
    pub fn from_counts(counts: HashMap<String, u64>) -> Result<Self> {
        if counts.values().any(|&c| c == 0) {
            return Err(Error::Data("word counts must be positive".into()));
        }
        let total_tokens = counts.values().sum();
        let mut ranked: Vec<String> = counts.keys().cloned().collect();
        ranked.sort_by(|a, b| counts[b].cmp(&counts[a]).then_with(|| a.cmp(b)));
        Ok(VocabStats {
            counts,
            total_tokens,
            ranked,
        })
    }

    pub fn from_token_lists<'a, I, S>(lists: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for list in lists {
            for tok in list {
                *counts.entry(tok.as_ref().to_owned()).or_insert(0) += 1;
            }
        }
        Self::from_counts(counts)
    }

    pub fn distinct(&self) -> usize {
        self.ranked.len()
    }

    /// (word, count) pairs in rank order.
    pub fn ranked_counts(&self) -> impl Iterator<Item = (&str, u64)> {
        self.ranked.iter().map(|w| (w.as_str(), self.counts[w]))
    }
}

pub fn vocab_stats(corpus: &Corpus) -> Result<VocabStats> {
    if corpus.is_empty() {
        return Err(Error::Data("vocabulary of an empty corpus".into()));
    }
    VocabStats::from_token_lists(corpus.captions().map(|c| c.tokens()))
}

/// Cumulative probability mass of the top-(i+1) ranked words.
pub fn vocab_cdf(stats: &VocabStats) -> Result<Vec<f64>> {
    if stats.total_tokens == 0 {
        return Err(Error::Data("vocabulary has no tokens".into()));
    }
    let total = stats.total_tokens as f64;
    let mut running = 0u64;
    Ok(stats
        .ranked_counts()
        .map(|(_, c)| {
            running += c;
            running as f64 / total
        })
        .collect())
}
