//! Caption normalization: the one tokenizer used by metrics, vocabulary
//! statistics, word filters and perturbation matching.

use std::collections::HashMap;

use crate::error::{Error, Result};

const PUNCTUATION: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\'', '(', ')', '-'];

/// Lowercases, strips the fixed punctuation set and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .filter(|c| !PUNCTUATION.contains(c))
        .flat_map(char::to_lowercase)
        .collect();
    cleaned.split_whitespace().map(str::to_owned).collect()
}

/// Space-joined n-gram key. Tokens never contain whitespace, so the join is
/// unambiguous.
pub fn ngram_key<S: AsRef<str>>(window: &[S]) -> String {
    let mut key = String::new();
    for (i, tok) in window.iter().enumerate() {
        if i > 0 {
            key.push(' ');
        }
        key.push_str(tok.as_ref());
    }
    key
}

/// All contiguous windows of length `n`, with multiplicity.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> Result<HashMap<String, usize>> {
    if n == 0 {
        return Err(Error::invalid("n", "n-gram order must be at least 1"));
    }
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(ngram_key(window)).or_insert(0) += 1;
        }
    }
    Ok(counts)
}
