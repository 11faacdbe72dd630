use std::collections::HashMap;

use super::{check_inputs, MetricScore};
use crate::corpus::ngrams;
use crate::error::{Error, Result};

/// Sentence BLEU with clipped n-gram precisions, uniform weights and the
/// closest-reference brevity penalty. No smoothing: any zero precision, or an
/// order the hypothesis is too short to instantiate, zeroes the score.
pub fn bleu<S: AsRef<str>>(hyp: &[S], refs: &[Vec<S>], max_order: usize) -> Result<MetricScore> {
    check_inputs(hyp, refs)?;
    if max_order == 0 {
        return Err(Error::invalid("max_order", "must be at least 1"));
    }
    let c = hyp.len();
    let mut score = MetricScore::new(0.0);
    let mut log_sum = 0.0;
    let mut any_zero = false;

    for n in 1..=max_order {
        let hyp_counts = ngrams(hyp, n)?;
        let mut max_ref: HashMap<String, usize> = HashMap::new();
        for r in refs {
            for (g, k) in ngrams(r, n)? {
                let slot = max_ref.entry(g).or_insert(0);
                *slot = (*slot).max(k);
            }
        }
        let total: usize = hyp_counts.values().sum();
        let clipped: usize = hyp_counts
            .iter()
            .map(|(g, &k)| k.min(max_ref.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if total == 0 { 0.0 } else { clipped as f64 / total as f64 };
        score.components.insert(format!("p{n}"), p);
        if p == 0.0 {
            any_zero = true;
        } else {
            log_sum += p.ln();
        }
    }

    // closest reference length, ties to the shorter one
    let r = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .expect("refs checked non-empty");
    let bp = if c >= r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    score.components.insert("bp".into(), bp);
    score.components.insert("hyp_len".into(), c as f64);
    score.components.insert("ref_len".into(), r as f64);

    score.value = if any_zero {
        0.0
    } else {
        (bp * (log_sum / max_order as f64).exp()).min(1.0)
    };
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn t(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn identity_is_one() {
        let h = t("a dog barks at the mailman");
        assert_eq!(bleu(&h, std::slice::from_ref(&h), 4).unwrap().value, 1.0);
    }

    #[test]
    fn no_overlap_is_zero() {
        assert_eq!(bleu(&t("cat"), &[t("a dog barks")], 4).unwrap().value, 0.0);
    }

    #[test]
    fn brevity_penalty_worked_example() {
        let s = bleu(&t("a dog barks"), &[t("a dog barks loudly")], 2).unwrap();
        assert_eq!(s.components["p1"], 1.0);
        assert_eq!(s.components["p2"], 1.0);
        let bp = (-1.0f64 / 3.0).exp();
        assert!((s.components["bp"] - bp).abs() < 1e-15);
        assert!((s.value - 0.716_531_310_573_789_2).abs() < 1e-12);
    }

    #[test]
    fn clipping_against_max_reference_count() {
        // "the the the" vs "the cat": clipped unigram matches = 1 of 3
        let s = bleu(&t("the the the"), &[t("the cat"), t("the the dog")], 1).unwrap();
        assert!((s.components["p1"] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closest_reference_ties_to_shorter() {
        let s = bleu(&t("a b c d"), &[t("a b c"), t("a b c d e")], 1).unwrap();
        assert_eq!(s.components["ref_len"], 3.0);
        assert_eq!(s.components["bp"], 1.0);
    }

    #[test]
    fn errors() {
        let empty: Vec<String> = vec![];
        assert!(bleu(&empty, &[t("a")], 4).is_err());
        assert!(bleu(&t("a"), &[], 4).is_err());
        assert!(bleu(&t("a"), std::slice::from_ref(&empty), 4).is_err());
        assert!(bleu(&t("a"), &[t("a")], 0).is_err());
    }
}
