//! FENSE-style scoring composed from pluggable similarity and fluency
//! backends, plus a deterministic lexical stand-in for the similarity model.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::MetricScore;
use crate::corpus::{stem, tokenize};
use crate::error::{Error, Result};

/// Sentence similarity in `[-1, 1]` between a hypothesis and references.
pub trait SimilarityBackend: Send + Sync {
    fn similarity(&self, hypothesis: &str, references: &[String]) -> Result<f64>;
}

/// Probability in `[0, 1]` that a sentence contains a fluency error.
pub trait FluencyBackend: Send + Sync {
    fn error_probability(&self, sentence: &str) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Mean,
    Max,
}

impl Aggregation {
    pub fn apply(self, values: &[f64]) -> f64 {
        match self {
            Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            other => Err(Error::invalid("aggregation", format!("unknown mode {other:?}"))),
        }
    }
}

/// Penalty settings. The defaults are placeholders, not calibrated against
/// any published FENSE release.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FenseConfig {
    pub error_threshold: f64,
    pub penalty_fraction: f64,
    pub reference_aggregation: Aggregation,
}

impl Default for FenseConfig {
    fn default() -> Self {
        FenseConfig {
            error_threshold: 0.9,
            penalty_fraction: 0.9,
            reference_aggregation: Aggregation::Mean,
        }
    }
}

impl FenseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("error_threshold", self.error_threshold),
            ("penalty_fraction", self.penalty_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid("fense", format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

fn stem_tf(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for tok in tokenize(text) {
        *tf.entry(stem(&tok)).or_insert(0.0) += 1.0;
    }
    tf
}

/// Cosine of stemmed-unigram term-frequency vectors.
pub fn lexical_cosine(a: &str, b: &str) -> f64 {
    let (ta, tb) = (stem_tf(a), stem_tf(b));
    if ta.is_empty() || tb.is_empty() {
        return 0.0;
    }
    let dot: f64 = ta.iter().filter_map(|(k, x)| tb.get(k).map(|y| x * y)).sum();
    let na = ta.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = tb.values().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Deterministic similarity backend over stemmed bag-of-words cosine.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalCosine {
    pub aggregation: Aggregation,
}

impl SimilarityBackend for LexicalCosine {
    fn similarity(&self, hypothesis: &str, references: &[String]) -> Result<f64> {
        if references.is_empty() {
            return Ok(0.0);
        }
        let sims: Vec<f64> = references.iter().map(|r| lexical_cosine(hypothesis, r)).collect();
        Ok(self.aggregation.apply(&sims))
    }
}

/// Similarity without the fluency penalty: each reference is scored on its
/// own and the results aggregated per `cfg`.
pub fn fense_star(
    hyp: &str,
    refs: &[String],
    backend: &dyn SimilarityBackend,
    cfg: &FenseConfig,
) -> Result<MetricScore> {
    if refs.is_empty() {
        return Err(Error::invalid("refs", "reference set is empty"));
    }
    let sims = refs
        .iter()
        .map(|r| backend.similarity(hyp, std::slice::from_ref(r)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = sims.iter().find(|s| !s.is_finite()) {
        return Err(Error::Backend(format!("similarity backend returned {bad}")));
    }
    let mut score = MetricScore::new(cfg.reference_aggregation.apply(&sims));
    for (i, s) in sims.iter().enumerate() {
        score.components.insert(format!("ref{i}"), *s);
    }
    Ok(score)
}

/// Similarity scaled by `1 - penalty_fraction` when the fluency detector's
/// error probability strictly exceeds the threshold.
pub fn fense(
    hyp: &str,
    refs: &[String],
    sim: &dyn SimilarityBackend,
    flu: &dyn FluencyBackend,
    cfg: &FenseConfig,
) -> Result<MetricScore> {
    cfg.validate()?;
    let star = fense_star(hyp, refs, sim, cfg)?;
    let p_err = flu.error_probability(hyp)?;
    if !(0.0..=1.0).contains(&p_err) {
        return Err(Error::Backend(format!("fluency backend returned {p_err}")));
    }
    let fired = p_err > cfg.error_threshold;
    let value = if fired {
        star.value * (1.0 - cfg.penalty_fraction)
    } else {
        star.value
    };
    let mut score = MetricScore::new(value);
    score.components.insert("similarity".into(), star.value);
    score.components.insert("error_probability".into(), p_err);
    score
        .components
        .insert("penalized".into(), if fired { 1.0 } else { 0.0 });
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FixedSim(f64);
    impl SimilarityBackend for FixedSim {
        fn similarity(&self, _: &str, _: &[String]) -> Result<f64> {
            Ok(self.0)
        }
    }

    struct FixedFluency(f64);
    impl FluencyBackend for FixedFluency {
        fn error_probability(&self, _: &str) -> Result<f64> {
            Ok(self.0)
        }
    }

    struct Down;
    impl SimilarityBackend for Down {
        fn similarity(&self, _: &str, _: &[String]) -> Result<f64> {
            Err(Error::Backend("connection refused".into()))
        }
    }

    fn refs(r: &[&str]) -> Vec<String> {
        r.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lexical_cosine_examples() {
        assert!((lexical_cosine("a dog barks", "a dog barks") - 1.0).abs() < 1e-15);
        assert_eq!(lexical_cosine("a dog barks", "rain falls"), 0.0);
        assert!((lexical_cosine("a dog barks", "a dog sleeps") - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(lexical_cosine("", "a"), 0.0);
        // stems collapse inflections
        assert!((lexical_cosine("dogs barking", "dog barks") - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fense_star_mean_aggregation() {
        let cfg = FenseConfig::default();
        let s = fense_star(
            "a dog barks",
            &refs(&["a dog barks", "rain falls"]),
            &LexicalCosine::default(),
            &cfg,
        )
        .unwrap();
        assert!((s.value - 0.5).abs() < 1e-15);
        let max = FenseConfig {
            reference_aggregation: Aggregation::Max,
            ..cfg
        };
        let s = fense_star(
            "a dog barks",
            &refs(&["a dog barks", "rain falls"]),
            &LexicalCosine::default(),
            &max,
        )
        .unwrap();
        assert!((s.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn backend_failure_is_not_zero() {
        let err = fense_star("a", &refs(&["a"]), &Down, &FenseConfig::default()).unwrap_err();
        assert!(err.is_backend());
    }

    #[test]
    fn penalty_rule() {
        let cfg = FenseConfig::default();
        let r = refs(&["x"]);
        let clean = fense("x", &r, &FixedSim(0.8), &FixedFluency(0.0), &cfg).unwrap();
        assert_eq!(clean.value, 0.8);
        let bad = fense("x", &r, &FixedSim(0.8), &FixedFluency(1.0), &cfg).unwrap();
        assert!((bad.value - 0.08).abs() < 1e-15);
        assert_eq!(bad.components["penalized"], 1.0);
        let edge = fense("x", &r, &FixedSim(0.8), &FixedFluency(0.9), &cfg).unwrap();
        assert_eq!(edge.value, 0.8);
    }

    #[test]
    fn negative_similarity_is_reported_as_is() {
        let s = fense_star("x", &refs(&["y"]), &FixedSim(-0.25), &FenseConfig::default()).unwrap();
        assert_eq!(s.value, -0.25);
    }
}
