//! Class-imbalance losses over word priors: balanced cross-entropy weights
//! `ω_c = -a·ln(p_c)` scaled so the rarest class gets `w_max`, and focal loss
//! `-(1-α)^γ·ln(α)`.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::corpus::{tokenize, Corpus, VocabStats};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_WEIGHT: f64 = 4.0;

/// Word priors, strictly positive and summing to one. Unobserved words are
/// absent rather than smoothed.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorDistribution {
    pub words: Vec<String>,
    pub counts: Vec<u64>,
    pub p: Vec<f64>,
}

impl PriorDistribution {
    /// Priors in the vocabulary's rank order.
    pub fn from_vocab(stats: &VocabStats) -> Result<Self> {
        if stats.total_tokens == 0 {
            return Err(Error::Data("prior over an empty vocabulary".into()));
        }
        let total = stats.total_tokens as f64;
        let (words, counts): (Vec<String>, Vec<u64>) = stats.ranked_counts().map(|(w, c)| (w.to_owned(), c)).unzip();
        let p = counts.iter().map(|&c| c as f64 / total).collect();
        Ok(PriorDistribution { words, counts, p })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Word-level priors over every caption token in the corpus.
pub fn token_prior(corpus: &Corpus) -> Result<PriorDistribution> {
    PriorDistribution::from_vocab(corpus.vocab()?)
}

#[derive(Deserialize)]
struct CountRow {
    token: String,
    count: u64,
}

/// Reads an external `token,count` CSV (for example subword counts).
pub fn load_token_counts(path: impl AsRef<Path>) -> Result<VocabStats> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let mut counts = HashMap::new();
    for row in reader.deserialize::<CountRow>() {
        let row = row?;
        if row.count == 0 {
            continue;
        }
        if counts.insert(row.token.clone(), row.count).is_some() {
            return Err(Error::DuplicateId(row.token));
        }
    }
    if counts.is_empty() {
        return Err(Error::Data(format!("{}: no positive token counts", path.display())));
    }
    VocabStats::from_counts(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedWeights {
    pub omega: Vec<f64>,
    pub scale: f64,
    pub w_max: f64,
}

pub fn balanced_weights(prior: &PriorDistribution, w_max: f64) -> Result<BalancedWeights> {
    if !(w_max.is_finite() && w_max > 0.0) {
        return Err(Error::invalid("w_max", format!("{w_max} is not a positive weight")));
    }
    if prior.p.is_empty() || prior.p.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::invalid("prior", "every prior must lie in (0, 1]"));
    }
    let neg_log: Vec<f64> = prior.p.iter().map(|p| -p.ln()).collect();
    let max = neg_log.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::invalid(
            "prior",
            "degenerate prior: a single class holds all mass",
        ));
    }
    // ratio first, so the rarest class lands on w_max exactly
    let omega = neg_log.iter().map(|l| w_max * (l / max)).collect();
    Ok(BalancedWeights {
        omega,
        scale: w_max / max,
        w_max,
    })
}

/// Writes `word,count,prior,weight`, heaviest weight first.
pub fn write_weights_csv(prior: &PriorDistribution, weights: &BalancedWeights, out: impl Write) -> Result<()> {
    let mut order: Vec<usize> = (0..prior.len()).collect();
    order.sort_by(|&a, &b| {
        weights.omega[b]
            .total_cmp(&weights.omega[a])
            .then_with(|| prior.words[a].cmp(&prior.words[b]))
    });
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["word", "count", "prior", "weight"])?;
    for i in order {
        w.write_record([
            prior.words[i].clone(),
            prior.counts[i].to_string(),
            prior.p[i].to_string(),
            weights.omega[i].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("weights csv", e))
}

/// Predicted class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorVector {
    alpha: Vec<f64>,
}

impl PosteriorVector {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() || alpha.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::invalid("alpha", "probabilities must lie in (0, 1]"));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("alpha", format!("sums to {sum}, not 1")));
        }
        Ok(PosteriorVector { alpha })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    fn target(&self, index: usize) -> Result<f64> {
        self.alpha
            .get(index)
            .copied()
            .ok_or_else(|| Error::invalid("target", format!("{index} out of {} classes", self.alpha.len())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalConfig {
    pub gamma: f64,
}

impl FocalConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::invalid("gamma", format!("{gamma} must be finite and >= 0")));
        }
        Ok(FocalConfig { gamma })
    }
}

fn check_prob(alpha_t: f64) -> Result<()> {
    if !(alpha_t > 0.0 && alpha_t <= 1.0) {
        return Err(Error::invalid("alpha_t", format!("{alpha_t} outside (0, 1]")));
    }
    Ok(())
}

/// `-ln(α_t)` for a bare target probability.
pub fn cross_entropy_at(alpha_t: f64) -> Result<f64> {
    check_prob(alpha_t)?;
    Ok(0.0 - alpha_t.ln())
}

/// `-(1-α_t)^γ · ln(α_t)` for a bare target probability.
pub fn focal_at(alpha_t: f64, gamma: f64) -> Result<f64> {
    check_prob(alpha_t)?;
    FocalConfig::new(gamma)?;
    Ok((1.0 - alpha_t).powf(gamma) * (0.0 - alpha_t.ln()))
}

pub fn cross_entropy(alpha: &PosteriorVector, target: usize) -> Result<f64> {
    cross_entropy_at(alpha.target(target)?)
}

pub fn balanced_ce(alpha: &PosteriorVector, target: usize, weights: &BalancedWeights) -> Result<f64> {
    let w = weights
        .omega
        .get(target)
        .copied()
        .ok_or_else(|| Error::invalid("target", format!("{target} has no weight")))?;
    Ok(w * cross_entropy(alpha, target)?)
}

pub fn focal(alpha: &PosteriorVector, target: usize, cfg: FocalConfig) -> Result<f64> {
    focal_at(alpha.target(target)?, cfg.gamma)
}

/// Derivative of the focal loss with respect to the target probability:
/// `γ(1-α)^(γ-1)·ln(α) - (1-α)^γ/α`.
pub fn focal_grad(alpha_t: f64, gamma: f64) -> Result<f64> {
    FocalConfig::new(gamma)?;
    if !(alpha_t > 0.0 && alpha_t <= 1.0) || (alpha_t == 1.0 && gamma < 1.0) {
        return Err(Error::invalid(
            "alpha_t",
            format!("gradient is singular at alpha_t = {alpha_t} for gamma = {gamma}"),
        ));
    }
    let q = 1.0 - alpha_t;
    let first = if gamma == 0.0 {
        0.0
    } else {
        gamma * q.powf(gamma - 1.0) * alpha_t.ln()
    };
    Ok(first - q.powf(gamma) / alpha_t)
}

/// Number of distinct normalized tokens emitted across captions.
pub fn output_vocab_size<S: AsRef<str>>(captions: &[S]) -> usize {
    captions
        .iter()
        .flat_map(|c| tokenize(c.as_ref()))
        .collect::<BTreeSet<_>>()
        .len()
}

/// Focal losses for every (γ, α) pair; one row per γ.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSweep {
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub losses: Vec<Vec<f64>>,
}

pub fn gamma_sweep_table(alphas: &[f64], gammas: &[f64]) -> Result<GammaSweep> {
    if gammas.is_empty() {
        return Err(Error::invalid("gammas", "list is empty"));
    }
    let losses = gammas
        .iter()
        .map(|&g| alphas.iter().map(|&a| focal_at(a, g)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaSweep {
        gammas: gammas.to_vec(),
        alphas: alphas.to_vec(),
        losses,
    })
}

impl GammaSweep {
    /// Long-format `gamma,alpha,cross_entropy,focal` CSV.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gamma", "alpha", "cross_entropy", "focal"])?;
        for (g, row) in self.gammas.iter().zip(&self.losses) {
            for (a, loss) in self.alphas.iter().zip(row) {
                w.write_record([
                    g.to_string(),
                    a.to_string(),
                    cross_entropy_at(*a)?.to_string(),
                    loss.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("sweep csv", e))
    }
}
