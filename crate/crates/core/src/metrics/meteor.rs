//! METEOR restricted to exact and Porter-stem unigram matching (no synonym
//! stage), so scores diverge from the reference METEOR tool whenever
//! synonyms would have aligned.

use super::{check_inputs, MetricScore};
use crate::corpus::stem;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeteorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for MeteorParams {
    fn default() -> Self {
        MeteorParams {
            alpha: 0.9,
            beta: 3.0,
            gamma: 0.5,
        }
    }
}

/// Greedy alignment: exact matches first, then stem matches; every token is
/// used at most once and each hypothesis token takes the leftmost free
/// reference token. Returns (hyp index, ref index) pairs sorted by hyp index.
pub fn align<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> Vec<(usize, usize)> {
    let mut ref_used = vec![false; reference.len()];
    let mut hyp_link: Vec<Option<usize>> = vec![None; hyp.len()];

    for (i, h) in hyp.iter().enumerate() {
        if let Some(j) = (0..reference.len()).find(|&j| !ref_used[j] && reference[j].as_ref() == h.as_ref()) {
            ref_used[j] = true;
            hyp_link[i] = Some(j);
        }
    }

    let ref_stems: Vec<String> = reference.iter().map(|r| stem(r.as_ref())).collect();
    for (i, h) in hyp.iter().enumerate() {
        if hyp_link[i].is_some() {
            continue;
        }
        let hs = stem(h.as_ref());
        if let Some(j) = (0..reference.len()).find(|&j| !ref_used[j] && ref_stems[j] == hs) {
            ref_used[j] = true;
            hyp_link[i] = Some(j);
        }
    }

    hyp_link
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect()
}

/// Maximal runs of alignments adjacent in both hypothesis and reference.
pub fn count_chunks(alignment: &[(usize, usize)]) -> usize {
    if alignment.is_empty() {
        return 0;
    }
    1 + alignment
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

fn score_one<S: AsRef<str>>(hyp: &[S], reference: &[S], params: MeteorParams) -> (f64, usize, usize) {
    let alignment = align(hyp, reference);
    let m = alignment.len();
    if m == 0 {
        return (0.0, 0, 0);
    }
    let p = m as f64 / hyp.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
    let chunks = count_chunks(&alignment);
    let penalty = params.gamma * (chunks as f64 / m as f64).powf(params.beta);
    (fmean * (1.0 - penalty), m, chunks)
}

pub fn meteor_lite<S: AsRef<str>>(hyp: &[S], refs: &[Vec<S>], params: MeteorParams) -> Result<MetricScore> {
    check_inputs(hyp, refs)?;
    let (value, m, chunks) =
        refs.iter()
            .map(|r| score_one(hyp, r, params))
            .fold(
                (f64::NEG_INFINITY, 0, 0),
                |best, cur| if cur.0 > best.0 { cur } else { best },
            );
    let mut score = MetricScore::new(value);
    score.components.insert("matches".into(), m as f64);
    score.components.insert("chunks".into(), chunks as f64);
    Ok(score)
}
