use super::{check_inputs, MetricScore};
use crate::error::Result;

/// Length of the longest common subsequence, O(|a|·|b|) time, O(|b|) space.
pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x.as_ref() == y.as_ref() {
                diag + 1
            } else {
                up.max(row[j])
            };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L F-measure; the best-scoring reference wins.
pub fn rouge_l<S: AsRef<str>>(hyp: &[S], refs: &[Vec<S>], beta: f64) -> Result<MetricScore> {
    check_inputs(hyp, refs)?;
    let b2 = beta * beta;
    let mut best: Option<(f64, f64, f64, usize)> = None;
    for r in refs {
        let l = lcs_len(hyp, r);
        let (p, rec, f) = if l == 0 {
            (0.0, 0.0, 0.0)
        } else {
            let p = l as f64 / hyp.len() as f64;
            let rec = l as f64 / r.len() as f64;
            (p, rec, (1.0 + b2) * p * rec / (rec + b2 * p))
        };
        if best.is_none_or(|(bf, ..)| f > bf) {
            best = Some((f, p, rec, l));
        }
    }
    let (f, p, r, l) = best.expect("refs checked non-empty");
    let mut score = MetricScore::new(f);
    score.components.insert("precision".into(), p);
    score.components.insert("recall".into(), r);
    score.components.insert("lcs".into(), l as f64);
    Ok(score)
}
