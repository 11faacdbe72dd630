#![allow(dead_code)]

use std::collections::HashMap;

use capkit::{Caption, CaptionedClip, Corpus, Source};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Longest common subsequence by trying every subsequence of `a`.
pub fn lcs_brute(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 16);
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let picked: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
        let mut j = 0;
        for tok in b {
            if j < picked.len() && *picked[j] == *tok {
                j += 1;
            }
        }
        if j == picked.len() {
            best = len;
        }
    }
    best
}

fn grams(tokens: &[String], n: usize) -> Vec<String> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].join(" ")).collect()
}

fn tally(items: &[String]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for g in items {
        match out.iter_mut().find(|(k, _)| k == g) {
            Some(e) => e.1 += 1.0,
            None => out.push((g.clone(), 1.0)),
        }
    }
    out
}

/// CIDEr-D written out directly from its definition: TF-IDF vectors per
/// order, clipped dot product, Gaussian length penalty (sigma 6), mean over
/// references then orders, times 10.
pub fn cider_straight(hyp: &[String], refs: &[Vec<String>], docs: &[Vec<String>]) -> f64 {
    let n_docs = docs.len() as f64;
    let mut total = 0.0;
    for n in 1..=4 {
        let mut df: HashMap<String, f64> = HashMap::new();
        for d in docs {
            let mut seen: Vec<String> = grams(d, n);
            seen.sort();
            seen.dedup();
            for g in seen {
                *df.entry(g).or_insert(0.0) += 1.0;
            }
        }
        let vec_of = |t: &[String]| -> Vec<(String, f64)> {
            tally(&grams(t, n))
                .into_iter()
                .map(|(g, c)| {
                    let d = df.get(&g).copied().unwrap_or(1.0).max(1.0);
                    (g, c * (n_docs / d).ln())
                })
                .collect()
        };
        let norm = |v: &[(String, f64)]| v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        let h = vec_of(hyp);
        let mut acc = 0.0;
        for r in refs {
            let rv = vec_of(r);
            let (nh, nr) = (norm(&h), norm(&rv));
            let mut sim = 0.0;
            if nh != 0.0 && nr != 0.0 {
                let mut dot = 0.0;
                for (g, x) in &h {
                    for (g2, y) in &rv {
                        if g == g2 {
                            dot += x.min(*y) * y;
                        }
                    }
                }
                sim = dot / (nh * nr);
            }
            let delta = hyp.len() as f64 - r.len() as f64;
            acc += sim * (-(delta * delta) / 72.0).exp();
        }
        total += acc / refs.len() as f64;
    }
    10.0 * total / 4.0
}

pub const NOUNS: [&str; 24] = [
    "dog", "car", "man", "woman", "bird", "child", "engine", "train", "crowd", "door", "bell", "clock", "wind", "rain",
    "water", "cat", "horse", "truck", "baby", "phone", "siren", "motor", "drum", "guitar",
];
pub const ADJS: [&str; 10] = [
    "small", "large", "loud", "distant", "old", "young", "heavy", "quiet", "metal", "wooden",
];
pub const VERBS: [&str; 16] = [
    "barks", "passes", "talks", "sings", "chirps", "rings", "ticks", "blows", "falls", "flows", "meows", "runs",
    "cries", "beeps", "roars", "plays",
];

/// Event clause such as "a loud dog barks", 3 or 4 tokens.
pub fn clause<R: Rng>(rng: &mut R) -> String {
    let noun = NOUNS.choose(rng).unwrap();
    let verb = VERBS.choose(rng).unwrap();
    if rng.random_bool(0.5) {
        format!("a {} {noun} {verb}", ADJS.choose(rng).unwrap())
    } else {
        format!("the {noun} {verb}")
    }
}

fn distinct_clauses<R: Rng>(rng: &mut R) -> (String, String) {
    loop {
        let (a, b) = (clause(rng), clause(rng));
        if a != b {
            return (a, b);
        }
    }
}

/// One caption fitting `kind` (0 semantic, 1 temporal, 2 spatial) or plain.
pub fn structured_caption<R: Rng>(rng: &mut R, kind: usize) -> String {
    let (a, b) = distinct_clauses(rng);
    match kind {
        0 => format!("{a} and {b}"),
        1 => {
            let k = ["followed by", "and then"].choose(rng).unwrap();
            format!("{a} {k} {b}")
        }
        2 => {
            let m = ["in the background", "in the foreground"].choose(rng).unwrap();
            let c = ["and", "while", "as"].choose(rng).unwrap();
            if rng.random_bool(0.5) {
                format!("{a} {c} {b} {m}")
            } else {
                format!("{a} {m} {c} {b}")
            }
        }
        _ => a,
    }
}

/// Clotho-shaped corpus (five captions per clip) mixing all caption shapes.
pub fn mixed_corpus<R: Rng>(rng: &mut R, clips: usize) -> Corpus {
    let items = (0..clips)
        .map(|i| {
            let caps = (0..5)
                .map(|_| {
                    let kind = rng.random_range(0..4);
                    Caption::new(structured_caption(rng, kind)).unwrap()
                })
                .collect();
            CaptionedClip::new(
                format!("clip{i:05}"),
                format!("clip{i:05}.wav"),
                caps,
                Source::Clotho,
                16_000,
                20.0,
            )
            .unwrap()
        })
        .collect();
    Corpus::new(items).unwrap()
}

/// Random caption of `len` tokens over a vocabulary of `vocab` words.
pub fn random_tokens<R: Rng>(rng: &mut R, len: usize, vocab: usize) -> Vec<String> {
    (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect()
}

pub fn multiset(tokens: &[String]) -> Vec<String> {
    let mut v = tokens.to_vec();
    v.sort();
    v
}
