//! Deterministic caption workloads shared by the benchmarks.

use capkit::corpus::tokenize;
use capkit::metrics::ScoringItem;

const WORDS: [&str; 32] = [
    "a",
    "the",
    "dog",
    "barks",
    "car",
    "passes",
    "man",
    "talks",
    "bird",
    "chirps",
    "loud",
    "distant",
    "engine",
    "runs",
    "water",
    "flows",
    "and",
    "while",
    "in",
    "background",
    "rain",
    "falls",
    "door",
    "closes",
    "bell",
    "rings",
    "crowd",
    "cheers",
    "wind",
    "blows",
    "child",
    "laughs",
];

/// Caption number `i` with `len` words drawn by a fixed linear congruence.
pub fn caption(i: u64, len: usize) -> String {
    let mut state = i.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            WORDS[(state >> 59) as usize]
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `n` items with one hypothesis and five references each.
pub fn items(n: usize) -> Vec<ScoringItem> {
    (0..n as u64)
        .map(|i| ScoringItem {
            hypothesis: caption(i, 10),
            references: (1..=5).map(|r| caption(i * 7 + r, 8 + r as usize)).collect(),
        })
        .collect()
}

pub fn tokens(text: &str) -> Vec<String> {
    tokenize(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_are_stable() {
        assert_eq!(caption(3, 10), caption(3, 10));
        assert_eq!(caption(3, 10).split(' ').count(), 10);
        let a = items(4);
        assert_eq!(a, items(4));
        assert!(a.iter().all(|it| it.references.len() == 5));
    }
}
