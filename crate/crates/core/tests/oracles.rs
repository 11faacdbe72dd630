mod common;

use capkit::metrics::{build_corpus_stats, cider_d, lcs_len, rouge_l, CiderParams};
use proptest::prelude::*;

fn tokens(max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..=max_len)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn nonempty(max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]), 1..=max_len)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #[test]
    fn lcs_matches_exhaustive_search(a in tokens(8), b in tokens(8)) {
        prop_assert_eq!(lcs_len(&a, &b), common::lcs_brute(&a, &b));
    }

    #[test]
    fn rouge_lcs_component_matches(a in nonempty(8), b in nonempty(8)) {
        let s = rouge_l(&a, std::slice::from_ref(&b), 1.2).unwrap();
        prop_assert_eq!(s.components["lcs"], common::lcs_brute(&a, &b) as f64);
    }

    #[test]
    fn cider_matches_straight_line(
        docs in prop::collection::vec(nonempty(10), 1..=10),
        hyp in nonempty(10),
        pick in prop::collection::vec(any::<prop::sample::Index>(), 1..=5),
    ) {
        let refs: Vec<Vec<String>> = pick.iter().map(|i| docs[i.index(docs.len())].clone()).collect();
        let stats = build_corpus_stats(&docs).unwrap();
        let got = cider_d(&hyp, &refs, &stats, CiderParams::default()).unwrap().value;
        let want = common::cider_straight(&hyp, &refs, &docs);
        prop_assert!((got - want).abs() <= 1e-9, "{} vs {}", got, want);
    }
}

#[test]
fn brute_force_oracle_sanity() {
    let t = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
    assert_eq!(common::lcs_brute(&t("a b c d"), &t("b d a c")), 2);
    assert_eq!(common::lcs_brute(&[], &t("a")), 0);
    assert_eq!(common::lcs_brute(&t("a b a b"), &t("b a b a")), 3);
}
