//! Rule-based caption perturbations probing whether a metric prefers a
//! tolerable (type-1) error over a meaning-changing (type-2) one, for three
//! error kinds:
//!
//! - semantic: `A and B` → type-1 `B and A`, type-2 one verb replaced;
//! - temporal: `X K Y` with K ∈ {followed by, and then} → type-1 `X and Y`,
//!   type-2 `Y K X`;
//! - spatial: `C1 conn C2` with a clause-final background/foreground marker →
//!   type-1 marker dropped and connector normalized to `and`, type-2 events
//!   swapped while the marker keeps its slot.
//!
//! All matching happens on normalized tokens, and perturbed captions are
//! space-joined tokens.

mod files;
mod sample;
mod suitability;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{Caption, Corpus};
use crate::error::{Error, Result};

pub use files::{emit_report, read_pairs, write_pairs, write_report_csv};
pub use sample::{sample_pairs, DEFAULT_SAMPLE_SIZE};
pub use suitability::{run_suitability, suitability_grid, ReferenceMode, SuitabilityResult};

pub const TEMPORAL_KEYWORDS: [&str; 2] = ["followed by", "and then"];
pub const SPATIAL_MARKERS: [&str; 2] = ["in the background", "in the foreground"];
pub const SPATIAL_CONNECTORS: [&str; 3] = ["and", "while", "as"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Semantic,
    Temporal,
    Spatial,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 3] = [ErrorKind::Semantic, ErrorKind::Temporal, ErrorKind::Spatial];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Semantic => "semantic",
            ErrorKind::Temporal => "temporal",
            ErrorKind::Spatial => "spatial",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid("kind", format!("unknown error kind {s:?}")))
    }
}

/// Single-word verbs used both to locate and to replace verbs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbLexicon {
    verbs: BTreeSet<String>,
}

const DEFAULT_VERBS: &str = include_str!("../../data/verbs.txt");

impl Default for VerbLexicon {
    fn default() -> Self {
        VerbLexicon::parse(DEFAULT_VERBS).expect("bundled lexicon is valid")
    }
}

impl VerbLexicon {
    pub fn new<I, S>(verbs: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for v in verbs {
            let v = v.as_ref().trim().to_lowercase();
            if v.is_empty() {
                continue;
            }
            if v.split_whitespace().count() != 1 {
                return Err(Error::Data(format!("lexicon entry {v:?} is not a single word")));
            }
            set.insert(v);
        }
        if set.is_empty() {
            return Err(Error::Data("verb lexicon is empty".into()));
        }
        Ok(VerbLexicon { verbs: set })
    }

    /// Newline-delimited word list; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self> {
        VerbLexicon::new(text.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        VerbLexicon::parse(&text)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.verbs.contains(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.verbs.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }
}

/// Original caption with its two perturbed variants.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPair {
    pub id: String,
    pub kind: ErrorKind,
    pub original: Caption,
    pub type1: Caption,
    pub type2: Caption,
    pub meta: BTreeMap<String, Value>,
}

/// A caption eligible for one error kind, keyed `{clip_id}#{caption_index}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: String,
    pub caption: Caption,
}

/// Index of the first lexicon verb, else the first token longer than three
/// characters ending in "ing" or "s".
pub fn detect_verb<S: AsRef<str>>(clause: &[S], lexicon: &VerbLexicon) -> Result<usize> {
    if clause.is_empty() {
        return Err(Error::invalid("clause", "is empty"));
    }
    clause
        .iter()
        .position(|t| lexicon.contains(t.as_ref()))
        .or_else(|| {
            clause.iter().position(|t| {
                let t = t.as_ref();
                t.chars().count() > 3 && (t.ends_with("ing") || t.ends_with('s'))
            })
        })
        .ok_or_else(|| Error::Data("no detectable verb in clause".into()))
}

/// Start positions of every occurrence of a multi-word phrase.
fn phrase_positions(tokens: &[String], phrase: &str) -> Vec<usize> {
    let words: Vec<&str> = phrase.split(' ').collect();
    if tokens.len() < words.len() {
        return Vec::new();
    }
    (0..=tokens.len() - words.len())
        .filter(|&i| tokens[i..i + words.len()].iter().zip(&words).all(|(t, w)| t == w))
        .collect()
}

/// The single occurrence among `phrases`, if exactly one exists.
fn single_phrase(tokens: &[String], phrases: &[&'static str]) -> Option<(&'static str, usize)> {
    let mut hits = phrases
        .iter()
        .flat_map(|p| phrase_positions(tokens, p).into_iter().map(move |i| (*p, i)));
    let first = hits.next()?;
    hits.next().is_none().then_some(first)
}

fn count_phrases(tokens: &[String], phrases: &[&str]) -> usize {
    phrases.iter().map(|p| phrase_positions(tokens, p).len()).sum()
}

fn join(parts: &[&[String]]) -> Result<Caption> {
    let tokens: Vec<&String> = parts.iter().flat_map(|p| p.iter()).collect();
    Caption::from_tokens(&tokens)
}

fn words(s: &str) -> Vec<String> {
    s.split(' ').map(str::to_owned).collect()
}

struct SemanticSplit<'a> {
    clauses: [&'a [String]; 2],
    split: usize,
}

fn semantic_split<'a>(tokens: &'a [String], lexicon: &VerbLexicon) -> Option<SemanticSplit<'a>> {
    if count_phrases(tokens, &TEMPORAL_KEYWORDS) > 0 || count_phrases(tokens, &SPATIAL_MARKERS) > 0 {
        return None;
    }
    let ands: Vec<usize> = (0..tokens.len()).filter(|&i| tokens[i] == "and").collect();
    let &[split] = ands.as_slice() else {
        return None;
    };
    let (a, b) = (&tokens[..split], &tokens[split + 1..]);
    if a.len() < 2 || b.len() < 2 || a == b {
        return None;
    }
    if detect_verb(a, lexicon).is_err() && detect_verb(b, lexicon).is_err() {
        return None;
    }
    Some(SemanticSplit { clauses: [a, b], split })
}

struct TemporalSplit<'a> {
    keyword: &'static str,
    before: &'a [String],
    after: &'a [String],
    at: usize,
}

fn temporal_split(tokens: &[String]) -> Option<TemporalSplit<'_>> {
    let (keyword, at) = single_phrase(tokens, &TEMPORAL_KEYWORDS)?;
    let before = &tokens[..at];
    let after = &tokens[at + keyword.split(' ').count()..];
    if before.is_empty() || after.is_empty() || before == after {
        return None;
    }
    Some(TemporalSplit {
        keyword,
        before,
        after,
        at,
    })
}

struct SpatialSplit<'a> {
    marker: &'static str,
    connector: &'a str,
    /// Event text of each clause with the marker removed.
    events: [&'a [String]; 2],
    /// 0 when the marker ends the first clause, 1 for the second.
    marker_slot: usize,
}

fn spatial_split(tokens: &[String]) -> Option<SpatialSplit<'_>> {
    let (marker, at) = single_phrase(tokens, &SPATIAL_MARKERS)?;
    let mlen = marker.split(' ').count();
    let conns: Vec<usize> = (0..tokens.len())
        .filter(|&i| SPATIAL_CONNECTORS.contains(&tokens[i].as_str()))
        .collect();
    let &[split] = conns.as_slice() else {
        return None;
    };
    let (c1, c2) = (&tokens[..split], &tokens[split + 1..]);
    let (events, marker_slot) = if at + mlen == split {
        ([&c1[..c1.len() - mlen], c2], 0)
    } else if at + mlen == tokens.len() && at > split {
        ([c1, &c2[..c2.len() - mlen]], 1)
    } else {
        return None;
    };
    if events[0].is_empty() || events[1].is_empty() || events[0] == events[1] {
        return None;
    }
    Some(SpatialSplit {
        marker,
        connector: tokens[split].as_str(),
        events,
        marker_slot,
    })
}

pub fn is_candidate(caption: &Caption, kind: ErrorKind, lexicon: &VerbLexicon) -> bool {
    let t = caption.tokens();
    match kind {
        ErrorKind::Semantic => semantic_split(t, lexicon).is_some(),
        ErrorKind::Temporal => temporal_split(t).is_some() && perturb_temporal(caption).is_ok(),
        ErrorKind::Spatial => spatial_split(t).is_some() && perturb_spatial(caption).is_ok(),
    }
}

/// Every caption in the corpus that fits the structure `kind` requires.
pub fn find_candidates(corpus: &Corpus, kind: ErrorKind, lexicon: &VerbLexicon) -> Vec<Candidate> {
    corpus
        .items()
        .iter()
        .flat_map(|clip| {
            clip.captions
                .iter()
                .enumerate()
                .filter(move |(_, cap)| is_candidate(cap, kind, lexicon))
                .map(move |(i, cap)| Candidate {
                    id: format!("{}#{i}", clip.id),
                    caption: cap.clone(),
                })
        })
        .collect()
}

fn finish(
    kind: ErrorKind,
    caption: &Caption,
    type1: Caption,
    type2: Caption,
    meta: BTreeMap<String, Value>,
) -> Result<PerturbationPair> {
    let original = Caption::from_tokens(caption.tokens())?;
    if type1.text() == original.text() || type2.text() == original.text() {
        return Err(Error::Data(format!(
            "{kind} perturbation of {:?} reproduces the original",
            original.text()
        )));
    }
    Ok(PerturbationPair {
        id: String::new(),
        kind,
        original,
        type1,
        type2,
        meta,
    })
}

fn not_a(kind: ErrorKind, caption: &Caption) -> Error {
    Error::Data(format!("{:?} is not a {kind} candidate", caption.text()))
}

pub fn perturb_semantic<R: Rng>(caption: &Caption, lexicon: &VerbLexicon, rng: &mut R) -> Result<PerturbationPair> {
    let split = semantic_split(caption.tokens(), lexicon).ok_or_else(|| not_a(ErrorKind::Semantic, caption))?;
    let [a, b] = split.clauses;
    let and = [String::from("and")];
    let type1 = join(&[b, &and, a])?;

    let with_verb: Vec<(usize, usize)> = [a, b]
        .iter()
        .enumerate()
        .filter_map(|(ci, clause)| detect_verb(clause, lexicon).ok().map(|vi| (ci, vi)))
        .collect();
    if with_verb.is_empty() {
        return Err(Error::Data("no detectable verb".into()));
    }
    let (clause, verb_idx) = with_verb[rng.random_range(0..with_verb.len())];
    let offset = if clause == 0 { 0 } else { split.split + 1 };
    let position = offset + verb_idx;
    let verb = caption.tokens()[position].clone();
    let pool: Vec<&str> = lexicon.iter().filter(|v| *v != verb).collect();
    if pool.is_empty() {
        return Err(Error::Data(format!("lexicon has no replacement for {verb:?}")));
    }
    let replacement = pool[rng.random_range(0..pool.len())].to_owned();
    let mut tokens = caption.tokens().to_vec();
    tokens[position] = replacement.clone();
    let type2 = Caption::from_tokens(&tokens)?;

    let meta = BTreeMap::from([
        ("keyword".into(), Value::from("and")),
        ("split_index".into(), Value::from(split.split)),
        ("clause".into(), Value::from(clause)),
        ("replaced_verb".into(), Value::from(verb)),
        ("replacement_verb".into(), Value::from(replacement)),
        ("verb_position".into(), Value::from(position)),
    ]);
    finish(ErrorKind::Semantic, caption, type1, type2, meta)
}

pub fn perturb_temporal(caption: &Caption) -> Result<PerturbationPair> {
    let split = temporal_split(caption.tokens()).ok_or_else(|| not_a(ErrorKind::Temporal, caption))?;
    let and = [String::from("and")];
    let keyword = words(split.keyword);
    let type1 = join(&[split.before, &and, split.after])?;
    let type2 = join(&[split.after, &keyword, split.before])?;
    let meta = BTreeMap::from([
        ("keyword".into(), Value::from(split.keyword)),
        ("split_index".into(), Value::from(split.at)),
    ]);
    finish(ErrorKind::Temporal, caption, type1, type2, meta)
}

pub fn perturb_spatial(caption: &Caption) -> Result<PerturbationPair> {
    let split = spatial_split(caption.tokens()).ok_or_else(|| not_a(ErrorKind::Spatial, caption))?;
    let [e1, e2] = split.events;
    let and = [String::from("and")];
    let conn = [split.connector.to_owned()];
    let marker = words(split.marker);
    let type1 = join(&[e1, &and, e2])?;
    let type2 = if split.marker_slot == 0 {
        join(&[e2, &marker, &conn, e1])?
    } else {
        join(&[e2, &conn, e1, &marker])?
    };
    let meta = BTreeMap::from([
        ("keyword".into(), Value::from(split.marker)),
        ("connector".into(), Value::from(split.connector)),
        ("marker_slot".into(), Value::from(split.marker_slot)),
    ]);
    finish(ErrorKind::Spatial, caption, type1, type2, meta)
}

pub fn perturb<R: Rng>(
    caption: &Caption,
    kind: ErrorKind,
    lexicon: &VerbLexicon,
    rng: &mut R,
) -> Result<PerturbationPair> {
    match kind {
        ErrorKind::Semantic => perturb_semantic(caption, lexicon, rng),
        ErrorKind::Temporal => perturb_temporal(caption),
        ErrorKind::Spatial => perturb_spatial(caption),
    }
}
