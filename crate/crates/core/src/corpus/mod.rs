//! Captioned-audio data model, dataset ingestion, manifests and vocabulary
//! statistics.

mod ingest;
mod manifest;
pub mod stem;
pub mod text;
mod vocab;
pub mod wav;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::augment::Provenance;
use crate::error::{Error, Result};

pub use ingest::{load_audiocaps_csv, load_clotho_csv, CLOTHO_SPLIT_SIZES, DEFAULT_SAMPLE_RATE};
pub use manifest::{load_manifest, write_manifest};
pub use stem::stem;
pub use text::{ngram_key, ngrams, tokenize};
pub use vocab::{vocab_cdf, vocab_stats, VocabStats};
pub use wav::{probe_wav, read_wav, write_wav, AudioBuffer, WavInfo};

/// A caption together with its normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Caption {
    text: String,
    tokens: Vec<String>,
}

impl Caption {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::Data("empty caption".into()));
        }
        let tokens = tokenize(&text);
        if tokens.is_empty() {
            return Err(Error::Data(format!("caption {text:?} has no word tokens")));
        }
        Ok(Caption { text, tokens })
    }

    /// Builds a caption whose text is the space-joined token list.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        Caption::new(ngram_key(tokens))
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Caption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for Caption {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Caption {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Caption::new(text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Clotho,
    Audiocaps,
    Augmented,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Clotho => "clotho",
            Source::Audiocaps => "audiocaps",
            Source::Augmented => "augmented",
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clotho" => Ok(Source::Clotho),
            "audiocaps" => Ok(Source::Audiocaps),
            "augmented" => Ok(Source::Augmented),
            other => Err(Error::Data(format!("unknown source tag {other:?}"))),
        }
    }
}

/// One audio file and its reference captions. Audio is referenced by path
/// and only decoded on demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaptionedClip {
    pub id: String,
    pub audio_path: PathBuf,
    pub captions: Vec<Caption>,
    pub source: Source,
    pub sample_rate: u32,
    pub duration_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl CaptionedClip {
    pub fn new(
        id: impl Into<String>,
        audio_path: impl Into<PathBuf>,
        captions: Vec<Caption>,
        source: Source,
        sample_rate: u32,
        duration_s: f64,
    ) -> Result<Self> {
        let clip = CaptionedClip {
            id: id.into(),
            audio_path: audio_path.into(),
            captions,
            source,
            sample_rate,
            duration_s,
            provenance: None,
        };
        clip.validate()?;
        Ok(clip)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Data("clip id is empty".into()));
        }
        let n = self.captions.len();
        let ok = match self.source {
            Source::Clotho => n == 5,
            Source::Audiocaps => n == 1,
            Source::Augmented => (1..=5).contains(&n),
        };
        if !ok {
            return Err(Error::Data(format!(
                "clip {}: {} source carries {n} captions",
                self.id,
                self.source.as_str()
            )));
        }
        if self.sample_rate == 0 {
            return Err(Error::Data(format!("clip {}: sample_rate is 0", self.id)));
        }
        if !self.duration_s.is_finite() || self.duration_s < 0.0 {
            return Err(Error::Data(format!(
                "clip {}: invalid duration {}",
                self.id, self.duration_s
            )));
        }
        Ok(())
    }
}

/// A collection of clips with unique ids. Vocabulary statistics are
/// computed once on first use.
#[derive(Debug, Default)]
pub struct Corpus {
    items: Vec<CaptionedClip>,
    vocab: OnceLock<VocabStats>,
}

impl Clone for Corpus {
    fn clone(&self) -> Self {
        Corpus {
            items: self.items.clone(),
            vocab: self.vocab.clone(),
        }
    }
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}

impl Corpus {
    pub fn new(items: Vec<CaptionedClip>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(items.len());
        for item in &items {
            item.validate()?;
            if !seen.insert(item.id.as_str()) {
                return Err(Error::DuplicateId(item.id.clone()));
            }
        }
        Ok(Corpus {
            items,
            vocab: OnceLock::new(),
        })
    }

    pub fn items(&self) -> &[CaptionedClip] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CaptionedClip> {
        self.items.iter().find(|c| c.id == id)
    }

    pub fn captions(&self) -> impl Iterator<Item = &Caption> {
        self.items.iter().flat_map(|c| c.captions.iter())
    }

    /// Cached vocabulary statistics.
    pub fn vocab(&self) -> Result<&VocabStats> {
        if let Some(v) = self.vocab.get() {
            return Ok(v);
        }
        let stats = vocab_stats(self)?;
        Ok(self.vocab.get_or_init(|| stats))
    }

    pub fn into_items(self) -> Vec<CaptionedClip> {
        self.items
    }
}

/// Keeps only clips whose every caption has at most `max_words` tokens.
pub fn filter_max_words(corpus: &Corpus, max_words: usize) -> Result<Corpus> {
    if max_words == 0 {
        return Err(Error::invalid("max_words", "word limit must be at least 1"));
    }
    let kept = corpus
        .items
        .iter()
        .filter(|clip| clip.captions.iter().all(|c| c.len() <= max_words))
        .cloned()
        .collect();
    Corpus::new(kept)
}
