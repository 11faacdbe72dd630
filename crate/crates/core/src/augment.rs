//! Caption-aware augmentation: a Clotho-style clip and an AudioCaps-style
//! clip are either concatenated in time (captions joined by "and" or
//! "followed by") or overlaid with one of three weight pairs (captions joined
//! by a foreground/background template).

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{read_wav, write_manifest, write_wav, AudioBuffer, Caption, CaptionedClip, Corpus, Source};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, item_rng};

/// Word limit applied to the AudioCaps side before pairing.
pub const AUDIOCAPS_MAX_WORDS: usize = 8;

pub const MANIFEST_NAME: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Concat,
    Mixing,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Concat => "concat",
            Method::Mixing => "mixing",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(Method::Concat),
            "mixing" => Ok(Method::Mixing),
            other => Err(Error::invalid("method", format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conjunction {
    #[serde(rename = "and")]
    And,
    #[serde(rename = "followed by")]
    FollowedBy,
}

impl Conjunction {
    pub fn as_str(self) -> &'static str {
        match self {
            Conjunction::And => "and",
            Conjunction::FollowedBy => "followed by",
        }
    }
}

/// Gains applied to the primary (Clotho) and secondary (AudioCaps) audio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct MixWeights {
    w_primary: f64,
    w_secondary: f64,
}

impl MixWeights {
    pub const EQUAL: MixWeights = MixWeights {
        w_primary: 0.5,
        w_secondary: 0.5,
    };
    pub const SECONDARY_LOUDER: MixWeights = MixWeights {
        w_primary: 0.25,
        w_secondary: 0.75,
    };
    pub const PRIMARY_LOUDER: MixWeights = MixWeights {
        w_primary: 0.75,
        w_secondary: 0.25,
    };
    pub const OPTIONS: [MixWeights; 3] = [Self::EQUAL, Self::SECONDARY_LOUDER, Self::PRIMARY_LOUDER];

    pub fn new(w_primary: f64, w_secondary: f64) -> Result<Self> {
        let w = MixWeights { w_primary, w_secondary };
        if Self::OPTIONS.contains(&w) {
            Ok(w)
        } else {
            Err(Error::invalid(
                "weights",
                format!("({w_primary}, {w_secondary}) is not one of the three mixing weight pairs"),
            ))
        }
    }

    pub fn primary(self) -> f64 {
        self.w_primary
    }

    pub fn secondary(self) -> f64 {
        self.w_secondary
    }
}

impl TryFrom<[f64; 2]> for MixWeights {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        MixWeights::new(v[0], v[1])
    }
}

impl From<MixWeights> for [f64; 2] {
    fn from(w: MixWeights) -> Self {
        [w.w_primary, w.w_secondary]
    }
}

/// Caption templates for mixing; `{A}` is the primary caption and `{B}` the
/// secondary one. The quieter event is described as background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixTemplates {
    pub equal: String,
    pub primary_louder: String,
    pub secondary_louder: String,
}

impl Default for MixTemplates {
    fn default() -> Self {
        MixTemplates {
            equal: "{A} and {B}".into(),
            primary_louder: "{A} and {B} in the background".into(),
            secondary_louder: "{A} in the background and {B}".into(),
        }
    }
}

impl MixTemplates {
    pub fn validate(&self) -> Result<()> {
        for t in [&self.equal, &self.primary_louder, &self.secondary_louder] {
            if t.matches("{A}").count() != 1 || t.matches("{B}").count() != 1 {
                return Err(Error::invalid(
                    "template",
                    format!("{t:?} must contain {{A}} and {{B}} exactly once"),
                ));
            }
        }
        Ok(())
    }

    pub fn for_weights(&self, w: MixWeights) -> &str {
        if w == MixWeights::PRIMARY_LOUDER {
            &self.primary_louder
        } else if w == MixWeights::SECONDARY_LOUDER {
            &self.secondary_louder
        } else {
            &self.equal
        }
    }
}

fn render(template: &str, a: &str, b: &str) -> String {
    // split on {A} first so a caption containing "{B}" is never re-substituted
    let (before, after) = template.split_once("{A}").expect("validated template");
    format!("{}{a}{}", before.replace("{B}", b), after.replace("{B}", b))
}

/// Random choices behind one augmented item; enough to rebuild it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub clotho_id: String,
    pub audiocaps_id: String,
    pub method: Method,
    pub clotho_caption: usize,
    pub audiocaps_caption: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audiocaps_first: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<MixWeights>,
    /// Conjunction (concatenation) or caption template (mixing).
    pub conjunction: String,
    pub item_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedItem {
    pub audio: AudioBuffer,
    pub caption: Caption,
    pub provenance: Provenance,
}

/// A clip with its decoded audio.
#[derive(Debug, Clone, Copy)]
pub struct SourceClip<'a> {
    pub clip: &'a CaptionedClip,
    pub audio: &'a AudioBuffer,
}

fn check_pair(a: SourceClip<'_>, b: SourceClip<'_>) -> Result<()> {
    if a.audio.sample_rate() != b.audio.sample_rate() {
        return Err(Error::SampleRateMismatch {
            left: a.audio.sample_rate(),
            right: b.audio.sample_rate(),
        });
    }
    for s in [a, b] {
        if s.audio.is_empty() {
            return Err(Error::Data(format!("clip {} has no audio samples", s.clip.id)));
        }
        if s.clip.captions.is_empty() {
            return Err(Error::Data(format!("clip {} has no captions", s.clip.id)));
        }
    }
    Ok(())
}

fn caption_at(clip: &CaptionedClip, idx: usize) -> Result<&Caption> {
    clip.captions
        .get(idx)
        .ok_or_else(|| Error::Data(format!("clip {} has no caption {idx}", clip.id)))
}

fn draw_captions<R: Rng>(a: SourceClip<'_>, b: SourceClip<'_>, rng: &mut R) -> (usize, usize) {
    let ia = rng.random_range(0..a.clip.captions.len());
    let ib = rng.random_range(0..b.clip.captions.len());
    (ia, ib)
}

pub fn concat_pair<R: Rng>(a: SourceClip<'_>, b: SourceClip<'_>, rng: &mut R, item_seed: u64) -> Result<AugmentedItem> {
    check_pair(a, b)?;
    let (ia, ib) = draw_captions(a, b, rng);
    let audiocaps_first = rng.random_bool(0.5);
    let conjunction = if rng.random_bool(0.5) {
        Conjunction::FollowedBy
    } else {
        Conjunction::And
    };
    let prov = Provenance {
        clotho_id: a.clip.id.clone(),
        audiocaps_id: b.clip.id.clone(),
        method: Method::Concat,
        clotho_caption: ia,
        audiocaps_caption: ib,
        audiocaps_first: Some(audiocaps_first),
        weights: None,
        conjunction: conjunction.as_str().to_owned(),
        item_seed,
    };
    build(a, b, prov, &MixTemplates::default())
}

pub fn mix_pair<R: Rng>(
    a: SourceClip<'_>,
    b: SourceClip<'_>,
    rng: &mut R,
    item_seed: u64,
    templates: &MixTemplates,
) -> Result<AugmentedItem> {
    check_pair(a, b)?;
    templates.validate()?;
    let (ia, ib) = draw_captions(a, b, rng);
    let weights = MixWeights::OPTIONS[rng.random_range(0..MixWeights::OPTIONS.len())];
    let prov = Provenance {
        clotho_id: a.clip.id.clone(),
        audiocaps_id: b.clip.id.clone(),
        method: Method::Mixing,
        clotho_caption: ia,
        audiocaps_caption: ib,
        audiocaps_first: None,
        weights: Some(weights),
        conjunction: templates.for_weights(weights).to_owned(),
        item_seed,
    };
    build(a, b, prov, templates)
}

/// Rebuilds an item from its recorded draws without any randomness.
pub fn regenerate(a: SourceClip<'_>, b: SourceClip<'_>, provenance: &Provenance) -> Result<AugmentedItem> {
    if a.clip.id != provenance.clotho_id || b.clip.id != provenance.audiocaps_id {
        return Err(Error::invalid(
            "provenance",
            "source ids do not match the supplied clips",
        ));
    }
    check_pair(a, b)?;
    build(a, b, provenance.clone(), &MixTemplates::default())
}

fn build(a: SourceClip<'_>, b: SourceClip<'_>, prov: Provenance, templates: &MixTemplates) -> Result<AugmentedItem> {
    let cap_a = caption_at(a.clip, prov.clotho_caption)?.text();
    let cap_b = caption_at(b.clip, prov.audiocaps_caption)?.text();
    let rate = a.audio.sample_rate();
    let (samples, text) = match prov.method {
        Method::Concat => {
            let first_b = prov
                .audiocaps_first
                .ok_or_else(|| Error::invalid("provenance", "concatenation without an order"))?;
            let conj = match prov.conjunction.as_str() {
                "and" => Conjunction::And,
                "followed by" => Conjunction::FollowedBy,
                other => return Err(Error::invalid("provenance", format!("unknown conjunction {other:?}"))),
            };
            let (first, second, c1, c2) = if first_b {
                (b.audio, a.audio, cap_b, cap_a)
            } else {
                (a.audio, b.audio, cap_a, cap_b)
            };
            let mut samples = Vec::with_capacity(first.len() + second.len());
            samples.extend_from_slice(first.samples());
            samples.extend_from_slice(second.samples());
            (samples, format!("{c1} {} {c2}", conj.as_str()))
        }
        Method::Mixing => {
            let w = prov
                .weights
                .ok_or_else(|| Error::invalid("provenance", "mixing without weights"))?;
            // recorded template wins so overrides survive regeneration
            let template = if prov.conjunction.is_empty() {
                templates.for_weights(w)
            } else {
                prov.conjunction.as_str()
            };
            MixTemplates {
                equal: template.to_owned(),
                primary_louder: template.to_owned(),
                secondary_louder: template.to_owned(),
            }
            .validate()?;
            let (xa, xb) = (a.audio.samples(), b.audio.samples());
            let len = xa.len().max(xb.len());
            let (wp, ws) = (w.primary() as f32, w.secondary() as f32);
            let samples = (0..len)
                .map(|i| {
                    let sa = xa.get(i).copied().unwrap_or(0.0);
                    let sb = xb.get(i).copied().unwrap_or(0.0);
                    wp * sa + ws * sb
                })
                .collect();
            (samples, render(template, cap_a, cap_b))
        }
    };
    Ok(AugmentedItem {
        audio: AudioBuffer::new(samples, rate)?,
        caption: Caption::new(text)?,
        provenance: prov,
    })
}

/// Supplies decoded audio for a clip.
pub trait AudioSource: Sync {
    fn load(&self, clip: &CaptionedClip) -> Result<AudioBuffer>;
}

/// Decodes `clip.audio_path` from disk.
#[derive(Debug, Clone, Copy, Default)]
pub struct WavFiles;

impl AudioSource for WavFiles {
    fn load(&self, clip: &CaptionedClip) -> Result<AudioBuffer> {
        read_wav(&clip.audio_path)
    }
}

/// Audio held in memory, keyed by clip id.
#[derive(Debug, Clone, Default)]
pub struct InMemoryAudio(pub HashMap<String, AudioBuffer>);

impl AudioSource for InMemoryAudio {
    fn load(&self, clip: &CaptionedClip) -> Result<AudioBuffer> {
        self.0
            .get(&clip.id)
            .cloned()
            .ok_or_else(|| Error::Data(format!("no audio for clip {}", clip.id)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub method: Method,
    pub count: usize,
    pub seed: u64,
    pub templates: MixTemplates,
}

impl AugmentConfig {
    pub fn new(method: Method, count: usize, seed: u64) -> Self {
        AugmentConfig {
            method,
            count,
            seed,
            templates: MixTemplates::default(),
        }
    }
}

fn check_corpora(clotho: &Corpus, audiocaps: &Corpus, cfg: &AugmentConfig) -> Result<()> {
    if clotho.is_empty() || audiocaps.is_empty() {
        return Err(Error::invalid("corpus", "both source corpora must be non-empty"));
    }
    if cfg.count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    cfg.templates.validate()?;
    if let Some(long) = audiocaps
        .items()
        .iter()
        .find(|c| c.captions.iter().any(|cap| cap.len() > AUDIOCAPS_MAX_WORDS))
    {
        return Err(Error::invalid(
            "audiocaps",
            format!(
                "clip {} has a caption over {AUDIOCAPS_MAX_WORDS} words; filter the corpus first",
                long.id
            ),
        ));
    }
    Ok(())
}

/// Generates output item `index`: pairs and draws come from a sub-seed of
/// (seed, index) only.
pub fn generate_item(
    index: usize,
    clotho: &Corpus,
    audiocaps: &Corpus,
    cfg: &AugmentConfig,
    audio: &dyn AudioSource,
) -> Result<AugmentedItem> {
    let item_seed = derive_seed(cfg.seed, &index.to_string());
    let mut rng = item_rng(item_seed);
    let ca = &clotho.items()[rng.random_range(0..clotho.len())];
    let cb = &audiocaps.items()[rng.random_range(0..audiocaps.len())];
    let (wa, wb) = (audio.load(ca)?, audio.load(cb)?);
    let a = SourceClip { clip: ca, audio: &wa };
    let b = SourceClip { clip: cb, audio: &wb };
    match cfg.method {
        Method::Concat => concat_pair(a, b, &mut rng, item_seed),
        Method::Mixing => mix_pair(a, b, &mut rng, item_seed, &cfg.templates),
    }
}

/// All `cfg.count` items in index order, kept in memory.
pub fn generate_items(
    clotho: &Corpus,
    audiocaps: &Corpus,
    cfg: &AugmentConfig,
    audio: &dyn AudioSource,
) -> Result<Vec<AugmentedItem>> {
    check_corpora(clotho, audiocaps, cfg)?;
    let results: Vec<Result<AugmentedItem>> = (0..cfg.count)
        .into_par_iter()
        .map(|i| generate_item(i, clotho, audiocaps, cfg, audio))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::at(i, e)))
        .collect()
}

pub fn output_file_name(method: Method, index: usize) -> String {
    format!("{method}_{index:06}.wav")
}

/// Writes `{method}_{index:06}.wav` files and `manifest.jsonl` into
/// `out_dir`, returning the manifest corpus. Files written by a failed run
/// are removed.
pub fn augment_dataset(
    clotho: &Corpus,
    audiocaps: &Corpus,
    cfg: &AugmentConfig,
    audio: &dyn AudioSource,
    out_dir: impl AsRef<Path>,
) -> Result<Corpus> {
    let out_dir = out_dir.as_ref();
    check_corpora(clotho, audiocaps, cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let paths: Vec<PathBuf> = (0..cfg.count)
        .map(|i| out_dir.join(output_file_name(cfg.method, i)))
        .collect();

    let results: Vec<Result<CaptionedClip>> = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let item = generate_item(i, clotho, audiocaps, cfg, audio)?;
            write_wav(&item.audio, &paths[i])?;
            let id = output_file_name(cfg.method, i).trim_end_matches(".wav").to_owned();
            Ok(CaptionedClip::new(
                id,
                &paths[i],
                vec![item.caption],
                Source::Augmented,
                item.audio.sample_rate(),
                item.audio.duration_s(),
            )?
            .with_provenance(item.provenance))
        })
        .collect();

    let outcome = results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::at(i, e)))
        .collect::<Result<Vec<_>>>()
        .and_then(Corpus::new)
        .and_then(|corpus| {
            write_manifest(&corpus, out_dir.join(MANIFEST_NAME))?;
            Ok(corpus)
        });
    if outcome.is_err() {
        for p in paths.iter().chain(std::iter::once(&out_dir.join(MANIFEST_NAME))) {
            let _ = std::fs::remove_file(p);
        }
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clip(id: &str, caps: &[&str], source: Source) -> CaptionedClip {
        CaptionedClip::new(
            id,
            format!("{id}.wav"),
            caps.iter().map(|c| Caption::new(*c).unwrap()).collect(),
            source,
            16_000,
            0.0,
        )
        .unwrap()
    }

    fn buf(s: &[f32], rate: u32) -> AudioBuffer {
        AudioBuffer::new(s.to_vec(), rate).unwrap()
    }

    #[test]
    fn concat_with_forced_draws() {
        let ca = clip("c", &["a dog barks"; 5], Source::Clotho);
        let cb = clip("b", &["rain falls"], Source::Audiocaps);
        let (wa, wb) = (buf(&[0.1, 0.2], 16_000), buf(&[0.3], 16_000));
        let prov = Provenance {
            clotho_id: "c".into(),
            audiocaps_id: "b".into(),
            method: Method::Concat,
            clotho_caption: 0,
            audiocaps_caption: 0,
            audiocaps_first: Some(true),
            weights: None,
            conjunction: "followed by".into(),
            item_seed: 0,
        };
        let item = regenerate(
            SourceClip { clip: &ca, audio: &wa },
            SourceClip { clip: &cb, audio: &wb },
            &prov,
        )
        .unwrap();
        assert_eq!(item.caption.text(), "rain falls followed by a dog barks");
        assert_eq!(item.audio.samples(), &[0.3, 0.1, 0.2]);
    }

    #[test]
    fn mixing_arithmetic_and_templates() {
        let ca = clip("c", &["a dog barks"; 5], Source::Clotho);
        let cb = clip("b", &["rain falls"], Source::Audiocaps);
        let (wa, wb) = (buf(&[0.8, 0.4], 16_000), buf(&[0.2, 0.2, 0.6], 16_000));
        let mut prov = Provenance {
            clotho_id: "c".into(),
            audiocaps_id: "b".into(),
            method: Method::Mixing,
            clotho_caption: 0,
            audiocaps_caption: 0,
            audiocaps_first: None,
            weights: Some(MixWeights::EQUAL),
            conjunction: String::new(),
            item_seed: 0,
        };
        let a = SourceClip { clip: &ca, audio: &wa };
        let b = SourceClip { clip: &cb, audio: &wb };
        let eq = regenerate(a, b, &prov).unwrap();
        let want = [0.5, 0.3, 0.3];
        assert_eq!(eq.audio.len(), 3);
        for (g, w) in eq.audio.samples().iter().zip(want) {
            assert!((g - w).abs() < 1e-6);
        }
        assert_eq!(eq.caption.text(), "a dog barks and rain falls");

        prov.weights = Some(MixWeights::PRIMARY_LOUDER);
        assert_eq!(
            regenerate(a, b, &prov).unwrap().caption.text(),
            "a dog barks and rain falls in the background"
        );
        prov.weights = Some(MixWeights::SECONDARY_LOUDER);
        assert_eq!(
            regenerate(a, b, &prov).unwrap().caption.text(),
            "a dog barks in the background and rain falls"
        );
    }

    #[test]
    fn sample_rate_mismatch_and_empty_audio() {
        let ca = clip("c", &["a dog barks"; 5], Source::Clotho);
        let cb = clip("b", &["rain falls"], Source::Audiocaps);
        let (wa, wb) = (buf(&[0.1], 16_000), buf(&[0.1], 44_100));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = concat_pair(
            SourceClip { clip: &ca, audio: &wa },
            SourceClip { clip: &cb, audio: &wb },
            &mut rng,
            0,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::SampleRateMismatch {
                left: 16_000,
                right: 44_100
            }
        ));

        let empty = buf(&[], 16_000);
        assert!(mix_pair(
            SourceClip { clip: &ca, audio: &wa },
            SourceClip {
                clip: &cb,
                audio: &empty
            },
            &mut rng,
            0,
            &MixTemplates::default()
        )
        .is_err());
    }

    #[test]
    fn weights_are_restricted() {
        assert!(MixWeights::new(0.6, 0.4).is_err());
        assert_eq!(MixWeights::new(0.25, 0.75).unwrap(), MixWeights::SECONDARY_LOUDER);
        let json = serde_json::to_string(&MixWeights::PRIMARY_LOUDER).unwrap();
        assert_eq!(json, "[0.75,0.25]");
        assert!(serde_json::from_str::<MixWeights>("[0.1,0.9]").is_err());
    }

    #[test]
    fn templates_need_both_placeholders() {
        let bad = MixTemplates {
            equal: "{A} alone".into(),
            ..MixTemplates::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(
            render("{A} and {B} in the foreground", "x {B}", "y"),
            "x {B} and y in the foreground"
        );
    }

    #[test]
    fn rejects_long_audiocaps_and_empty_corpora() {
        let clotho = Corpus::new(vec![clip("c", &["a"; 5], Source::Clotho)]).unwrap();
        let long = Corpus::new(vec![clip(
            "b",
            &["one two three four five six seven eight nine"],
            Source::Audiocaps,
        )])
        .unwrap();
        let cfg = AugmentConfig::new(Method::Concat, 1, 1);
        assert!(generate_items(&clotho, &long, &cfg, &InMemoryAudio::default()).is_err());
        assert!(generate_items(&clotho, &Corpus::default(), &cfg, &InMemoryAudio::default()).is_err());
    }
}
