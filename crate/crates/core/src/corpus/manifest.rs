//! JSON-lines manifest: one clip record per line.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{Caption, CaptionedClip, Corpus, Source};
use crate::augment::Provenance;
use crate::error::{Error, Result};
use crate::report::write_atomic;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    audio_path: PathBuf,
    captions: Vec<Caption>,
    source: String,
    sample_rate: u32,
    duration_s: f64,
    #[serde(default)]
    provenance: Option<Provenance>,
}

/// Written through a temporary sibling file, so a failed write leaves no
/// partial manifest.
pub fn write_manifest(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, |out| {
        write_records(corpus.items(), out).map_err(|e| Error::io(path, e))
    })
}

fn write_records<W: Write + ?Sized>(items: &[CaptionedClip], out: &mut W) -> std::io::Result<()> {
    for clip in items {
        serde_json::to_writer(&mut *out, clip)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut items = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record =
            serde_json::from_str(&line).map_err(|e| Error::Data(format!("{}:{}: {e}", path.display(), n + 1)))?;
        let source: Source = rec.source.parse()?;
        let clip = CaptionedClip {
            id: rec.id,
            audio_path: rec.audio_path,
            captions: rec.captions,
            source,
            sample_rate: rec.sample_rate,
            duration_s: rec.duration_s,
            provenance: rec.provenance,
        };
        clip.validate()
            .map_err(|e| Error::Data(format!("{}:{}: {e}", path.display(), n + 1)))?;
        items.push(clip);
    }
    Corpus::new(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_clip() -> impl Strategy<Value = CaptionedClip> {
        let caption = "[A-Za-z]{1,6}( [a-z,.]{1,6}){0,5}";
        (
            "[a-z0-9_]{1,8}",
            prop_oneof![Just(Source::Clotho), Just(Source::Audiocaps), Just(Source::Augmented)],
            proptest::collection::vec(caption, 5),
            1u32..96_000,
            0.0f64..100.0,
            1usize..=5,
        )
            .prop_map(|(id, source, caps, rate, dur, k)| {
                let n = match source {
                    Source::Clotho => 5,
                    Source::Audiocaps => 1,
                    Source::Augmented => k,
                };
                CaptionedClip::new(
                    id.clone(),
                    format!("audio/{id}.wav"),
                    caps[..n].iter().map(|c| Caption::new(c.as_str()).unwrap()).collect(),
                    source,
                    rate,
                    dur,
                )
                .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip(clips in proptest::collection::vec(arb_clip(), 0..12)) {
            let mut seen = std::collections::HashSet::new();
            let clips: Vec<_> = clips.into_iter().filter(|c| seen.insert(c.id.clone())).collect();
            let corpus = Corpus::new(clips).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("m.jsonl");
            write_manifest(&corpus, &p).unwrap();
            prop_assert_eq!(load_manifest(&p).unwrap(), corpus);
        }
    }

    #[test]
    fn malformed_records() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        std::fs::write(
            &p,
            r#"{"id":"a","audio_path":"a.wav","source":"audiocaps","sample_rate":16000,"duration_s":1.0}"#,
        )
        .unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::Data(_))));

        std::fs::write(
            &p,
            r#"{"id":"a","audio_path":"a.wav","captions":["x"],"source":"foo","sample_rate":16000,"duration_s":1.0}"#,
        )
        .unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::Data(m)) if m.contains("foo")));

        std::fs::write(&p, "{not json").unwrap();
        assert!(load_manifest(&p).is_err());
    }

    #[test]
    fn exact_field_set() {
        let clip = CaptionedClip::new(
            "a",
            "a.wav",
            vec![Caption::new("a dog").unwrap()],
            Source::Audiocaps,
            16_000,
            1.5,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&clip).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["audio_path", "captions", "duration_s", "id", "sample_rate", "source"]
        );
    }
}
