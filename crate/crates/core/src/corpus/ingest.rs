use std::collections::HashSet;
use std::path::Path;

use log::warn;

use super::{probe_wav, Caption, CaptionedClip, Corpus, Source};
use crate::error::{Error, Result};

/// Development, evaluation and validation split sizes of Clotho v2.
pub const CLOTHO_SPLIT_SIZES: [usize; 3] = [3_839, 1_045, 1_045];

/// Recorded when the referenced audio file is not present at ingest time.
pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

const CLOTHO_COLUMNS: [&str; 6] = [
    "file_name",
    "caption_1",
    "caption_2",
    "caption_3",
    "caption_4",
    "caption_5",
];
const AUDIOCAPS_COLUMNS: [&str; 4] = ["audiocap_id", "youtube_id", "start_time", "caption"];

fn column_indices(headers: &csv::StringRecord, wanted: &[&str], path: &Path) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| Error::Data(format!("{}: missing column `{name}`", path.display())))
        })
        .collect()
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

/// Audio facts for a referenced file: probed from the header when the file
/// exists, otherwise the default rate and zero duration.
struct AudioFacts {
    missing: usize,
    out_of_range: usize,
}

impl AudioFacts {
    fn probe(&mut self, path: &Path, duration_range: Option<(f64, f64)>) -> Result<(u32, f64)> {
        if !path.exists() {
            self.missing += 1;
            return Ok((DEFAULT_SAMPLE_RATE, 0.0));
        }
        let info = probe_wav(path)?;
        let duration = info.duration_s();
        if let Some((lo, hi)) = duration_range {
            if !(lo..=hi).contains(&duration) {
                self.out_of_range += 1;
            }
        }
        Ok((info.sample_rate, duration))
    }
}

fn caption_cell(record: &csv::StringRecord, idx: usize, line: u64, column: &str) -> Result<Caption> {
    let cell = record.get(idx).unwrap_or("");
    Caption::new(cell).map_err(|_| Error::Data(format!("line {line}: empty or wordless `{column}`")))
}

/// Loads a Clotho captions CSV (`file_name,caption_1..caption_5`).
pub fn load_clotho_csv(csv_path: impl AsRef<Path>, audio_dir: impl AsRef<Path>) -> Result<Corpus> {
    let csv_path = csv_path.as_ref();
    let audio_dir = audio_dir.as_ref();
    let mut reader = open_csv(csv_path)?;
    let cols = column_indices(reader.headers()?, &CLOTHO_COLUMNS, csv_path)?;
    let mut facts = AudioFacts {
        missing: 0,
        out_of_range: 0,
    };
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let file_name = record.get(cols[0]).unwrap_or("").trim().to_owned();
        if file_name.is_empty() {
            return Err(Error::Data(format!("line {line}: empty file_name")));
        }
        if !seen.insert(file_name.clone()) {
            return Err(Error::DuplicateId(file_name));
        }
        let captions = cols[1..]
            .iter()
            .zip(&CLOTHO_COLUMNS[1..])
            .map(|(&idx, name)| caption_cell(&record, idx, line, name))
            .collect::<Result<Vec<_>>>()?;
        let audio_path = audio_dir.join(&file_name);
        let (sample_rate, duration_s) = facts.probe(&audio_path, Some((15.0, 30.0)))?;
        items.push(CaptionedClip::new(
            file_name,
            audio_path,
            captions,
            Source::Clotho,
            sample_rate,
            duration_s,
        )?);
    }
    if !CLOTHO_SPLIT_SIZES.contains(&items.len()) {
        warn!(
            "{}: {} clips; Clotho v2 splits have {:?}",
            csv_path.display(),
            items.len(),
            CLOTHO_SPLIT_SIZES
        );
    }
    if facts.missing > 0 {
        warn!(
            "{}: {} audio files not found under {}; recorded {} Hz and 0 s",
            csv_path.display(),
            facts.missing,
            audio_dir.display(),
            DEFAULT_SAMPLE_RATE
        );
    }
    if facts.out_of_range > 0 {
        warn!(
            "{}: {} clips fall outside the 15-30 s duration range",
            csv_path.display(),
            facts.out_of_range
        );
    }
    Corpus::new(items)
}

/// Loads an AudioCaps CSV (`audiocap_id,youtube_id,start_time,caption`).
/// Audio is expected at `{audio_dir}/{audiocap_id}.wav`.
pub fn load_audiocaps_csv(csv_path: impl AsRef<Path>, audio_dir: impl AsRef<Path>) -> Result<Corpus> {
    let csv_path = csv_path.as_ref();
    let audio_dir = audio_dir.as_ref();
    let mut reader = open_csv(csv_path)?;
    let cols = column_indices(reader.headers()?, &AUDIOCAPS_COLUMNS, csv_path)?;
    let mut facts = AudioFacts {
        missing: 0,
        out_of_range: 0,
    };
    let mut items = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record.get(cols[0]).unwrap_or("").trim().to_owned();
        if id.is_empty() {
            return Err(Error::Data(format!("line {line}: empty audiocap_id")));
        }
        let start = record.get(cols[2]).unwrap_or("").trim();
        if start.parse::<f64>().map(|v| !v.is_finite()).unwrap_or(true) {
            return Err(Error::Data(format!("line {line}: non-numeric start_time {start:?}")));
        }
        let caption = caption_cell(&record, cols[3], line, "caption")?;
        let audio_path = audio_dir.join(format!("{id}.wav"));
        let (sample_rate, duration_s) = facts.probe(&audio_path, None)?;
        items.push(CaptionedClip::new(
            id,
            audio_path,
            vec![caption],
            Source::Audiocaps,
            sample_rate,
            duration_s,
        )?);
    }
    if facts.missing > 0 {
        warn!(
            "{}: {} audio files not found under {}",
            csv_path.display(),
            facts.missing,
            audio_dir.display()
        );
    }
    Corpus::new(items)
}
