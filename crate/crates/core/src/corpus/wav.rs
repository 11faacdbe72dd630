//! 16-bit PCM WAV I/O on normalized mono buffers.

use std::path::Path;

use crate::error::{Error, Result};

const SCALE: f32 = 32768.0;

/// Mono audio with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample_rate", "must be positive"));
        }
        if let Some(pos) = samples.iter().position(|s| !(-1.0..=1.0).contains(s)) {
            return Err(Error::invalid(
                "samples",
                format!("sample {pos} = {} lies outside [-1, 1]", samples[pos]),
            ));
        }
        Ok(AudioBuffer { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }
}

/// Header facts gathered without decoding the payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavInfo {
    pub sample_rate: u32,
    pub channels: u16,
    pub frames: u32,
}

impl WavInfo {
    pub fn duration_s(&self) -> f64 {
        f64::from(self.frames) / f64::from(self.sample_rate)
    }
}

fn open(path: &Path) -> Result<hound::WavReader<std::io::BufReader<std::fs::File>>> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::Unsupported => Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: "unsupported WAV encoding".into(),
        },
        other => Error::MalformedAudio {
            path: path.to_owned(),
            reason: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: format!(
                "{}-bit {:?}; only 16-bit PCM is supported",
                spec.bits_per_sample, spec.sample_format
            ),
        });
    }
    Ok(reader)
}

pub fn probe_wav(path: impl AsRef<Path>) -> Result<WavInfo> {
    let path = path.as_ref();
    let reader = open(path)?;
    let spec = reader.spec();
    Ok(WavInfo {
        sample_rate: spec.sample_rate,
        channels: spec.channels,
        frames: reader.duration(),
    })
}

/// Reads a 16-bit PCM WAV, downmixing multi-channel audio by per-frame mean.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels.max(1));
    let raw = reader
        .samples::<i16>()
        .collect::<Result<Vec<i16>, _>>()
        .map_err(|e| Error::MalformedAudio {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
    if raw.is_empty() {
        return Err(Error::MalformedAudio {
            path: path.to_owned(),
            reason: "zero-length payload".into(),
        });
    }
    if raw.len() % channels != 0 {
        return Err(Error::MalformedAudio {
            path: path.to_owned(),
            reason: format!("{} samples do not fill {channels}-channel frames", raw.len()),
        });
    }
    let samples = if channels == 1 {
        raw.iter().map(|&s| f32::from(s) / SCALE).collect()
    } else {
        raw.chunks_exact(channels)
            .map(|frame| {
                let sum: f32 = frame.iter().map(|&s| f32::from(s) / SCALE).sum();
                sum / channels as f32
            })
            .collect()
    };
    AudioBuffer::new(samples, spec.sample_rate)
}

fn quantize(sample: f32) -> i16 {
    (sample * SCALE).round().clamp(-32767.0, 32767.0) as i16
}

/// Writes a mono 16-bit PCM WAV, saturating at ±32767.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let map = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::MalformedAudio {
            path: path.to_owned(),
            reason: other.to_string(),
        },
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map)?;
    {
        let mut w = writer.get_i16_writer(buffer.samples.len() as u32);
        for &s in &buffer.samples {
            w.write_sample(quantize(s));
        }
        w.flush().map_err(map)?;
    }
    writer.finalize().map_err(map)
}
