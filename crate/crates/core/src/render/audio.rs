use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rir::{Method, Rir};

/// Single-channel audio.
#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleFormat {
    I16,
    #[default]
    F32,
}

impl fmt::Display for SampleFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleFormat::I16 => "i16",
            SampleFormat::F32 => "f32",
        })
    }
}

impl FromStr for SampleFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "i16" | "pcm16" => Ok(SampleFormat::I16),
            "f32" | "float" => Ok(SampleFormat::F32),
            other => Err(format!("unknown sample format `{other}` (use i16 or f32)")),
        }
    }
}

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> Error + '_ {
    move |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a WAV file; multichannel input is averaged down to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Audio> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(wav_err(path))?;
    let spec = reader.spec();
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err(path))?
        }
    };
    let channels = usize::from(spec.channels.max(1));
    if channels > 1 {
        log::info!("{}: averaging {channels} channels to mono", path.display());
    }
    let samples = interleaved
        .chunks(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    Ok(Audio {
        samples,
        sample_rate: spec.sample_rate,
    })
}

/// Writes mono samples; integer output is clipped to `[-1, 1]`.
pub fn write_wav(
    path: impl AsRef<Path>,
    samples: &[f64],
    sample_rate: u32,
    format: SampleFormat,
) -> Result<()> {
    let path = path.as_ref();
    let (bits, sample_format) = match format {
        SampleFormat::I16 => (16, hound::SampleFormat::Int),
        SampleFormat::F32 => (32, hound::SampleFormat::Float),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: bits,
        sample_format,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err(path))?;
    for &x in samples {
        match format {
            SampleFormat::I16 => {
                let v = (x.clamp(-1.0, 1.0) * f64::from(i16::MAX)).round() as i16;
                writer.write_sample(v)
            }
            SampleFormat::F32 => writer.write_sample(x as f32),
        }
        .map_err(wav_err(path))?;
    }
    writer.finalize().map_err(wav_err(path))
}

/// Metadata written next to an exported RIR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RirSidecar {
    pub method: Method,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub bands: Vec<f64>,
    pub sample_rate: u32,
    pub samples: usize,
    pub format: String,
    /// Seconds since the Unix epoch.
    pub generated_at: u64,
}

impl RirSidecar {
    pub fn sidecar_path(wav: &Path) -> PathBuf {
        wav.with_extension("json")
    }
}

/// Writes `rir` as WAV plus a JSON sidecar with the same stem.
pub fn write_rir(
    path: impl AsRef<Path>,
    rir: &Rir,
    format: SampleFormat,
    config_hash: &str,
) -> Result<PathBuf> {
    let path = path.as_ref();
    write_wav(path, &rir.samples, rir.sample_rate, format)?;
    let sidecar = RirSidecar {
        method: rir.meta.method,
        seed: rir.meta.seed,
        config_hash: config_hash.to_owned(),
        bands: rir.meta.bands.clone(),
        sample_rate: rir.sample_rate,
        samples: rir.samples.len(),
        format: format.to_string(),
        generated_at: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let json_path = RirSidecar::sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
    Ok(json_path)
}
