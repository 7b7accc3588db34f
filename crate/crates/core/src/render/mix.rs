use std::ops::Range;

use super::Audio;
use crate::dsp;
use crate::error::{Error, Result};
use crate::rir::Rir;

/// Samples below this fraction of the reverberant target's peak are
/// outside its active extent.
pub const ACTIVE_THRESHOLD: f64 = 1e-3;

/// Output peak after normalization, in linear full scale (-1 dBFS).
pub fn normalized_peak() -> f64 {
    10f64.powf(-1.0 / 20.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Noise {
    pub audio: Audio,
    /// Index into the RIR list.
    pub source: usize,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Scale to -1 dBFS only if the mix would clip.
    #[default]
    PeakIfClipping,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixSpec {
    pub target: Audio,
    pub target_source: usize,
    pub noises: Vec<Noise>,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixOutput {
    /// Final mixture.
    pub samples: Vec<f64>,
    /// Reverberant target before normalization.
    pub target: Vec<f64>,
    /// Reverberant, gain-scaled noises before normalization.
    pub noises: Vec<Vec<f64>>,
    pub gains: Vec<f64>,
    /// Normalization factor applied to the sum.
    pub scale: f64,
    /// Active extent of the reverberant target.
    pub active: Range<usize>,
    pub sample_rate: u32,
}

fn check_rate(context: String, found: u32, expected: u32) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::SampleRateMismatch {
            context,
            found,
            expected,
        })
    }
}

fn rir_at(rirs: &[Rir], index: usize) -> Result<&Rir> {
    rirs.get(index).ok_or_else(|| {
        Error::Config(format!(
            "source index {index} out of range ({} RIRs)",
            rirs.len()
        ))
    })
}

fn mean_power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64
}

/// Repeats or crops `x` to `len` samples.
fn fit_length(x: &[f64], len: usize) -> Vec<f64> {
    x.iter().copied().cycle().take(len).collect()
}

/// Range from the first to the last sample above `ACTIVE_THRESHOLD × peak`.
pub fn active_extent(x: &[f64]) -> Range<usize> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0..0;
    }
    let floor = ACTIVE_THRESHOLD * peak;
    let first = x.iter().position(|v| v.abs() >= floor).unwrap_or(0);
    let last = x.iter().rposition(|v| v.abs() >= floor).unwrap_or(0);
    first..last + 1
}

/// Reverberant mixture `x = h_t * p_t + Σ g_i (h_i * p_i)`.
///
/// Each noise gain sets the mean-power ratio between the reverberant target
/// and that reverberant noise, both measured over the target's active
/// extent, to the requested SNR. Noises are looped or cropped to the target
/// length before convolution; the output has the length of the reverberant
/// target.
pub fn mix_scene(rirs: &[Rir], spec: &MixSpec) -> Result<MixOutput> {
    let target_rir = rir_at(rirs, spec.target_source)?;
    let fs = target_rir.sample_rate;
    for (i, r) in rirs.iter().enumerate() {
        check_rate(format!("RIR {i}"), r.sample_rate, fs)?;
    }
    check_rate("target audio".into(), spec.target.sample_rate, fs)?;
    if spec.target.samples.is_empty() {
        return Err(Error::EmptyAudio("target".into()));
    }
    if target_rir.samples.is_empty() {
        return Err(Error::EmptyAudio(format!("RIR {}", spec.target_source)));
    }
    for (i, n) in spec.noises.iter().enumerate() {
        check_rate(format!("noise {i}"), n.audio.sample_rate, fs)?;
        if n.audio.samples.is_empty() {
            return Err(Error::EmptyAudio(format!("noise {i}")));
        }
        if !n.snr_db.is_finite() {
            return Err(Error::Config(format!("noise {i}: SNR must be finite")));
        }
        if rir_at(rirs, n.source)?.samples.is_empty() {
            return Err(Error::EmptyAudio(format!("RIR {}", n.source)));
        }
    }

    let target = dsp::convolve(&spec.target.samples, &target_rir.samples);
    let len = target.len();
    let active = active_extent(&target);
    if active.is_empty() {
        return Err(Error::EmptyAudio("target is silent after convolution".into()));
    }
    let p_target = mean_power(&target[active.clone()]);

    let mut gains = Vec::with_capacity(spec.noises.len());
    let mut noises = Vec::with_capacity(spec.noises.len());
    for (i, n) in spec.noises.iter().enumerate() {
        let dry = fit_length(&n.audio.samples, spec.target.samples.len());
        let mut wet = dsp::convolve(&dry, &rirs[n.source].samples);
        wet.resize(len, 0.0);
        let p_noise = mean_power(&wet[active.clone()]);
        if p_noise == 0.0 {
            return Err(Error::EmptyAudio(format!(
                "noise {i} is silent over the target's active extent"
            )));
        }
        let g = (p_target / (p_noise * 10f64.powf(n.snr_db / 10.0))).sqrt();
        wet.iter_mut().for_each(|v| *v *= g);
        gains.push(g);
        noises.push(wet);
    }

    let mut samples = target.clone();
    for wet in &noises {
        for (s, v) in samples.iter_mut().zip(wet) {
            *s += v;
        }
    }
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = match spec.normalization {
        Normalization::PeakIfClipping if peak > 1.0 => normalized_peak() / peak,
        _ => 1.0,
    };
    if scale != 1.0 {
        samples.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(MixOutput {
        samples,
        target,
        noises,
        gains,
        scale,
        active,
        sample_rate: fs,
    })
}
