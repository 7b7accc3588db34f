use std::f64::consts::PI;

use crate::dsp;
use crate::error::{Error, Result};
use crate::materials::BandScheme;

/// Length of the frequency grid the filters are designed on.
pub const FILTER_FFT_SIZE: usize = 512;

/// Taps per filter: the odd-length symmetric part of the design grid.
pub const FILTER_TAPS: usize = FILTER_FFT_SIZE - 1;

const HALF: usize = FILTER_TAPS / 2;

/// Linear-phase FIR filters splitting `[0, Fs/2]` into the simulation bands.
///
/// Band edges sit at the geometric midpoints between adjacent centers; the
/// lowest band reaches down to DC and the highest up to Nyquist, so the
/// filters sum to a pure delay of [`FilterBank::delay`] samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: Vec<Vec<f64>>,
    bands: BandScheme,
    edges: Vec<f64>,
    sample_rate: u32,
}

impl FilterBank {
    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    pub fn bands(&self) -> &BandScheme {
        &self.bands
    }

    /// Crossover frequencies between adjacent bands.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Group delay of every filter, in samples.
    pub fn delay(&self) -> usize {
        HALF
    }

    /// Magnitude response of filter `band` at `freq_hz`.
    pub fn magnitude(&self, band: usize, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate as f64;
        let h = &self.filters[band];
        // Symmetric about HALF: H(w) = e^{-jwHALF} (h[HALF] + 2 Σ h[HALF+k] cos(wk)).
        let mut acc = h[HALF];
        for k in 1..=HALF {
            acc += 2.0 * h[HALF + k] * (w * k as f64).cos();
        }
        acc.abs()
    }

    /// CSV of magnitude responses: `freq_hz` then one dB column per band.
    pub fn response_csv(&self, points: usize) -> String {
        let nyquist = self.sample_rate as f64 / 2.0;
        let mut out = String::from("freq_hz");
        for c in self.bands.centers() {
            out.push_str(&format!(",band_{c}_db"));
        }
        out.push('\n');
        for i in 0..points {
            let f = nyquist * i as f64 / (points - 1).max(1) as f64;
            out.push_str(&format!("{f:.3}"));
            for b in 0..self.len() {
                let db = 20.0 * self.magnitude(b, f).max(1e-300).log10();
                out.push_str(&format!(",{db:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Designs the bank by the window method: ideal band masks on the
/// 512-point grid, inverse transform, Hann window over the 511 taps.
///
/// Bands whose lower edge lies at or above Nyquist are dropped with a
/// warning.
pub fn design_bank(sample_rate: u32, bands: &BandScheme) -> Result<FilterBank> {
    let fs = sample_rate as f64;
    let nyquist = fs / 2.0;
    let all = bands.centers();
    let mut kept: Vec<f64> = Vec::with_capacity(all.len());
    for (i, &c) in all.iter().enumerate() {
        let lower = if i == 0 { 0.0 } else { (all[i - 1] * c).sqrt() };
        if lower < nyquist {
            kept.push(c);
        }
    }
    if kept.is_empty() {
        return Err(Error::Config(format!(
            "no band fits below Nyquist at {sample_rate} Hz"
        )));
    }
    if kept.len() < all.len() {
        log::warn!(
            "filter bank at {sample_rate} Hz keeps {} of {} bands",
            kept.len(),
            all.len()
        );
    }
    let edges: Vec<f64> = kept.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();

    let bins = FILTER_FFT_SIZE / 2;
    let bin_hz = fs / FILTER_FFT_SIZE as f64;
    let band_of_bin = |k: usize| -> usize {
        let f = k as f64 * bin_hz;
        edges.iter().take_while(|&&e| f >= e).count()
    };

    let mut filters = vec![vec![0.0; FILTER_TAPS]; kept.len()];
    let n = FILTER_FFT_SIZE as f64;
    for (band, h) in filters.iter_mut().enumerate() {
        let mask: Vec<f64> = (0..=bins)
            .map(|k| if band_of_bin(k) == band { 1.0 } else { 0.0 })
            .collect();
        for t in 0..=HALF {
            // Real zero-phase inverse DFT at lag t.
            let mut v = mask[0];
            for (k, &m) in mask.iter().enumerate().take(bins).skip(1) {
                v += 2.0 * m * (2.0 * PI * (k * t) as f64 / n).cos();
            }
            v += mask[bins] * (PI * t as f64).cos();
            v /= n;
            let window = 0.5 * (1.0 + (2.0 * PI * t as f64 / n).cos());
            h[HALF + t] = v * window;
            h[HALF - t] = v * window;
        }
    }

    Ok(FilterBank {
        filters,
        bands: BandScheme::new(kept)?,
        edges,
        sample_rate,
    })
}

/// Filters each band response with its bank filter and sums.
///
/// The bank's group delay is removed so arrivals stay at their physical
/// sample; the result has `len + FILTER_TAPS - 1 - delay` samples.
pub fn merge_bands(band_rirs: &[Vec<f64>], bank: &FilterBank) -> Result<Vec<f64>> {
    if band_rirs.len() != bank.len() {
        return Err(Error::BandMismatch {
            expected: bank.len(),
            actual: band_rirs.len(),
        });
    }
    let len = band_rirs[0].len();
    if let Some(bad) = band_rirs.iter().find(|r| r.len() != len) {
        return Err(Error::Config(format!(
            "band responses differ in length ({len} vs {})",
            bad.len()
        )));
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let full = dsp::convolve_sum(band_rirs, bank.filters());
    Ok(full[bank.delay()..].to_vec())
}
