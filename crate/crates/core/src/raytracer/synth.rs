use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EnergyHistogram;

const EVENT_STREAM: u64 = u64::MAX - 1;
const FILL_STREAM: u64 = u64::MAX - 2;

/// Turns an energy histogram into per-band impulse responses.
///
/// A random-sign Dirac sequence is drawn once, with event density growing
/// as `4 π c³ t² / V` (capped at one per sample), and shared across bands.
/// Within each bin every event gets amplitude `sqrt(E / n)` so the bin's
/// energy is reproduced exactly. Bins holding energy but no event get one
/// placed at random.
pub fn histogram_to_rir(
    hist: &EnergyHistogram,
    volume: f64,
    speed_of_sound: f64,
    sample_rate: u32,
    seed: u64,
) -> Vec<Vec<f64>> {
    let fs = sample_rate as f64;
    let bw = hist.bin_width();
    let bin_start = |b: usize| (b as f64 * bw * fs).round() as usize;
    let len = bin_start(hist.n_bins());
    let bands = hist.bands();
    let mut out = vec![vec![0.0; len]; bands];
    if len == 0 {
        return out;
    }

    let mut events = ChaCha8Rng::seed_from_u64(seed);
    events.set_stream(EVENT_STREAM);
    let mut fill = ChaCha8Rng::seed_from_u64(seed);
    fill.set_stream(FILL_STREAM);
    let rate = 4.0 * PI * speed_of_sound.powi(3) / volume;

    let mut signs: Vec<(usize, f64)> = Vec::new();
    for bin in 0..hist.n_bins() {
        let (start, end) = (bin_start(bin), bin_start(bin + 1).min(len));
        signs.clear();
        for n in start..end {
            let t = n as f64 / fs;
            let p = (rate * t * t / fs).min(1.0);
            let u: f64 = events.random();
            let positive: bool = events.random();
            if u < p {
                signs.push((n, if positive { 1.0 } else { -1.0 }));
            }
        }
        let has_energy = (0..bands).any(|b| hist.get(bin, b) > 0.0);
        if !has_energy || end <= start {
            continue;
        }
        if signs.is_empty() {
            let n = fill.random_range(start..end);
            let sign = if fill.random::<bool>() { 1.0 } else { -1.0 };
            signs.push((n, sign));
        }
        let count = signs.len() as f64;
        for (band, series) in out.iter_mut().enumerate() {
            let amp = (hist.get(bin, band) / count).sqrt();
            for &(n, sign) in &signs {
                series[n] = sign * amp;
            }
        }
    }
    out
}
