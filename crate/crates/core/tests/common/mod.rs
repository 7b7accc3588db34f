#![allow(dead_code)]

use rirsim_core::{EnvSpec, ReceiverSpec, RoomSpec, SourceSpec, Vec3};

/// Energy decay curve in dB from backward integration of `energy`.
pub fn schroeder_db(energy: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut edc: Vec<f64> = energy
        .iter()
        .rev()
        .map(|e| {
            acc += e;
            acc
        })
        .collect();
    edc.reverse();
    let total = edc.first().copied().unwrap_or(0.0);
    edc.iter().map(|e| 10.0 * (e / total).log10()).collect()
}

/// Least-squares slope (dB per step) of `db` between two levels.
fn fit_slope(db: &[f64], upper: f64, lower: f64) -> Option<f64> {
    let start = db.iter().position(|&v| v <= upper)?;
    let end = db.iter().position(|&v| v <= lower)?;
    if end <= start + 1 {
        return None;
    }
    let n = (end - start + 1) as f64;
    let xs = (start..=end).map(|i| i as f64);
    let mx = xs.clone().sum::<f64>() / n;
    let my = db[start..=end].iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.zip(&db[start..=end]) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Some(sxy / sxx)
}

/// RT60 from a sequence of energies spaced `dt` apart: T20 fit
/// (-5 to -25 dB), falling back to T10 when the decay is too short.
pub fn rt60_from_energy(energy: &[f64], dt: f64) -> Option<f64> {
    let db = schroeder_db(energy);
    let slope = fit_slope(&db, -5.0, -25.0).or_else(|| fit_slope(&db, -5.0, -15.0))?;
    (slope < 0.0).then(|| -60.0 / (slope / dt))
}

pub fn rt60_from_rir(samples: &[f64], sample_rate: u32) -> Option<f64> {
    let energy: Vec<f64> = samples.iter().map(|x| x * x).collect();
    rt60_from_energy(&energy, 1.0 / sample_rate as f64)
}

pub fn shoebox(dims: [f64; 3], alpha: f64, scattering: f64, src: [f64; 3], rec: [f64; 3]) -> RoomSpec {
    RoomSpec::uniform(
        Vec3::from(dims),
        alpha,
        scattering,
        vec![SourceSpec {
            position: Vec3::from(src),
        }],
        vec![ReceiverSpec::new(Vec3::from(rec))],
        EnvSpec::default(),
    )
    .unwrap()
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Image found by explicit mirroring.
#[derive(Debug, Clone)]
pub struct MirrorImage {
    pub position: [f64; 3],
    pub gain: f64,
    pub order: u32,
}

/// Images by repeatedly mirroring the source across the six wall planes,
/// never across the same wall twice in a row, up to `max_order`
/// reflections. Duplicate positions are merged (lowest order kept).
/// `alpha` is indexed west, east, south, north, floor, ceiling; each
/// reflection scales the amplitude by `sqrt(1 - α)`.
pub fn mirror_images(dims: [f64; 3], source: [f64; 3], alpha: [f64; 6], max_order: u32) -> Vec<MirrorImage> {
    let mut found: Vec<MirrorImage> = vec![MirrorImage {
        position: source,
        gain: 1.0,
        order: 0,
    }];
    let mut frontier = vec![(source, 1.0, usize::MAX)];
    for order in 1..=max_order {
        let mut next = Vec::new();
        for (pos, gain, last) in frontier {
            for wall in 0..6 {
                if wall == last {
                    continue;
                }
                let axis = wall / 2;
                let plane = if wall % 2 == 0 { 0.0 } else { dims[axis] };
                let mut p = pos;
                p[axis] = 2.0 * plane - pos[axis];
                let g = gain * (1.0 - alpha[wall]).sqrt();
                next.push((p, g, wall));
                if !found.iter().any(|f| close(f.position, p)) {
                    found.push(MirrorImage {
                        position: p,
                        gain: g,
                        order,
                    });
                }
            }
        }
        frontier = next;
    }
    found
}

fn close(a: [f64; 3], b: [f64; 3]) -> bool {
    (0..3).all(|i| (a[i] - b[i]).abs() < 1e-9)
}

/// Energy of `x` above `cutoff_hz`, by subtracting the low-frequency bins
/// of a zero-padded DFT (Parseval).
pub fn energy_above(x: &[f64], sample_rate: f64, cutoff_hz: f64) -> f64 {
    let n = (x.len().next_power_of_two() * 2) as f64;
    let bins = (cutoff_hz * n / sample_rate).ceil() as usize;
    let mut low = 0.0;
    for k in 0..bins {
        let w = 2.0 * std::f64::consts::PI * k as f64 / n;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in x.iter().enumerate() {
            let (s, c) = (w * i as f64).sin_cos();
            re += v * c;
            im -= v * s;
        }
        let weight = if k == 0 { 1.0 } else { 2.0 };
        low += weight * (re * re + im * im) / n;
    }
    energy(x) - low
}
