//! Image source method for shoebox rooms.
//!
//! Images live on the lattice `(i, j, k) ∈ Z³`. Along one axis of length
//! `L`, index `n` places the image of coordinate `s` at `n L + s` for even
//! `n` and at `(n + 1) L - s` for odd `n`; the path crosses the high wall
//! `ceil(n / 2)` times and the low wall `floor(n / 2)` times for `n > 0`,
//! mirrored for `n < 0`. An image's order is `|i| + |j| + |k|`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::materials::WallCoefficients;
use crate::scene::{ReceiverSpec, RoomSpec, SourceSpec, Wall};

/// Reflection order used by the reference setup.
pub const DEFAULT_ORDER: u32 = 17;

/// Number of taps of the fractional-delay kernel.
pub const KERNEL_TAPS: usize = 81;

const KERNEL_HALF: i64 = (KERNEL_TAPS as i64 - 1) / 2;

/// Receiver closer than this to an image is degenerate.
pub const DEGENERATE_DISTANCE: f64 = 1e-6;

/// How a wall's energy absorption coefficient maps to the amplitude factor
/// applied per reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionLaw {
    /// `sqrt(1 - α)`: the reflected energy is `1 - α`, the same loss the
    /// ray tracer applies.
    #[default]
    Energy,
    /// `sqrt(1 - α²)`.
    SquaredAbsorption,
}

impl ReflectionLaw {
    pub fn amplitude(self, alpha: f64) -> f64 {
        match self {
            ReflectionLaw::Energy => (1.0 - alpha).max(0.0).sqrt(),
            ReflectionLaw::SquaredAbsorption => (1.0 - alpha * alpha).max(0.0).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageSource {
    pub position: Vec3,
    /// Lattice index of the image.
    pub index: [i32; 3],
    pub order: u32,
    /// Accumulated amplitude reflection factor per band.
    pub gain: Vec<f64>,
}

/// Closed-form number of lattice points with Manhattan norm at most `order`.
pub fn image_count(order: u32) -> usize {
    let m = order as usize;
    // 1 + Σ_{o=1}^{m} (4 o² + 2)
    1 + 2 * m * (m + 1) * (2 * m + 1) / 3 + 2 * m
}

/// Per-axis data for lattice index `n`: image coordinate and the number
/// of (low, high) wall crossings.
fn axis_image(n: i32, length: f64, coord: f64) -> (f64, u32, u32) {
    let pos = if n % 2 == 0 {
        n as f64 * length + coord
    } else {
        (n + 1) as f64 * length - coord
    };
    let m = n.unsigned_abs();
    let (low, high) = if n >= 0 {
        (m / 2, m.div_ceil(2))
    } else {
        (m.div_ceil(2), m / 2)
    };
    (pos, low, high)
}

/// All images of `source` up to `order` reflections.
pub fn enumerate_images(
    room: &RoomSpec,
    source: &SourceSpec,
    walls: &WallCoefficients,
    order: u32,
    law: ReflectionLaw,
) -> Vec<ImageSource> {
    let bands = walls.bands();
    let m = order as i32;
    let dims = room.dimensions();

    // axis_tables[axis][n + m] = (coordinate, gain per band)
    let axis_tables: Vec<Vec<(f64, Vec<f64>)>> = (0..3)
        .map(|axis| {
            let low = &walls.absorption[Wall::on(axis, false).index()];
            let high = &walls.absorption[Wall::on(axis, true).index()];
            (-m..=m)
                .map(|n| {
                    let (pos, n_low, n_high) = axis_image(n, dims[axis], source.position[axis]);
                    let gain = (0..bands)
                        .map(|b| {
                            law.amplitude(low[b]).powi(n_low as i32)
                                * law.amplitude(high[b]).powi(n_high as i32)
                        })
                        .collect();
                    (pos, gain)
                })
                .collect()
        })
        .collect();

    let mut images = Vec::with_capacity(image_count(order));
    for i in -m..=m {
        let ri = m - i.abs();
        for j in -ri..=ri {
            let rk = ri - j.abs();
            for k in -rk..=rk {
                let (x, gx) = &axis_tables[0][(i + m) as usize];
                let (y, gy) = &axis_tables[1][(j + m) as usize];
                let (z, gz) = &axis_tables[2][(k + m) as usize];
                let gain = (0..bands).map(|b| gx[b] * gy[b] * gz[b]).collect();
                images.push(ImageSource {
                    position: Vec3::new(*x, *y, *z),
                    index: [i, j, k],
                    order: (i.abs() + j.abs() + k.abs()) as u32,
                    gain,
                });
            }
        }
    }
    images
}

/// Hann-windowed sinc centered on a fractional delay.
///
/// Returns the index of the first tap and the taps; taps that would fall
/// before sample 0 are dropped.
pub fn fractional_delay(delay: f64) -> (usize, Vec<f64>) {
    let center = delay.floor() as i64;
    let first = center - KERNEL_HALF;
    let span = (KERNEL_HALF + 1) as f64;
    // sin(π(k - t)) flips sign at each integer step.
    let parity = if KERNEL_HALF % 2 == 0 { 1.0 } else { -1.0 };
    let base = -parity * (PI * (delay - center as f64)).sin();
    let mut taps = Vec::with_capacity(KERNEL_TAPS);
    let mut sign = 1.0;
    for k in first..first + KERNEL_TAPS as i64 {
        let x = k as f64 - delay;
        let sinc = if x.abs() < 1e-12 {
            1.0
        } else {
            sign * base / (PI * x)
        };
        let window = 0.5 * (1.0 + (PI * x / span).cos());
        taps.push(sinc * window);
        sign = -sign;
    }
    if first < 0 {
        let skip = (-first) as usize;
        taps.drain(..skip.min(taps.len()));
        (0, taps)
    } else {
        (first as usize, taps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsmParams {
    pub order: u32,
    pub law: ReflectionLaw,
}

impl Default for IsmParams {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            law: ReflectionLaw::default(),
        }
    }
}

/// Per-band image-source responses, all of equal length.
///
/// `air_gamma`, when given, holds an amplitude attenuation coefficient
/// (Np/m) per band applied as `exp(-γ r)` to each image.
pub fn ism_rir(
    room: &RoomSpec,
    source: &SourceSpec,
    receiver: &ReceiverSpec,
    walls: &WallCoefficients,
    params: IsmParams,
    air_gamma: Option<&[f64]>,
) -> Result<Vec<Vec<f64>>> {
    let bands = walls.bands();
    if let Some(g) = air_gamma {
        if g.len() != bands {
            return Err(Error::BandMismatch {
                expected: bands,
                actual: g.len(),
            });
        }
    }
    let images = enumerate_images(room, source, walls, params.order, params.law);
    let fs = room.environment().sample_rate as f64;
    let c = room.speed_of_sound();

    let mut distances = Vec::with_capacity(images.len());
    for img in &images {
        let d = img.position.distance(receiver.position);
        if d < DEGENERATE_DISTANCE {
            return Err(Error::DegenerateGeometry { distance: d });
        }
        distances.push(d);
    }
    let max_delay = distances.iter().fold(0.0, |a: f64, &d| a.max(fs * d / c));
    let len = max_delay.floor() as usize + KERNEL_HALF as usize + 1;

    let kernels: Vec<(usize, Vec<f64>)> = distances
        .par_iter()
        .map(|&d| fractional_delay(fs * d / c))
        .collect();

    let out = (0..bands)
        .into_par_iter()
        .map(|b| {
            let mut h = vec![0.0; len];
            for ((img, &d), (start, taps)) in images.iter().zip(&distances).zip(&kernels) {
                let mut amp = img.gain[b] / (4.0 * PI * d);
                if let Some(g) = air_gamma {
                    amp *= (-g[b] * d).exp();
                }
                if amp == 0.0 {
                    continue;
                }
                for (dst, t) in h[*start..].iter_mut().zip(taps) {
                    *dst += amp * t;
                }
            }
            h
        })
        .collect();
    Ok(out)
}
