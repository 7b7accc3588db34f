//! Stochastic ray tracing with diffuse rain.
//!
//! Rays leave the source uniformly over the sphere carrying `1 / n_rays`
//! energy per band and always continue specularly. At each wall hit the
//! specular ray keeps `E (1 - α)(1 - s)`; the scattered part `E (1 - α) s`
//! is sent straight to the receiver weighted by the chance that it reaches
//! the receiver sphere (diffuse rain) and is not traced further. Specular
//! passes through the receiver sphere are logged at the arrival time of
//! the matching image source.
//!
//! Work is split into fixed blocks of rays whose histograms are summed in
//! a fixed binary tree, so results do not depend on the thread count.

mod histogram;
mod synth;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vec3;
use crate::materials::WallCoefficients;
use crate::scene::{ReceiverSpec, RoomSpec, SourceSpec, Wall};

pub use histogram::EnergyHistogram;
pub use synth::histogram_to_rir;

/// Default histogram resolution (seconds).
pub const DEFAULT_BIN_WIDTH: f64 = 0.004;

/// A ray dies once every band falls below this fraction of its start energy.
pub const ENERGY_THRESHOLD: f64 = 1e-7;

/// Upper bound on the default tracing time when the room barely absorbs.
pub const MAX_DEFAULT_TIME: f64 = 10.0;

pub(crate) const MAX_BANDS: usize = 8;

const BLOCK_RAYS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig {
    pub n_rays: usize,
    pub seed: u64,
    /// Specular receiver passes with at most this many bounces are dropped;
    /// `-1` keeps all of them.
    pub min_specular_order: i64,
    pub bin_width: f64,
    /// Travel-time limit; `None` means twice the longest Eyring RT60.
    pub max_time: Option<f64>,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            n_rays: 10_000,
            seed: 0,
            min_specular_order: -1,
            bin_width: DEFAULT_BIN_WIDTH,
            max_time: None,
        }
    }
}

/// One ray in flight.
#[derive(Debug, Clone)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub energy: [f64; MAX_BANDS],
    pub path_length: f64,
    pub specular_bounces: u32,
}

/// Probability that energy scattered uniformly into the hemisphere at
/// `point` reaches the receiver sphere.
pub fn p_hit(point: Vec3, receiver: &ReceiverSpec) -> f64 {
    let d = point.distance(receiver.position);
    if d <= receiver.radius {
        return 1.0;
    }
    let ratio = receiver.radius / d;
    1.0 - (1.0 - ratio * ratio).sqrt()
}

/// Chance that a ray leaving a point source at `distance` from the receiver
/// center passes through the sphere.
fn sphere_hit_fraction(distance: f64, radius: f64) -> f64 {
    let ratio = (radius / distance).min(1.0);
    0.5 * (1.0 - (1.0 - ratio * ratio).sqrt())
}

/// Travel-time limit used when the config leaves it open.
pub fn default_max_time(room: &RoomSpec, walls: &WallCoefficients) -> f64 {
    let rt60 = walls.max_eyring_rt60(room);
    let floor = 2.0 * room.diagonal() / room.speed_of_sound();
    (2.0 * rt60).min(MAX_DEFAULT_TIME).max(floor)
}

/// Uniformly random rotation from a random unit quaternion.
fn random_rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (
        a * (2.0 * PI * u2).sin(),
        a * (2.0 * PI * u2).cos(),
        b * (2.0 * PI * u3).sin(),
        b * (2.0 * PI * u3).cos(),
    );
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Emission directions: equal-area latitude strata with per-ray jitter,
/// golden-angle azimuths, and one random rotation of the whole set. Each
/// direction is marginally uniform on the sphere.
struct Emitter {
    seed: u64,
    n_rays: usize,
    rotation: [[f64; 3]; 3],
    azimuth_offset: f64,
}

impl Emitter {
    fn new(seed: u64, n_rays: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let rotation = random_rotation(&mut rng);
        let azimuth_offset = rng.random::<f64>();
        Self {
            seed,
            n_rays,
            rotation,
            azimuth_offset,
        }
    }

    fn direction(&self, index: usize) -> Vec3 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let jitter: f64 = rng.random();
        let z = 1.0 - 2.0 * (index as f64 + jitter) / self.n_rays as f64;
        let golden = 0.5 * (3.0 - 5f64.sqrt());
        let turn = (index as f64 * golden + self.azimuth_offset).fract();
        let phi = 2.0 * PI * turn;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let local = [rho * phi.cos(), rho * phi.sin(), z];
        let r = &self.rotation;
        Vec3::new(
            r[0][0] * local[0] + r[0][1] * local[1] + r[0][2] * local[2],
            r[1][0] * local[0] + r[1][1] * local[1] + r[1][2] * local[2],
            r[2][0] * local[0] + r[2][1] * local[1] + r[2][2] * local[2],
        )
        .normalized()
    }
}

struct Tracer<'a> {
    dims: Vec3,
    receiver: &'a ReceiverSpec,
    walls: &'a WallCoefficients,
    air: Option<&'a [f64]>,
    bands: usize,
    c: f64,
    max_length: f64,
    min_specular_order: i64,
    /// Conversion from intercepted ray energy to squared amplitude.
    rain_weight: f64,
}

impl Tracer<'_> {
    fn air_factor(&self, band: usize, distance: f64) -> f64 {
        match self.air {
            Some(g) => (-2.0 * g[band] * distance).exp(),
            None => 1.0,
        }
    }

    fn run(&self, mut ray: Ray, hist: &mut EnergyHistogram) {
        let e0 = ray.energy;
        let r2 = self.receiver.radius * self.receiver.radius;
        let center = self.receiver.position;
        loop {
            // Nearest wall along the ray.
            let mut t_wall = f64::INFINITY;
            let mut axis_hit = 0;
            let mut high_hit = false;
            for axis in 0..3 {
                let d = ray.direction[axis];
                if d > 0.0 {
                    let t = (self.dims[axis] - ray.origin[axis]) / d;
                    if t < t_wall {
                        t_wall = t;
                        axis_hit = axis;
                        high_hit = true;
                    }
                } else if d < 0.0 {
                    let t = -ray.origin[axis] / d;
                    if t < t_wall {
                        t_wall = t;
                        axis_hit = axis;
                        high_hit = false;
                    }
                }
            }
            let t_wall = t_wall.max(0.0);

            // Closest approach to the receiver inside this segment.
            let to_center = center - ray.origin;
            let s = to_center.dot(ray.direction);
            if s >= 0.0
                && s < t_wall
                && i64::from(ray.specular_bounces) > self.min_specular_order
            {
                let b2 = (to_center.norm_squared() - s * s).max(0.0);
                if b2 <= r2 {
                    let along = ray.path_length + s;
                    let dist = (along * along + b2).sqrt().max(self.receiver.radius * (1.0 + 1e-9));
                    let time = dist / self.c;
                    let weight =
                        1.0 / (16.0 * PI * PI * dist * dist * sphere_hit_fraction(dist, self.receiver.radius));
                    for b in 0..self.bands {
                        let e = ray.energy[b] * self.air_factor(b, dist);
                        hist.detected[b] += e;
                        hist.deposit(time, b, e * weight);
                    }
                }
            }

            ray.path_length += t_wall;
            if ray.path_length > self.max_length {
                return;
            }
            let mut hit = ray.origin + ray.direction * t_wall;
            let coord = match axis_hit {
                0 => &mut hit.x,
                1 => &mut hit.y,
                _ => &mut hit.z,
            };
            *coord = if high_hit { self.dims[axis_hit] } else { 0.0 };
            let wall = Wall::on(axis_hit, high_hit).index();

            let to_receiver = hit.distance(center);
            let rain = p_hit(hit, self.receiver);
            let rain_time = (ray.path_length + to_receiver) / self.c;
            let mut alive = false;
            for b in 0..self.bands {
                let alpha = self.walls.absorption[wall][b];
                let scatter = self.walls.scattering[wall][b];
                let reflected = ray.energy[b] * (1.0 - alpha);
                let scattered = reflected * scatter * rain;
                if scattered > 0.0 {
                    let e = scattered * self.air_factor(b, ray.path_length + to_receiver);
                    hist.detected[b] += e;
                    hist.deposit(rain_time, b, e * self.rain_weight);
                }
                ray.energy[b] = reflected * (1.0 - scatter);
                alive |= ray.energy[b] >= ENERGY_THRESHOLD * e0[b];
            }
            if !alive {
                return;
            }

            let mut dir = ray.direction;
            match axis_hit {
                0 => dir.x = -dir.x,
                1 => dir.y = -dir.y,
                _ => dir.z = -dir.z,
            }
            ray.direction = dir;
            ray.origin = hit;
            ray.specular_bounces += 1;
        }
    }
}

/// Traces `config.n_rays` rays from `source` and bins what reaches
/// `receiver`. `air_gamma` holds per-band amplitude attenuation (Np/m);
/// energies are scaled by `exp(-2 γ r)`.
pub fn trace(
    room: &RoomSpec,
    source: &SourceSpec,
    receiver: &ReceiverSpec,
    walls: &WallCoefficients,
    air_gamma: Option<&[f64]>,
    config: &TraceConfig,
) -> EnergyHistogram {
    let bands = walls.bands();
    assert!(bands <= MAX_BANDS, "at most {MAX_BANDS} bands");
    assert!(config.n_rays >= 1, "n_rays must be at least 1");
    let c = room.speed_of_sound();
    let max_time = config
        .max_time
        .unwrap_or_else(|| default_max_time(room, walls));
    let max_length = max_time * c;
    // Room for diffuse-rain legs that start just before the limit.
    let n_bins = ((max_time + room.diagonal() / c) / config.bin_width).ceil() as usize + 1;

    let tracer = Tracer {
        dims: room.dimensions(),
        receiver,
        walls,
        air: air_gamma,
        bands,
        c,
        max_length,
        min_specular_order: config.min_specular_order,
        rain_weight: 1.0 / (4.0 * PI * PI * receiver.radius * receiver.radius),
    };
    let emitter = Emitter::new(config.seed, config.n_rays);
    let e0 = 1.0 / config.n_rays as f64;

    let run_block = |block: usize| {
        let mut hist = EnergyHistogram::new(config.bin_width, n_bins, bands);
        let start = block * BLOCK_RAYS;
        let end = (start + BLOCK_RAYS).min(config.n_rays);
        for index in start..end {
            let mut energy = [0.0; MAX_BANDS];
            energy[..bands].fill(e0);
            for e in &mut hist.emitted {
                *e += e0;
            }
            let ray = Ray {
                origin: source.position,
                direction: emitter.direction(index),
                energy,
                path_length: 0.0,
                specular_bounces: 0,
            };
            tracer.run(ray, &mut hist);
        }
        hist
    };

    let n_blocks = config.n_rays.div_ceil(BLOCK_RAYS);
    let hist = reduce_blocks(0, n_blocks, &run_block);
    if !hist.conserves_energy() {
        log::warn!(
            "receiver intercepted more ray energy than was emitted ({:?} > {:?})",
            hist.detected,
            hist.emitted
        );
    }
    hist
}

/// Sums block histograms over a binary tree fixed by the block range.
fn reduce_blocks<F>(lo: usize, hi: usize, run: &F) -> EnergyHistogram
where
    F: Fn(usize) -> EnergyHistogram + Sync,
{
    if hi - lo == 1 {
        return run(lo);
    }
    let mid = lo + (hi - lo) / 2;
    let (mut left, right) = rayon::join(|| reduce_blocks(lo, mid, run), || reduce_blocks(mid, hi, run));
    left.merge(&right);
    left
}
