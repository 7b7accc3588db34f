//! End-to-end RIR generation for the three methods and the variant flags,
//! scene mixing, and audio file I/O.

mod audio;
mod mix;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ism::{self, IsmParams, ReflectionLaw};
use crate::materials::{resolve_walls, BandScheme, MaterialDb, WallCoefficients};
use crate::raytracer::{self, EnergyHistogram, TraceConfig};
use crate::rir::{self, Method, Rir, RirMeta};
use crate::scene::{ReceiverSpec, RoomSpec, SourceSpec};
use crate::spectral;

pub use audio::{read_wav, write_rir, write_wav, Audio, RirSidecar, SampleFormat};
pub use mix::{mix_scene, MixOutput, MixSpec, Noise, Normalization};

/// Frequency used for air absorption when simulating a single band.
pub const SINGLE_BAND_AIR_FREQUENCY: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandMode {
    #[default]
    Single,
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub method: Method,
    pub ism_order: u32,
    pub n_rays: usize,
    pub seed: u64,
    /// Per-band air absorption.
    pub air: bool,
    /// Frequency-dependent material coefficients.
    pub mat: bool,
    pub band_mode: BandMode,
    pub bin_width: f64,
    pub reflection_law: ReflectionLaw,
    /// Ray travel-time limit in seconds; `None` picks one from the room.
    pub max_time: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            method: Method::Hybrid,
            ism_order: ism::DEFAULT_ORDER,
            n_rays: 10_000,
            seed: 0,
            air: false,
            mat: false,
            band_mode: BandMode::Single,
            bin_width: raytracer::DEFAULT_BIN_WIDTH,
            reflection_law: ReflectionLaw::default(),
            max_time: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mat && self.band_mode != BandMode::Multi {
            return Err(Error::Config(
                "frequency-dependent materials require multiband mode".into(),
            ));
        }
        if self.method != Method::Ism && self.n_rays == 0 {
            return Err(Error::Config(format!(
                "method {} needs at least one ray",
                self.method
            )));
        }
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(Error::Config(format!(
                "histogram bin width must be positive, got {}",
                self.bin_width
            )));
        }
        if let Some(t) = self.max_time {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("max time must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 over the room description and this config.
    pub fn hash(&self, room: &RoomSpec) -> String {
        let mut h = Sha256::new();
        h.update(room.to_toml_string().as_bytes());
        h.update(serde_json::to_string(self).expect("config serializes").as_bytes());
        hex::encode(h.finalize())
    }
}

/// Band layout used for a room and config.
pub fn band_scheme(room: &RoomSpec, config: &SimConfig) -> BandScheme {
    match config.band_mode {
        BandMode::Multi => BandScheme::for_sample_rate(room.environment().sample_rate),
        BandMode::Single => {
            BandScheme::new(vec![SINGLE_BAND_AIR_FREQUENCY]).expect("valid single band")
        }
    }
}

/// Wall coefficients for the config's variant.
///
/// Without `mat`, every surface is frequency independent (materials
/// contribute the mean of their bands) and is broadcast over all bands.
pub fn wall_coefficients(
    room: &RoomSpec,
    db: &MaterialDb,
    config: &SimConfig,
) -> Result<WallCoefficients> {
    let bands = band_scheme(room, config);
    if config.mat {
        return resolve_walls(room, db, &bands, true);
    }
    let flat = resolve_walls(room, db, &BandScheme::for_sample_rate(room.environment().sample_rate), false)?;
    let n = bands.len();
    Ok(WallCoefficients {
        absorption: flat.absorption.map(|v| vec![v[0]; n]),
        scattering: flat.scattering.map(|v| vec![v[0]; n]),
    })
}

/// A simulated response and, for ray-traced methods, the energy histogram
/// behind its stochastic part.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub rir: Rir,
    pub histogram: Option<EnergyHistogram>,
}

/// Simulates one source/receiver pair.
pub fn simulate_rir(
    room: &RoomSpec,
    db: &MaterialDb,
    source: &SourceSpec,
    receiver: &ReceiverSpec,
    config: &SimConfig,
) -> Result<Rir> {
    simulate(room, db, source, receiver, config).map(|s| s.rir)
}

/// Like [`simulate_rir`], also returning the ray histogram.
pub fn simulate(
    room: &RoomSpec,
    db: &MaterialDb,
    source: &SourceSpec,
    receiver: &ReceiverSpec,
    config: &SimConfig,
) -> Result<Simulation> {
    config.validate()?;
    let fs = room.environment().sample_rate;
    let bands = band_scheme(room, config);
    let walls = wall_coefficients(room, db, config)?;
    let air = if config.air {
        Some(spectral::air_gamma(room.environment(), bands.centers())?.gamma)
    } else {
        None
    };
    let air = air.as_deref();

    let uses_ism = matches!(config.method, Method::Ism | Method::Hybrid);
    let uses_rays = matches!(config.method, Method::Srt | Method::Hybrid);
    if uses_rays {
        let d = source.position.distance(receiver.position);
        if d <= receiver.radius {
            return Err(Error::Geometry(format!(
                "source is {d} m from the receiver, inside its {} m sphere",
                receiver.radius
            )));
        }
    }

    let (ism_part, ray_part) = rayon::join(
        || -> Result<Option<Vec<Vec<f64>>>> {
            if !uses_ism {
                return Ok(None);
            }
            let params = IsmParams {
                order: config.ism_order,
                law: config.reflection_law,
            };
            ism::ism_rir(room, source, receiver, &walls, params, air).map(Some)
        },
        || -> Option<(Vec<Vec<f64>>, EnergyHistogram)> {
            if !uses_rays {
                return None;
            }
            let trace = TraceConfig {
                n_rays: config.n_rays,
                seed: config.seed,
                min_specular_order: match config.method {
                    Method::Hybrid => i64::from(config.ism_order),
                    _ => -1,
                },
                bin_width: config.bin_width,
                max_time: config.max_time,
            };
            let hist = raytracer::trace(room, source, receiver, &walls, air, &trace);
            let bands = raytracer::histogram_to_rir(
                &hist,
                room.volume(),
                room.speed_of_sound(),
                fs,
                config.seed,
            );
            Some((bands, hist))
        },
    );

    let (ray_part, histogram) = ray_part.map_or((None, None), |(b, h)| (Some(b), Some(h)));
    let per_band = match (ism_part?, ray_part) {
        (Some(a), Some(b)) => a
            .into_iter()
            .zip(b)
            .map(|(mut x, y)| {
                rir::accumulate(&mut x, &y);
                x
            })
            .collect(),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!("every method uses at least one engine"),
    };

    let (samples, meta_bands) = match config.band_mode {
        BandMode::Multi => {
            let bank = spectral::design_bank(fs, &bands)?;
            (spectral::merge_bands(&per_band, &bank)?, bands.centers().to_vec())
        }
        BandMode::Single => (per_band.into_iter().next().unwrap_or_default(), Vec::new()),
    };
    let rir = Rir {
        samples,
        sample_rate: fs,
        meta: RirMeta {
            method: config.method,
            bands: meta_bands,
            seed: uses_rays.then_some(config.seed),
        },
    };
    Ok(Simulation { rir, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::scene::{EnvSpec, SurfaceSpec};

    fn room(alpha: f64, s: f64) -> RoomSpec {
        RoomSpec::uniform(
            Vec3::new(5.0, 4.0, 3.0),
            alpha,
            s,
            vec![SourceSpec {
                position: Vec3::new(1.2, 1.1, 1.4),
            }],
            vec![ReceiverSpec::new(Vec3::new(3.6, 2.7, 1.5))],
            EnvSpec::default(),
        )
        .unwrap()
    }

    fn sim(room: &RoomSpec, config: &SimConfig) -> Result<Rir> {
        simulate_rir(
            room,
            &MaterialDb::builtin(),
            &room.sources()[0],
            &room.receivers()[0],
            config,
        )
    }

    #[test]
    fn mat_requires_multiband() {
        let config = SimConfig {
            mat: true,
            ..Default::default()
        };
        assert!(matches!(config.validate(), Err(Error::Config(_))));
        assert!(SimConfig {
            band_mode: BandMode::Multi,
            ..config
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn rays_required_for_stochastic_methods() {
        for method in [Method::Srt, Method::Hybrid] {
            let config = SimConfig {
                method,
                n_rays: 0,
                ..Default::default()
            };
            assert!(config.validate().is_err());
        }
        assert!(SimConfig {
            method: Method::Ism,
            n_rays: 0,
            ..Default::default()
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn hybrid_adds_engines() {
        let r = room(0.3, 0.3);
        let base = SimConfig {
            ism_order: 2,
            n_rays: 2000,
            seed: 4,
            ..Default::default()
        };
        let ism = sim(&r, &SimConfig { method: Method::Ism, ..base.clone() }).unwrap();
        let hyb = sim(&r, &base).unwrap();
        assert!(hyb.len() >= ism.len());
        assert!(hyb.energy() > ism.energy());
        assert_eq!(hyb.meta.seed, Some(4));
        assert_eq!(ism.meta.seed, None);
    }

    #[test]
    fn deterministic() {
        let r = room(0.2, 0.5);
        let config = SimConfig {
            ism_order: 3,
            n_rays: 3000,
            seed: 8,
            band_mode: BandMode::Multi,
            air: true,
            ..Default::default()
        };
        let a = sim(&r, &config).unwrap();
        let b = sim(&r, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.meta.bands.len(), 7);
    }

    #[test]
    fn baseline_ignores_material_spectrum() {
        let mut surfaces: [SurfaceSpec; 6] = std::array::from_fn(|_| SurfaceSpec::coefficient(0.2, 0.0));
        surfaces[0] = SurfaceSpec::material("carpet_thin", None);
        let r = RoomSpec::new(
            Vec3::new(5.0, 4.0, 3.0),
            surfaces,
            room(0.2, 0.0).sources().to_vec(),
            room(0.2, 0.0).receivers().to_vec(),
            EnvSpec::default(),
        )
        .unwrap();
        let db = MaterialDb::builtin();
        let flat = wall_coefficients(
            &r,
            &db,
            &SimConfig {
                band_mode: BandMode::Multi,
                ..Default::default()
            },
        )
        .unwrap();
        let a = &flat.absorption[0];
        assert_eq!(a.len(), 7);
        assert!(a.iter().all(|x| *x == a[0]));
        let mat = wall_coefficients(
            &r,
            &db,
            &SimConfig {
                band_mode: BandMode::Multi,
                mat: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(mat.absorption[0], db.lookup("carpet_thin").unwrap().absorption);
    }

    #[test]
    fn source_inside_receiver_sphere() {
        let r = RoomSpec::uniform(
            Vec3::new(5.0, 4.0, 3.0),
            0.3,
            0.0,
            vec![SourceSpec {
                position: Vec3::new(2.0, 2.0, 1.5),
            }],
            vec![ReceiverSpec::new(Vec3::new(2.2, 2.0, 1.5))],
            EnvSpec::default(),
        )
        .unwrap();
        assert!(matches!(
            sim(&r, &SimConfig::default()),
            Err(Error::Geometry(_))
        ));
        assert!(sim(
            &r,
            &SimConfig {
                method: Method::Ism,
                ism_order: 2,
                ..Default::default()
            }
        )
        .is_ok());
    }

    #[test]
    fn hash_tracks_config() {
        let r = room(0.3, 0.0);
        let a = SimConfig::default();
        let b = SimConfig { seed: 1, ..a.clone() };
        assert_eq!(a.hash(&r), a.hash(&r));
        assert_ne!(a.hash(&r), b.hash(&r));
        assert_eq!(a.hash(&r).len(), 64);
    }
}
