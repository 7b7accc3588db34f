//! Frequency-dependent materials, band layouts and Eyring inversion.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scene::{RoomSpec, SurfaceAbsorption, Wall};

/// Octave-band centers (Hz) at which material coefficients are tabulated.
pub const OCTAVE_CENTERS: [f64; 7] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0];

/// Sabine/Eyring constant `24 ln(10) / c` with c near 343 m/s.
pub const EYRING_CONSTANT: f64 = 0.161;

/// Environment variable naming a material database to use instead of the
/// built-in one.
pub const MATERIAL_DB_ENV: &str = "RIRSIM_MATERIALS";

const BUILTIN_DB: &str = include_str!("../data/materials.toml");

/// Center frequencies of the simulation bands.
#[derive(Debug, Clone, PartialEq)]
pub struct BandScheme {
    centers: Vec<f64>,
}

impl Default for BandScheme {
    fn default() -> Self {
        Self {
            centers: OCTAVE_CENTERS.to_vec(),
        }
    }
}

impl BandScheme {
    pub fn new(centers: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Config("band scheme needs at least one band".into()));
        }
        if !centers.iter().all(|c| c.is_finite() && *c > 0.0) {
            return Err(Error::Config("band centers must be positive".into()));
        }
        if centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("band centers must be strictly increasing".into()));
        }
        Ok(Self { centers })
    }

    /// The octave layout truncated to the bands whose lower edge
    /// (`center / sqrt 2`) lies below Nyquist.
    pub fn for_sample_rate(sample_rate: u32) -> Self {
        let nyquist = sample_rate as f64 / 2.0;
        let centers: Vec<f64> = OCTAVE_CENTERS
            .iter()
            .copied()
            .filter(|c| c / std::f64::consts::SQRT_2 < nyquist)
            .collect();
        if centers.len() < OCTAVE_CENTERS.len() {
            log::warn!(
                "sample rate {sample_rate} Hz supports only {} of {} bands",
                centers.len(),
                OCTAVE_CENTERS.len()
            );
        }
        Self { centers }
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    /// Energy absorption coefficient per octave band.
    pub absorption: Vec<f64>,
    /// Scattering coefficient per octave band, if tabulated.
    pub scattering: Option<Vec<f64>>,
    pub source: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialEntry {
    absorption: Vec<f64>,
    scattering: Option<Vec<f64>>,
    #[serde(default)]
    source: String,
}

/// Named materials with per-band coefficients. Read-only after loading.
#[derive(Debug, Clone, Default)]
pub struct MaterialDb {
    materials: BTreeMap<String, Material>,
}

impl MaterialDb {
    /// The database shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_DB).expect("built-in material database is valid")
    }

    /// The database named by `RIRSIM_MATERIALS`, or the built-in one.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(MATERIAL_DB_ENV) {
            Some(path) => Self::load(path),
            None => Ok(Self::builtin()),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, MaterialEntry> =
            toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let mut materials = BTreeMap::new();
        for (name, entry) in raw {
            let material = Material {
                name: name.clone(),
                absorption: entry.absorption,
                scattering: entry.scattering,
                source: entry.source,
            };
            check_material(&material)?;
            materials.insert(name, material);
        }
        Ok(Self { materials })
    }

    pub fn lookup(&self, name: &str) -> Result<&Material> {
        self.materials
            .get(name)
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.materials.values()
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }
}

fn check_material(m: &Material) -> Result<()> {
    let bad = |reason: String| Error::InvalidMaterial {
        name: m.name.clone(),
        reason,
    };
    let n = OCTAVE_CENTERS.len();
    if m.absorption.len() != n {
        return Err(bad(format!(
            "absorption has {} values, expected {n}",
            m.absorption.len()
        )));
    }
    if let Some(s) = &m.scattering {
        if s.len() != n {
            return Err(bad(format!("scattering has {} values, expected {n}", s.len())));
        }
    }
    let all = m.absorption.iter().chain(m.scattering.iter().flatten());
    if let Some(v) = all.into_iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(bad(format!("coefficient {v} outside [0, 1]")));
    }
    Ok(())
}

/// Uniform absorption coefficient that gives `rt60` seconds in a room of
/// the given volume and surface area according to Eyring's formula.
pub fn eyring_absorption(volume: f64, surface_area: f64, rt60: f64) -> Result<f64> {
    if !(volume > 0.0 && surface_area > 0.0 && rt60 > 0.0) {
        return Err(Error::Config(format!(
            "eyring needs V, S, rt60 > 0 (got {volume}, {surface_area}, {rt60})"
        )));
    }
    let exponent = EYRING_CONSTANT * volume / (surface_area * rt60);
    let alpha = -(-exponent).exp_m1();
    if alpha > 1.0 - 1e-6 {
        return Err(Error::UnreachableRt60 {
            rt60,
            volume,
            area: surface_area,
        });
    }
    Ok(alpha.max(f64::MIN_POSITIVE))
}

/// Eyring reverberation time for a mean absorption coefficient.
pub fn eyring_rt60(volume: f64, surface_area: f64, mean_alpha: f64) -> f64 {
    if mean_alpha <= 0.0 {
        return f64::INFINITY;
    }
    EYRING_CONSTANT * volume / (-surface_area * (-mean_alpha).ln_1p())
}

/// Per-band coefficients of the six walls, ready for simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct WallCoefficients {
    /// `absorption[wall][band]`, energy absorption.
    pub absorption: [Vec<f64>; 6],
    /// `scattering[wall][band]`.
    pub scattering: [Vec<f64>; 6],
}

impl WallCoefficients {
    pub fn bands(&self) -> usize {
        self.absorption[0].len()
    }

    pub fn uniform(bands: usize, absorption: f64, scattering: f64) -> Self {
        Self {
            absorption: std::array::from_fn(|_| vec![absorption; bands]),
            scattering: std::array::from_fn(|_| vec![scattering; bands]),
        }
    }

    /// Area-weighted mean absorption in `band`.
    pub fn mean_absorption(&self, room: &RoomSpec, band: usize) -> f64 {
        let total: f64 = Wall::ALL
            .iter()
            .map(|&w| room.wall_area(w) * self.absorption[w.index()][band])
            .sum();
        total / room.surface_area()
    }

    /// Longest Eyring RT60 over the bands.
    pub fn max_eyring_rt60(&self, room: &RoomSpec) -> f64 {
        (0..self.bands())
            .map(|b| eyring_rt60(room.volume(), room.surface_area(), self.mean_absorption(room, b)))
            .fold(0.0, f64::max)
    }
}

/// Resolves the room's surface specs into simulation coefficients.
///
/// With `frequency_dependent`, material surfaces use their tabulated bands
/// (truncated to `bands`) and scalar surfaces broadcast. Without it, every
/// surface collapses to one band; materials contribute the mean of their
/// bands.
pub fn resolve_walls(
    room: &RoomSpec,
    db: &MaterialDb,
    bands: &BandScheme,
    frequency_dependent: bool,
) -> Result<WallCoefficients> {
    let n = if frequency_dependent { bands.len() } else { 1 };
    if n > OCTAVE_CENTERS.len() {
        return Err(Error::BandMismatch {
            expected: OCTAVE_CENTERS.len(),
            actual: n,
        });
    }
    let mut absorption: [Vec<f64>; 6] = Default::default();
    let mut scattering: [Vec<f64>; 6] = Default::default();
    for wall in Wall::ALL {
        let spec = room.surface(wall);
        let material = match &spec.absorption {
            SurfaceAbsorption::Material(name) => Some(db.lookup(name)?),
            SurfaceAbsorption::Coefficient(_) => None,
        };
        let alpha: Vec<f64> = match (&spec.absorption, material) {
            (SurfaceAbsorption::Coefficient(a), _) => vec![*a; n],
            (_, Some(m)) if frequency_dependent => m.absorption[..n].to_vec(),
            (_, Some(m)) => vec![mean(&m.absorption[..bands.len()])],
            _ => unreachable!(),
        };
        let scatter: Vec<f64> = match (spec.scattering, material.and_then(|m| m.scattering.as_ref())) {
            (Some(s), _) => vec![s; n],
            (None, Some(s)) if frequency_dependent => s[..n].to_vec(),
            (None, Some(s)) => vec![mean(&s[..bands.len()])],
            (None, None) => vec![0.0; n],
        };
        absorption[wall.index()] = alpha;
        scattering[wall.index()] = scatter;
    }
    Ok(WallCoefficients {
        absorption,
        scattering,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::scene::{EnvSpec, ReceiverSpec, SourceSpec, SurfaceSpec};

    #[test]
    fn builtin_db_has_brick_wall() {
        let db = MaterialDb::builtin();
        let brick = db.lookup("brick_wall").unwrap();
        assert_eq!(brick.absorption, vec![0.03, 0.03, 0.03, 0.04, 0.05, 0.07, 0.07]);
        assert!(brick.source.contains("Vorlaender"));
        for m in db.iter() {
            assert_eq!(m.absorption.len(), 7, "{}", m.name);
        }
    }

    #[test]
    fn unknown_material() {
        let db = MaterialDb::builtin();
        assert!(matches!(db.lookup("unobtainium"), Err(Error::UnknownMaterial(_))));
    }

    #[test]
    fn rejects_bad_entries() {
        let short = "[x]\nabsorption = [0.1, 0.2]\n";
        assert!(matches!(MaterialDb::parse(short), Err(Error::InvalidMaterial { .. })));
        let range = "[x]\nabsorption = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 1.5]\n";
        assert!(matches!(MaterialDb::parse(range), Err(Error::InvalidMaterial { .. })));
    }

    #[test]
    fn eyring_reference_value() {
        // 1 - exp(-0.161 * 100 / (130 * 0.5)), evaluated independently.
        let expected = 0.219_399_909_026;
        let alpha = eyring_absorption(100.0, 130.0, 0.5).unwrap();
        assert!((alpha - expected).abs() < 1e-9, "{alpha}");
    }

    #[test]
    fn eyring_limits() {
        let tiny = eyring_absorption(100.0, 130.0, 1e12).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-9);
        assert!(matches!(
            eyring_absorption(100.0, 130.0, 0.001),
            Err(Error::UnreachableRt60 { .. })
        ));
        assert!(matches!(eyring_absorption(0.0, 130.0, 0.5), Err(Error::Config(_))));
    }

    #[test]
    fn eyring_inverse_consistent() {
        let alpha = eyring_absorption(60.0, 94.0, 0.7).unwrap();
        assert!((eyring_rt60(60.0, 94.0, alpha) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn eyring_monotonicity() {
        let mut prev = 1.0;
        for i in 1..50 {
            let a = eyring_absorption(100.0, 130.0, 0.1 * i as f64 + 0.2).unwrap();
            assert!(a < prev);
            prev = a;
        }
        let mut prev = 0.0;
        for i in 1..50 {
            let a = eyring_absorption(20.0 * i as f64, 130.0, 1.0).unwrap();
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn band_scheme_truncates_for_low_rates() {
        assert_eq!(BandScheme::for_sample_rate(16000).len(), 7);
        assert_eq!(BandScheme::for_sample_rate(8000).len(), 6);
        assert!(BandScheme::new(vec![250.0, 125.0]).is_err());
    }

    #[test]
    fn resolve_walls_modes() {
        let mut surfaces: [SurfaceSpec; 6] = std::array::from_fn(|_| SurfaceSpec::coefficient(0.2, 0.1));
        surfaces[Wall::Floor.index()] = SurfaceSpec::material("carpet_thin", None);
        surfaces[Wall::Ceiling.index()] = SurfaceSpec::material("audience_wooden_chairs", None);
        let room = RoomSpec::new(
            Vec3::new(5.0, 4.0, 3.0),
            surfaces,
            vec![SourceSpec { position: Vec3::new(1.0, 1.0, 1.0) }],
            vec![ReceiverSpec::new(Vec3::new(3.0, 2.0, 1.5))],
            EnvSpec::default(),
        )
        .unwrap();
        let db = MaterialDb::builtin();
        let bands = BandScheme::default();

        let multi = resolve_walls(&room, &db, &bands, true).unwrap();
        assert_eq!(multi.bands(), 7);
        assert_eq!(multi.absorption[Wall::Floor.index()][4], 0.35);
        assert_eq!(multi.absorption[Wall::West.index()], vec![0.2; 7]);
        assert_eq!(multi.scattering[Wall::Floor.index()], vec![0.0; 7]);
        assert_eq!(multi.scattering[Wall::Ceiling.index()][0], 0.30);

        let single = resolve_walls(&room, &db, &bands, false).unwrap();
        assert_eq!(single.bands(), 1);
        let carpet_mean = (0.02 + 0.04 + 0.08 + 0.20 + 0.35 + 0.40 + 0.40) / 7.0;
        assert!((single.absorption[Wall::Floor.index()][0] - carpet_mean).abs() < 1e-15);
    }
}
