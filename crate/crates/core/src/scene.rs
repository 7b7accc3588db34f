//! Shoebox rooms, sources, receivers and the room-spec file format.
//!
//! Rooms are axis-aligned boxes with one corner at the origin. The six
//! surfaces are named by the axis they close off: `west`/`east` at `x = 0`
//! and `x = Lx`, `south`/`north` on `y`, `floor`/`ceiling` on `z`.
//!
//! A room-spec file is TOML:
//!
//! ```toml
//! dimensions = [5.0, 4.0, 3.0]
//! temperature_c = 20.0
//! humidity_pct = 50.0
//! sample_rate = 16000
//!
//! [surfaces.floor]
//! material = "carpet_thin"
//! scattering = 0.1
//!
//! [surfaces.west]
//! absorption = 0.2
//!
//! # ... ceiling, east, south, north
//!
//! [[sources]]
//! position = [1.0, 1.5, 1.2]
//!
//! [[receivers]]
//! position = [3.5, 2.0, 1.4]
//! radius = 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::materials::MaterialDb;

pub const SUPPORTED_SAMPLE_RATES: [u32; 4] = [8000, 16000, 44100, 48000];

pub const DEFAULT_RECEIVER_RADIUS: f64 = 0.5;

/// One of the six surfaces of a shoebox room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wall {
    West,
    East,
    South,
    North,
    Floor,
    Ceiling,
}

impl Wall {
    /// All walls, ordered so that `ALL[2 * axis + side]` is the wall on
    /// `axis` at the low (`side = 0`) or high (`side = 1`) coordinate.
    pub const ALL: [Wall; 6] = [
        Wall::West,
        Wall::East,
        Wall::South,
        Wall::North,
        Wall::Floor,
        Wall::Ceiling,
    ];

    pub fn on(axis: usize, high: bool) -> Wall {
        Wall::ALL[2 * axis + high as usize]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn axis(self) -> usize {
        self.index() / 2
    }

    pub fn is_high(self) -> bool {
        self.index() % 2 == 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Wall::West => "west",
            Wall::East => "east",
            Wall::South => "south",
            Wall::North => "north",
            Wall::Floor => "floor",
            Wall::Ceiling => "ceiling",
        }
    }

    pub fn from_name(name: &str) -> Option<Wall> {
        Wall::ALL.into_iter().find(|w| w.name() == name)
    }
}

impl fmt::Display for Wall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a surface absorbs sound.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceAbsorption {
    /// Name of an entry in the material database.
    Material(String),
    /// One energy absorption coefficient for every band.
    Coefficient(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    pub absorption: SurfaceAbsorption,
    /// Scalar scattering coefficient broadcast to all bands. `None` defers
    /// to the material's own scattering data (or zero).
    pub scattering: Option<f64>,
}

impl SurfaceSpec {
    pub fn coefficient(alpha: f64, scattering: f64) -> Self {
        Self {
            absorption: SurfaceAbsorption::Coefficient(alpha),
            scattering: Some(scattering),
        }
    }

    pub fn material(name: impl Into<String>, scattering: Option<f64>) -> Self {
        Self {
            absorption: SurfaceAbsorption::Material(name.into()),
            scattering,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSpec {
    pub temperature_c: f64,
    pub humidity_pct: f64,
    pub sample_rate: u32,
}

impl Default for EnvSpec {
    fn default() -> Self {
        Self {
            temperature_c: 20.0,
            humidity_pct: 50.0,
            sample_rate: 16000,
        }
    }
}

impl EnvSpec {
    pub fn speed_of_sound(&self) -> f64 {
        speed_of_sound(self.temperature_c)
    }
}

/// Speed of sound in air (m/s) at `temperature_c` degrees Celsius.
pub fn speed_of_sound(temperature_c: f64) -> f64 {
    331.4 + 0.6 * temperature_c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverSpec {
    pub position: Vec3,
    /// Radius of the detection sphere used by the ray tracer.
    pub radius: f64,
}

impl ReceiverSpec {
    pub fn new(position: Vec3) -> Self {
        Self {
            position,
            radius: DEFAULT_RECEIVER_RADIUS,
        }
    }
}

/// A validated shoebox room.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomSpec {
    dimensions: Vec3,
    surfaces: [SurfaceSpec; 6],
    sources: Vec<SourceSpec>,
    receivers: Vec<ReceiverSpec>,
    environment: EnvSpec,
}

impl RoomSpec {
    /// Builds and validates a room. Material references are not checked
    /// here; use [`RoomSpec::check_materials`] or [`parse_room`].
    pub fn new(
        dimensions: Vec3,
        surfaces: [SurfaceSpec; 6],
        sources: Vec<SourceSpec>,
        receivers: Vec<ReceiverSpec>,
        environment: EnvSpec,
    ) -> Result<Self> {
        let room = Self {
            dimensions,
            surfaces,
            sources,
            receivers,
            environment,
        };
        room.validate()?;
        Ok(room)
    }

    /// Shorthand for a room where every surface has the same coefficients.
    pub fn uniform(
        dimensions: Vec3,
        absorption: f64,
        scattering: f64,
        sources: Vec<SourceSpec>,
        receivers: Vec<ReceiverSpec>,
        environment: EnvSpec,
    ) -> Result<Self> {
        let surface = SurfaceSpec::coefficient(absorption, scattering);
        Self::new(
            dimensions,
            std::array::from_fn(|_| surface.clone()),
            sources,
            receivers,
            environment,
        )
    }

    pub fn dimensions(&self) -> Vec3 {
        self.dimensions
    }

    pub fn surface(&self, wall: Wall) -> &SurfaceSpec {
        &self.surfaces[wall.index()]
    }

    pub fn surfaces(&self) -> &[SurfaceSpec; 6] {
        &self.surfaces
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn receivers(&self) -> &[ReceiverSpec] {
        &self.receivers
    }

    pub fn environment(&self) -> &EnvSpec {
        &self.environment
    }

    pub fn speed_of_sound(&self) -> f64 {
        self.environment.speed_of_sound()
    }

    pub fn volume(&self) -> f64 {
        let d = self.dimensions;
        d.x * d.y * d.z
    }

    pub fn wall_area(&self, wall: Wall) -> f64 {
        let d = self.dimensions.to_array();
        let axis = wall.axis();
        d[(axis + 1) % 3] * d[(axis + 2) % 3]
    }

    pub fn surface_area(&self) -> f64 {
        Wall::ALL.iter().map(|&w| self.wall_area(w)).sum()
    }

    pub fn diagonal(&self) -> f64 {
        self.dimensions.norm()
    }

    /// Replaces every surface's absorption by a single coefficient, keeping
    /// scattering. Used for the baseline (Eyring-fitted) variant.
    pub fn with_uniform_absorption(&self, alpha: f64) -> Result<Self> {
        let mut room = self.clone();
        for s in room.surfaces.iter_mut() {
            let scattering = s.scattering;
            *s = SurfaceSpec {
                absorption: SurfaceAbsorption::Coefficient(alpha),
                scattering,
            };
        }
        room.validate()?;
        Ok(room)
    }

    pub fn with_environment(&self, environment: EnvSpec) -> Result<Self> {
        let mut room = self.clone();
        room.environment = environment;
        room.validate()?;
        Ok(room)
    }

    fn contains_strictly(&self, p: Vec3, margin: f64) -> bool {
        (0..3).all(|a| p[a] - margin > 0.0 && p[a] + margin < self.dimensions[a])
    }

    fn validate(&self) -> Result<()> {
        let d = self.dimensions;
        if !(0..3).all(|a| d[a].is_finite() && d[a] > 0.0) {
            return Err(Error::Geometry(format!(
                "dimensions must be positive, got {:?}",
                d.to_array()
            )));
        }
        let env = &self.environment;
        if !(-20.0..=50.0).contains(&env.temperature_c) {
            return Err(Error::Schema(format!(
                "temperature_c must lie in [-20, 50], got {}",
                env.temperature_c
            )));
        }
        if !(0.0..=100.0).contains(&env.humidity_pct) {
            return Err(Error::Schema(format!(
                "humidity_pct must lie in [0, 100], got {}",
                env.humidity_pct
            )));
        }
        if !SUPPORTED_SAMPLE_RATES.contains(&env.sample_rate) {
            return Err(Error::Schema(format!(
                "sample_rate must be one of {:?}, got {}",
                SUPPORTED_SAMPLE_RATES, env.sample_rate
            )));
        }
        for (wall, s) in Wall::ALL.iter().zip(&self.surfaces) {
            if let SurfaceAbsorption::Coefficient(a) = s.absorption {
                if !(0.0..=1.0).contains(&a) {
                    return Err(Error::Schema(format!(
                        "surfaces.{wall}.absorption must lie in [0, 1], got {a}"
                    )));
                }
            }
            if let Some(sc) = s.scattering {
                if !(0.0..=1.0).contains(&sc) {
                    return Err(Error::Schema(format!(
                        "surfaces.{wall}.scattering must lie in [0, 1], got {sc}"
                    )));
                }
            }
        }
        if self.sources.is_empty() {
            return Err(Error::Schema("at least one source is required".into()));
        }
        if self.receivers.is_empty() {
            return Err(Error::Schema("at least one receiver is required".into()));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if !self.contains_strictly(s.position, 0.0) {
                return Err(Error::Geometry(format!(
                    "source {i} at {:?} is not strictly inside the {:?} m room",
                    s.position.to_array(),
                    d.to_array()
                )));
            }
        }
        for (i, r) in self.receivers.iter().enumerate() {
            if !(r.radius.is_finite() && r.radius > 0.0) {
                return Err(Error::Geometry(format!(
                    "receiver {i} radius must be positive, got {}",
                    r.radius
                )));
            }
            if !self.contains_strictly(r.position, r.radius) {
                return Err(Error::Geometry(format!(
                    "receiver {i} sphere (center {:?}, radius {}) does not fit inside the {:?} m room",
                    r.position.to_array(),
                    r.radius,
                    d.to_array()
                )));
            }
        }
        Ok(())
    }

    /// Checks that every material reference resolves in `db`.
    pub fn check_materials(&self, db: &MaterialDb) -> Result<()> {
        for s in &self.surfaces {
            if let SurfaceAbsorption::Material(name) = &s.absorption {
                db.lookup(name)?;
            }
        }
        Ok(())
    }

    /// Serializes to the room-spec TOML format.
    pub fn to_toml_string(&self) -> String {
        let file = RoomFile::from(self);
        toml::to_string_pretty(&file).expect("room spec serializes")
    }

    pub fn load(path: impl AsRef<Path>, db: &MaterialDb) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_room(&text, db)
    }
}

/// Parses and validates a room-spec document.
pub fn parse_room(text: &str, db: &MaterialDb) -> Result<RoomSpec> {
    let file: RoomFile = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let room = file.into_room()?;
    room.check_materials(db)?;
    Ok(room)
}

// On-disk layout. Field names here are the file format.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomFile {
    dimensions: [f64; 3],
    #[serde(default = "default_temperature")]
    temperature_c: f64,
    #[serde(default = "default_humidity")]
    humidity_pct: f64,
    #[serde(default = "default_sample_rate")]
    sample_rate: u32,
    surfaces: BTreeMap<String, SurfaceFile>,
    sources: Vec<SourceFile>,
    receivers: Vec<ReceiverFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    material: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    absorption: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scattering: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceFile {
    position: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReceiverFile {
    position: [f64; 3],
    #[serde(default = "default_radius")]
    radius: f64,
}

fn default_temperature() -> f64 {
    EnvSpec::default().temperature_c
}

fn default_humidity() -> f64 {
    EnvSpec::default().humidity_pct
}

fn default_sample_rate() -> u32 {
    EnvSpec::default().sample_rate
}

fn default_radius() -> f64 {
    DEFAULT_RECEIVER_RADIUS
}

impl RoomFile {
    fn into_room(self) -> Result<RoomSpec> {
        for name in self.surfaces.keys() {
            if Wall::from_name(name).is_none() {
                return Err(Error::Schema(format!(
                    "unknown surface `{name}` (expected floor, ceiling, west, east, south, north)"
                )));
            }
        }
        let mut surfaces = Vec::with_capacity(6);
        for wall in Wall::ALL {
            let s = self
                .surfaces
                .get(wall.name())
                .ok_or_else(|| Error::Schema(format!("missing surfaces.{wall}")))?;
            let absorption = match (&s.material, s.absorption) {
                (Some(m), None) => SurfaceAbsorption::Material(m.clone()),
                (None, Some(a)) => SurfaceAbsorption::Coefficient(a),
                _ => {
                    return Err(Error::Schema(format!(
                        "surfaces.{wall} needs exactly one of `material` or `absorption`"
                    )))
                }
            };
            surfaces.push(SurfaceSpec {
                absorption,
                scattering: s.scattering,
            });
        }
        let surfaces: [SurfaceSpec; 6] = surfaces.try_into().expect("six walls");
        RoomSpec::new(
            self.dimensions.into(),
            surfaces,
            self.sources
                .into_iter()
                .map(|s| SourceSpec {
                    position: s.position.into(),
                })
                .collect(),
            self.receivers
                .into_iter()
                .map(|r| ReceiverSpec {
                    position: r.position.into(),
                    radius: r.radius,
                })
                .collect(),
            EnvSpec {
                temperature_c: self.temperature_c,
                humidity_pct: self.humidity_pct,
                sample_rate: self.sample_rate,
            },
        )
    }
}

impl From<&RoomSpec> for RoomFile {
    fn from(room: &RoomSpec) -> Self {
        let surfaces = Wall::ALL
            .iter()
            .map(|&w| {
                let s = room.surface(w);
                let (material, absorption) = match &s.absorption {
                    SurfaceAbsorption::Material(m) => (Some(m.clone()), None),
                    SurfaceAbsorption::Coefficient(a) => (None, Some(*a)),
                };
                (
                    w.name().to_string(),
                    SurfaceFile {
                        material,
                        absorption,
                        scattering: s.scattering,
                    },
                )
            })
            .collect();
        RoomFile {
            dimensions: room.dimensions.to_array(),
            temperature_c: room.environment.temperature_c,
            humidity_pct: room.environment.humidity_pct,
            sample_rate: room.environment.sample_rate,
            surfaces,
            sources: room
                .sources
                .iter()
                .map(|s| SourceFile {
                    position: s.position.to_array(),
                })
                .collect(),
            receivers: room
                .receivers
                .iter()
                .map(|r| ReceiverFile {
                    position: r.position.to_array(),
                    radius: r.radius,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"
dimensions = [5.0, 4.0, 3.0]
temperature_c = 20.0
humidity_pct = 50.0
sample_rate = 16000

[surfaces.floor]
absorption = 0.2
[surfaces.ceiling]
absorption = 0.2
[surfaces.west]
absorption = 0.2
[surfaces.east]
absorption = 0.2
[surfaces.south]
absorption = 0.2
[surfaces.north]
material = "brick_wall"
scattering = 0.1

[[sources]]
position = [1.0, 1.0, 1.0]

[[receivers]]
position = [3.0, 2.0, 1.5]
"#;

    fn db() -> MaterialDb {
        MaterialDb::builtin()
    }

    #[test]
    fn speed_of_sound_matches_linear_law() {
        assert!((speed_of_sound(20.0) - 343.4).abs() < 1e-12);
        assert_eq!(speed_of_sound(0.0), 331.4);
        assert!((speed_of_sound(25.0) - 346.4).abs() < 1e-12);
    }

    #[test]
    fn minimal_room_parses() {
        let room = parse_room(MINIMAL, &db()).unwrap();
        assert_eq!(room.surfaces().len(), 6);
        assert_eq!(room.sources().len(), 1);
        assert_eq!(room.receivers()[0].radius, DEFAULT_RECEIVER_RADIUS);
        assert_eq!(
            room.surface(Wall::North).absorption,
            SurfaceAbsorption::Material("brick_wall".into())
        );
        assert_eq!(room.volume(), 60.0);
        assert_eq!(room.surface_area(), 94.0);
    }

    #[test]
    fn source_outside_room_is_geometry_error() {
        let text = MINIMAL.replace("position = [1.0, 1.0, 1.0]", "position = [6.0, 1.0, 1.0]");
        assert!(matches!(parse_room(&text, &db()), Err(Error::Geometry(_))));
    }

    #[test]
    fn receiver_sphere_must_fit() {
        let text = MINIMAL.replace("position = [3.0, 2.0, 1.5]", "position = [4.8, 2.0, 1.5]");
        assert!(matches!(parse_room(&text, &db()), Err(Error::Geometry(_))));
    }

    #[test]
    fn unknown_material_is_rejected() {
        let text = MINIMAL.replace("brick_wall", "unobtainium");
        assert!(matches!(
            parse_room(&text, &db()),
            Err(Error::UnknownMaterial(name)) if name == "unobtainium"
        ));
    }

    #[test]
    fn schema_errors() {
        let missing = MINIMAL.replace("[surfaces.floor]\nabsorption = 0.2\n", "");
        assert!(matches!(parse_room(&missing, &db()), Err(Error::Schema(_))));

        let typed = MINIMAL.replace("sample_rate = 16000", "sample_rate = \"fast\"");
        assert!(matches!(parse_room(&typed, &db()), Err(Error::Schema(_))));

        let rate = MINIMAL.replace("sample_rate = 16000", "sample_rate = 22050");
        assert!(matches!(parse_room(&rate, &db()), Err(Error::Schema(_))));

        let both = MINIMAL.replace("material = \"brick_wall\"", "material = \"brick_wall\"\nabsorption = 0.1");
        assert!(matches!(parse_room(&both, &db()), Err(Error::Schema(_))));

        let unknown = format!("{MINIMAL}\nfurniture = true\n");
        assert!(matches!(parse_room(&unknown, &db()), Err(Error::Schema(_))));
    }

    #[test]
    fn empty_source_list_rejected() {
        let text = MINIMAL.replace("[[sources]]\nposition = [1.0, 1.0, 1.0]\n", "sources = []\n");
        assert!(matches!(parse_room(&text, &db()), Err(Error::Schema(_))));
    }

    fn arb_room() -> impl Strategy<Value = RoomSpec> {
        let dims = (2.0f64..12.0, 2.0f64..12.0, 2.0f64..6.0);
        let surface = prop_oneof![
            (0.0f64..=1.0, proptest::option::of(0.0f64..=1.0)).prop_map(|(a, s)| SurfaceSpec {
                absorption: SurfaceAbsorption::Coefficient(a),
                scattering: s,
            }),
            (
                proptest::sample::select(vec!["brick_wall", "plasterboard", "carpet_thin"]),
                proptest::option::of(0.0f64..=1.0)
            )
                .prop_map(|(m, s)| SurfaceSpec::material(m, s)),
        ];
        (
            dims,
            proptest::array::uniform6(surface),
            proptest::collection::vec((0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95), 1..3),
            (0.3f64..0.7, 0.3f64..0.7, 0.3f64..0.7, 0.05f64..0.5),
            (-20.0f64..=50.0, 0.0f64..=100.0, proptest::sample::select(SUPPORTED_SAMPLE_RATES.to_vec())),
        )
            .prop_map(|((lx, ly, lz), surfaces, srcs, (rx, ry, rz, rr), (t, h, fs))| {
                let d = Vec3::new(lx, ly, lz);
                let radius = rr.min(0.25 * lz);
                RoomSpec::new(
                    d,
                    surfaces,
                    srcs.into_iter()
                        .map(|(a, b, c)| SourceSpec {
                            position: Vec3::new(a * lx, b * ly, c * lz),
                        })
                        .collect(),
                    vec![ReceiverSpec {
                        position: Vec3::new(rx * lx, ry * ly, rz * lz),
                        radius,
                    }],
                    EnvSpec {
                        temperature_c: t,
                        humidity_pct: h,
                        sample_rate: fs,
                    },
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn serialize_then_parse_round_trips(room in arb_room()) {
            let text = room.to_toml_string();
            let back = parse_room(&text, &db()).unwrap();
            prop_assert_eq!(back, room);
        }

        #[test]
        fn speed_of_sound_increases(t in -20.0f64..49.0, dt in 1e-3f64..1.0) {
            prop_assert!(speed_of_sound(t + dt) > speed_of_sound(t));
        }
    }
}
