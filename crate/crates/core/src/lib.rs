//! Room impulse response simulation for shoebox rooms.
//!
//! Three engines share one scene description: the image source method
//! ([`ism`]), stochastic ray tracing with diffuse rain ([`raytracer`]) and
//! their hybrid ([`render`]). Responses can be simulated per octave band
//! with frequency-dependent materials and air absorption, then merged with
//! a linear-phase filter bank ([`spectral`]).

pub mod dsp;
pub mod error;
pub mod geometry;
pub mod ism;
pub mod materials;
pub mod raytracer;
pub mod render;
pub mod rir;
pub mod scene;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::Vec3;
pub use materials::{BandScheme, MaterialDb, WallCoefficients};
pub use render::{simulate, simulate_rir, BandMode, SimConfig, Simulation};
pub use rir::{Method, Rir, RirMeta};
pub use scene::{EnvSpec, ReceiverSpec, RoomSpec, SourceSpec, SurfaceSpec, Wall};
