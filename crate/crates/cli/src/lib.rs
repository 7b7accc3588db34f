//! Command implementations behind the `rirsim` binary.

pub mod args;
pub mod bench;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use rirsim_core::materials::eyring_absorption;
use rirsim_core::render::{self, mix_scene, MixSpec, Noise, Normalization};
use rirsim_core::{BandMode, BandScheme, Error, MaterialDb, RoomSpec, SimConfig};

use args::{BenchArgs, BenchModeArg, Cli, Command, EngineArgs, FiltersArgs, MaterialsArgs, MixArgs, SimulateArgs};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_SIMULATION: u8 = 4;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_USAGE, error: error.into() }
    }

    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_INPUT, error: error.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::UnreachableRt60 { .. } => EXIT_USAGE,
            Error::Schema(_)
            | Error::Geometry(_)
            | Error::UnknownMaterial(_)
            | Error::InvalidMaterial { .. }
            | Error::SampleRateMismatch { .. }
            | Error::EmptyAudio(_)
            | Error::Io { .. }
            | Error::Wav { .. } => EXIT_INPUT,
            Error::DegenerateGeometry { .. } | Error::BandMismatch { .. } => EXIT_SIMULATION,
        };
        Self { code, error: e.into() }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(CliError::usage)?;
    }
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Mix(a) => cmd_mix(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Materials(a) => cmd_materials(&a),
        Command::Filters(a) => cmd_filters(&a),
    }
}

fn material_db(path: Option<&Path>) -> CliResult<MaterialDb> {
    Ok(match path {
        Some(p) => MaterialDb::load(p)?,
        None => MaterialDb::from_env()?,
    })
}

fn load_room(engine: &EngineArgs, db: &MaterialDb) -> CliResult<RoomSpec> {
    let room = RoomSpec::load(&engine.room, db)?;
    match engine.rt60 {
        Some(rt60) => {
            let alpha = eyring_absorption(room.volume(), room.surface_area(), rt60)?;
            log::info!("uniform absorption {alpha:.4} for rt60 {rt60} s");
            Ok(room.with_uniform_absorption(alpha)?)
        }
        None => Ok(room),
    }
}

fn sim_config(engine: &EngineArgs) -> CliResult<SimConfig> {
    let config = SimConfig {
        method: engine.method.into(),
        ism_order: engine.ism_order,
        n_rays: engine.rays,
        seed: engine.seed,
        air: engine.air,
        mat: engine.mat,
        band_mode: if engine.multiband { BandMode::Multi } else { BandMode::Single },
        bin_width: engine.bin_width_ms / 1000.0,
        reflection_law: engine.reflection_law.into(),
        max_time: engine.max_time,
    };
    config.validate()?;
    Ok(config)
}

fn pick<'a, T>(items: &'a [T], index: usize, what: &str) -> CliResult<&'a T> {
    items.get(index).ok_or_else(|| {
        CliError::usage(anyhow!("{what} index {index} out of range (room has {})", items.len()))
    })
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(CliError::input),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout")
            .map_err(CliError::input),
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> CliResult {
    let db = material_db(a.engine.materials.as_deref())?;
    let config = sim_config(&a.engine)?;
    let room = load_room(&a.engine, &db)?;
    let source = pick(room.sources(), a.source, "source")?;
    let receiver = pick(room.receivers(), a.receiver, "receiver")?;
    let sim = rirsim_core::simulate(&room, &db, source, receiver, &config)?;
    let sidecar = render::write_rir(&a.output, &sim.rir, a.format.into(), &config.hash(&room))?;
    log::info!("wrote {} and {}", a.output.display(), sidecar.display());
    if let Some(path) = &a.dump_histogram {
        match &sim.histogram {
            Some(h) => write_text(Some(path), &h.to_csv())?,
            None => log::warn!("method {} traces no rays; no histogram written", config.method),
        }
    }
    Ok(())
}

/// Parses `PATH,SOURCE,SNR_DB`.
fn parse_noise(spec: &str) -> CliResult<(PathBuf, usize, f64)> {
    let parts: Vec<&str> = spec.rsplitn(3, ',').collect();
    let bad = || CliError::usage(anyhow!("--noise expects PATH,SOURCE,SNR_DB, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let snr: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let source: usize = parts[1].trim().parse().map_err(|_| bad())?;
    if !snr.is_finite() {
        return Err(bad());
    }
    Ok((PathBuf::from(parts[2]), source, snr))
}

fn read_audio(path: &Path, expected: u32) -> CliResult<render::Audio> {
    let audio = render::read_wav(path)?;
    if audio.sample_rate != expected {
        return Err(Error::SampleRateMismatch {
            context: path.display().to_string(),
            found: audio.sample_rate,
            expected,
        }
        .into());
    }
    Ok(audio)
}

pub fn cmd_mix(a: &MixArgs) -> CliResult {
    let db = material_db(a.engine.materials.as_deref())?;
    let config = sim_config(&a.engine)?;
    let room = load_room(&a.engine, &db)?;
    let fs = room.environment().sample_rate;
    let receiver = pick(room.receivers(), a.receiver, "receiver")?;
    let noises = a
        .noises
        .iter()
        .map(|s| parse_noise(s))
        .collect::<CliResult<Vec<_>>>()?;

    let target = read_audio(&a.target, fs)?;
    let mut noise_audio = Vec::with_capacity(noises.len());
    for (path, _, _) in &noises {
        noise_audio.push(read_audio(path, fs)?);
    }

    // Each distinct source is simulated once; RIRs are indexed by source.
    let wanted: BTreeSet<usize> = std::iter::once(a.target_source)
        .chain(noises.iter().map(|(_, s, _)| *s))
        .collect();
    let mut rirs = Vec::new();
    let mut slot = BTreeMap::new();
    for &index in &wanted {
        let source = pick(room.sources(), index, "source")?;
        slot.insert(index, rirs.len());
        rirs.push(rirsim_core::simulate_rir(&room, &db, source, receiver, &config)?);
    }

    let spec = MixSpec {
        target,
        target_source: slot[&a.target_source],
        noises: noises
            .iter()
            .zip(noise_audio)
            .map(|((_, s, snr), audio)| Noise { audio, source: slot[s], snr_db: *snr })
            .collect(),
        normalization: if a.no_normalize { Normalization::None } else { Normalization::PeakIfClipping },
    };
    let out = mix_scene(&rirs, &spec)?;
    if out.scale != 1.0 {
        log::info!("mix scaled by {:.4} to avoid clipping", out.scale);
    }
    render::write_wav(&a.output, &out.samples, fs, a.format.into())?;
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs) -> CliResult {
    let dims: [f64; 3] = a
        .dims
        .as_slice()
        .try_into()
        .map_err(|_| CliError::usage(anyhow!("--dims takes three values")))?;
    let room = bench::BenchRoom { dims, rt60: a.rt60, scattering: a.scattering };
    let mode = match a.mode {
        BenchModeArg::Rays => bench::BenchMode::Rays,
        BenchModeArg::Order => bench::BenchMode::Order,
    };
    let report = bench::run_bench(mode, &room, a.trials, a.values.clone())?;
    write_text(a.output.as_deref(), &report.to_csv())
}

pub fn cmd_materials(a: &MaterialsArgs) -> CliResult {
    let db = material_db(a.materials.as_deref())?;
    let mut out = String::from("name,absorption,scattering,source\n");
    for m in db.iter() {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        out.push_str(&format!(
            "{},{},{},\"{}\"\n",
            m.name,
            join(&m.absorption),
            m.scattering.as_deref().map(join).unwrap_or_default(),
            m.source.replace('"', "'")
        ));
    }
    write_text(None, &out)
}

pub fn cmd_filters(a: &FiltersArgs) -> CliResult {
    if a.points < 2 {
        return Err(CliError::usage(anyhow!("--points must be at least 2")));
    }
    let bank = rirsim_core::spectral::design_bank(a.sample_rate, &BandScheme::for_sample_rate(a.sample_rate))?;
    write_text(a.output.as_deref(), &bank.response_csv(a.points))
}
