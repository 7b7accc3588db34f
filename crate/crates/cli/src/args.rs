use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rirsim_core::ism::ReflectionLaw;
use rirsim_core::render::SampleFormat;
use rirsim_core::Method;

#[derive(Debug, Parser)]
#[command(name = "rirsim", version, about = "Room impulse response simulator")]
pub struct Cli {
    /// Worker threads for the simulation engine (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render an RIR for one source/receiver pair.
    Simulate(SimulateArgs),
    /// Convolve a target and noises with simulated RIRs and mix at given SNRs.
    Mix(MixArgs),
    /// Time RIR generation over ray counts or ISM orders; writes CSV.
    Bench(BenchArgs),
    /// List the material database.
    Materials(MaterialsArgs),
    /// Dump the filter bank magnitude responses as CSV.
    Filters(FiltersArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ism,
    Srt,
    Hybrid,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ism => Method::Ism,
            MethodArg::Srt => Method::Srt,
            MethodArg::Hybrid => Method::Hybrid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    F32,
    I16,
}

impl From<FormatArg> for SampleFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::F32 => SampleFormat::F32,
            FormatArg::I16 => SampleFormat::I16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawArg {
    /// Amplitude sqrt(1 - a) per reflection.
    Energy,
    /// Amplitude sqrt(1 - a^2) per reflection.
    Squared,
}

impl From<LawArg> for ReflectionLaw {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::Energy => ReflectionLaw::Energy,
            LawArg::Squared => ReflectionLaw::SquaredAbsorption,
        }
    }
}

/// Engine settings shared by `simulate` and `mix`.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Room-spec TOML file.
    #[arg(long, value_name = "PATH")]
    pub room: PathBuf,

    #[arg(long, value_enum, default_value_t = MethodArg::Hybrid)]
    pub method: MethodArg,

    /// Maximum image-source reflection order.
    #[arg(long, default_value_t = 17)]
    pub ism_order: u32,

    /// Rays emitted by the ray tracer.
    #[arg(long, default_value_t = 10_000)]
    pub rays: usize,

    /// Seed for the stochastic parts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Apply per-band air absorption.
    #[arg(long)]
    pub air: bool,

    /// Use frequency-dependent material coefficients (needs --multiband).
    #[arg(long)]
    pub mat: bool,

    /// Simulate per octave band and merge with the filter bank.
    #[arg(long)]
    pub multiband: bool,

    /// Replace all absorption with the uniform Eyring value for this RT60 (s).
    #[arg(long, value_name = "SECONDS")]
    pub rt60: Option<f64>,

    /// Energy histogram bin width in milliseconds.
    #[arg(long, default_value_t = 4.0)]
    pub bin_width_ms: f64,

    /// Ray travel-time limit in seconds (default: twice the Eyring RT60).
    #[arg(long, value_name = "SECONDS")]
    pub max_time: Option<f64>,

    /// Image-source reflection amplitude law.
    #[arg(long, value_enum, default_value_t = LawArg::Energy)]
    pub reflection_law: LawArg,

    /// Material database TOML (default: $RIRSIM_MATERIALS, else built-in).
    #[arg(long, value_name = "PATH")]
    pub materials: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub engine: EngineArgs,

    /// Source index in the room file.
    #[arg(long, default_value_t = 0)]
    pub source: usize,

    /// Receiver index in the room file.
    #[arg(long, default_value_t = 0)]
    pub receiver: usize,

    /// Output sample format.
    #[arg(long, value_enum, default_value_t = FormatArg::F32)]
    pub format: FormatArg,

    /// Write the ray energy histogram as CSV.
    #[arg(long, value_name = "PATH")]
    pub dump_histogram: Option<PathBuf>,

    /// Output WAV; a JSON sidecar is written next to it.
    #[arg(short, long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    #[command(flatten)]
    pub engine: EngineArgs,

    /// Receiver index in the room file.
    #[arg(long, default_value_t = 0)]
    pub receiver: usize,

    /// Dry target WAV.
    #[arg(long, value_name = "PATH")]
    pub target: PathBuf,

    /// Source index of the target.
    #[arg(long, default_value_t = 0)]
    pub target_source: usize,

    /// Noise as PATH,SOURCE,SNR_DB; repeatable.
    #[arg(long = "noise", value_name = "PATH,SOURCE,SNR")]
    pub noises: Vec<String>,

    /// Never rescale the mix, even if it clips.
    #[arg(long)]
    pub no_normalize: bool,

    #[arg(long, value_enum, default_value_t = FormatArg::F32)]
    pub format: FormatArg,

    #[arg(short, long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchModeArg {
    /// Sweep ray counts at ISM order 3.
    Rays,
    /// Sweep ISM order 1..=17 at 10^4 rays.
    Order,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub mode: BenchModeArg,

    /// Timed runs per sweep value.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,

    /// Room dimensions in meters.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [8.0, 9.0, 3.0])]
    pub dims: Vec<f64>,

    /// Target RT60 for the uniform Eyring absorption.
    #[arg(long, default_value_t = 0.5)]
    pub rt60: f64,

    #[arg(long, default_value_t = 0.5)]
    pub scattering: f64,

    /// Override the sweep values (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,

    /// CSV output (default: stdout).
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MaterialsArgs {
    /// Material database TOML (default: $RIRSIM_MATERIALS, else built-in).
    #[arg(long, value_name = "PATH")]
    pub materials: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FiltersArgs {
    #[arg(long, default_value_t = 16000)]
    pub sample_rate: u32,

    /// Frequency points between 0 Hz and Nyquist.
    #[arg(long, default_value_t = 512)]
    pub points: usize,

    /// CSV output (default: stdout).
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}
