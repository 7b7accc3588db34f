//! Runtime sweeps over ray count and image-source order.

use std::time::Instant;

use rirsim_core::materials::eyring_absorption;
use rirsim_core::{
    simulate_rir, EnvSpec, MaterialDb, Method, ReceiverSpec, RoomSpec, SimConfig, SourceSpec, Vec3,
};

pub const RAY_SWEEP: [f64; 4] = [1e3, 1e4, 1e5, 1e6];
pub const RAY_SWEEP_ORDER: u32 = 3;
pub const ORDER_SWEEP_RAYS: usize = 10_000;
pub const MAX_ORDER: u32 = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Rays,
    Order,
}

impl BenchMode {
    pub fn param(self) -> &'static str {
        match self {
            BenchMode::Rays => "n_rays",
            BenchMode::Order => "ism_order",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            BenchMode::Rays => RAY_SWEEP.to_vec(),
            BenchMode::Order => (1..=MAX_ORDER).map(f64::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRoom {
    pub dims: [f64; 3],
    pub rt60: f64,
    pub scattering: f64,
}

impl Default for BenchRoom {
    fn default() -> Self {
        Self {
            dims: [8.0, 9.0, 3.0],
            rt60: 0.5,
            scattering: 0.5,
        }
    }
}

impl BenchRoom {
    /// Uniform room with the Eyring absorption for `rt60`; source and
    /// receiver at fixed fractions of the box.
    pub fn build(&self) -> rirsim_core::Result<RoomSpec> {
        let [x, y, z] = self.dims;
        let source = SourceSpec {
            position: Vec3::new(0.25 * x, 0.3 * y, 0.5 * z),
        };
        let receiver = ReceiverSpec::new(Vec3::new(0.7 * x, 0.65 * y, 0.4 * z));
        let probe = RoomSpec::uniform(
            Vec3::from(self.dims),
            0.5,
            self.scattering,
            vec![source],
            vec![receiver],
            EnvSpec::default(),
        )?;
        let alpha = eyring_absorption(probe.volume(), probe.surface_area(), self.rt60)?;
        probe.with_uniform_absorption(alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPoint {
    pub value: f64,
    pub mean_s: f64,
    pub std_s: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub param: String,
    pub points: Vec<BenchPoint>,
    pub machine: String,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,value,mean_s,std_s,trials,machine\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{:.9},{:.9},{},\"{}\"\n",
                self.param,
                p.value,
                p.mean_s,
                p.std_s,
                p.trials,
                self.machine.replace('"', "'")
            ));
        }
        out
    }

    fn series(&self) -> (Vec<f64>, Vec<f64>) {
        self.points.iter().map(|p| (p.value, p.mean_s)).unzip()
    }

    /// Coefficient of determination of a least-squares line through
    /// (value, mean runtime).
    pub fn linear_r2(&self) -> f64 {
        let (x, y) = self.series();
        let (slope, intercept) = least_squares(&x, &y);
        let my = y.iter().sum::<f64>() / y.len() as f64;
        let ss_res: f64 = x
            .iter()
            .zip(&y)
            .map(|(x, y)| (y - slope * x - intercept).powi(2))
            .sum();
        let ss_tot: f64 = y.iter().map(|y| (y - my).powi(2)).sum();
        1.0 - ss_res / ss_tot
    }

    /// Slope of a least-squares line through (ln value, ln mean runtime).
    pub fn loglog_slope(&self) -> f64 {
        let (x, y) = self.series();
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        least_squares(&lx, &ly).0
    }
}

/// `(slope, intercept)` of the least-squares line.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn machine_descriptor() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_owned())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    format!(
        "{} {} {cpu} {} threads",
        std::env::consts::OS,
        std::env::consts::ARCH,
        rayon::current_num_threads()
    )
}

/// Times hybrid RIR generation `trials` times per sweep value.
pub fn run_bench(
    mode: BenchMode,
    room: &BenchRoom,
    trials: usize,
    values: Option<Vec<f64>>,
) -> rirsim_core::Result<BenchReport> {
    if trials < 2 {
        return Err(rirsim_core::Error::Config(format!(
            "bench needs at least 2 trials, got {trials}"
        )));
    }
    let values = values.unwrap_or_else(|| mode.default_values());
    if values.windows(2).any(|w| w[1] <= w[0]) || values.iter().any(|v| *v < 1.0) {
        return Err(rirsim_core::Error::Config(
            "sweep values must be increasing and at least 1".into(),
        ));
    }
    let spec = room.build()?;
    let db = MaterialDb::builtin();
    let mut points = Vec::with_capacity(values.len());
    for &value in &values {
        let config = match mode {
            BenchMode::Rays => SimConfig {
                method: Method::Hybrid,
                ism_order: RAY_SWEEP_ORDER,
                n_rays: value as usize,
                ..Default::default()
            },
            BenchMode::Order => SimConfig {
                method: Method::Hybrid,
                ism_order: value as u32,
                n_rays: ORDER_SWEEP_RAYS,
                ..Default::default()
            },
        };
        let mut times = Vec::with_capacity(trials);
        for trial in 0..trials {
            let config = SimConfig {
                seed: trial as u64,
                ..config.clone()
            };
            let start = Instant::now();
            let rir = simulate_rir(&spec, &db, &spec.sources()[0], &spec.receivers()[0], &config)?;
            times.push(start.elapsed().as_secs_f64());
            std::hint::black_box(rir);
        }
        let mean = times.iter().sum::<f64>() / trials as f64;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        log::info!("{} = {value}: {mean:.4} s", mode.param());
        points.push(BenchPoint {
            value,
            mean_s: mean,
            std_s: var.sqrt(),
            trials,
        });
    }
    Ok(BenchReport {
        param: mode.param().to_owned(),
        points,
        machine: machine_descriptor(),
    })
}
