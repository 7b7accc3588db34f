use crate::error::{Error, Result};
use crate::materials::OCTAVE_CENTERS;
use crate::scene::EnvSpec;

pub const AIR_TABLE_TEMPERATURES: [f64; 3] = [10.0, 20.0, 30.0];
pub const AIR_TABLE_HUMIDITY: [f64; 3] = [30.0, 50.0, 70.0];

/// Atmospheric attenuation in dB/m at 101.325 kPa, indexed
/// `[temperature][humidity][band]` over the grids above and the octave
/// centers 125 Hz .. 8 kHz. Values from the ISO 9613-1 pure-tone formula
/// evaluated at the band centers.
#[rustfmt::skip]
pub const AIR_TABLE_DB_PER_M: [[[f64; 7]; 3]; 3] = [
    [
        [5.469648e-04, 1.044638e-03, 2.269692e-03, 6.769214e-03, 2.358129e-02, 7.719084e-02, 1.881691e-01],
        [4.808355e-04, 1.046080e-03, 1.892401e-03, 4.264748e-03, 1.325047e-02, 4.707369e-02, 1.568402e-01],
        [4.062927e-04, 1.038034e-03, 1.924223e-03, 3.657686e-03, 9.701575e-03, 3.305860e-02, 1.183815e-01],
    ],
    [
        [6.081750e-04, 1.418414e-03, 2.511343e-03, 5.005069e-03, 1.411726e-02, 4.889191e-02, 1.683485e-01],
        [4.397900e-04, 1.309750e-03, 2.728134e-03, 4.664732e-03, 9.887016e-03, 2.966553e-02, 1.052909e-01],
        [3.349867e-04, 1.123947e-03, 2.791090e-03, 4.977811e-03, 9.039436e-03, 2.308577e-02, 7.763315e-02],
    ],
    [
        [5.364521e-04, 1.669194e-03, 3.661201e-03, 6.154568e-03, 1.187921e-02, 3.296491e-02, 1.140129e-01],
        [3.457485e-04, 1.241835e-03, 3.555504e-03, 7.032446e-03, 1.169078e-02, 2.464488e-02, 7.405043e-02],
        [2.529294e-04, 9.546439e-04, 3.123948e-03, 7.407002e-03, 1.276786e-02, 2.317710e-02, 5.994666e-02],
    ],
];

/// Amplitude attenuation coefficient per band, in nepers per meter.
#[derive(Debug, Clone, PartialEq)]
pub struct AirAttenuation {
    pub gamma: Vec<f64>,
}

impl AirAttenuation {
    pub fn none(bands: usize) -> Self {
        Self {
            gamma: vec![0.0; bands],
        }
    }
}

/// `(lower grid index, weight of the upper point)`, clamped to the grid.
fn grid_position(grid: &[f64; 3], value: f64) -> (usize, f64) {
    let v = value.clamp(grid[0], grid[2]);
    let i = if v < grid[1] { 0 } else { 1 };
    (i, (v - grid[i]) / (grid[i + 1] - grid[i]))
}

fn table_db_per_m(t: (usize, f64), h: (usize, f64), band: usize) -> f64 {
    let (ti, tw) = t;
    let (hi, hw) = h;
    let at = |a: usize, b: usize| AIR_TABLE_DB_PER_M[a][b][band];
    let low = at(ti, hi) * (1.0 - hw) + at(ti, hi + 1) * hw;
    let high = at(ti + 1, hi) * (1.0 - hw) + at(ti + 1, hi + 1) * hw;
    low * (1.0 - tw) + high * tw
}

/// Air attenuation at each band center for the room environment.
///
/// Temperature and humidity are bilinearly interpolated over the table
/// grid and clamped (with a warning) outside it. Centers between table
/// frequencies interpolate log-log; centers outside 125 Hz .. 8 kHz are
/// rejected.
pub fn air_gamma(env: &EnvSpec, centers: &[f64]) -> Result<AirAttenuation> {
    let (t_lo, t_hi) = (AIR_TABLE_TEMPERATURES[0], AIR_TABLE_TEMPERATURES[2]);
    let (h_lo, h_hi) = (AIR_TABLE_HUMIDITY[0], AIR_TABLE_HUMIDITY[2]);
    if !(t_lo..=t_hi).contains(&env.temperature_c) || !(h_lo..=h_hi).contains(&env.humidity_pct) {
        log::warn!(
            "air absorption table covers {t_lo}..{t_hi} C and {h_lo}..{h_hi} %RH; clamping {} C, {} %RH",
            env.temperature_c,
            env.humidity_pct
        );
    }
    let t = grid_position(&AIR_TABLE_TEMPERATURES, env.temperature_c);
    let h = grid_position(&AIR_TABLE_HUMIDITY, env.humidity_pct);
    let np_per_db = std::f64::consts::LN_10 / 20.0;

    let gamma = centers
        .iter()
        .map(|&f| {
            let db = match OCTAVE_CENTERS.iter().position(|&c| c == f) {
                Some(b) => table_db_per_m(t, h, b),
                None => {
                    let b = OCTAVE_CENTERS
                        .windows(2)
                        .position(|w| w[0] < f && f < w[1])
                        .ok_or_else(|| {
                            Error::Config(format!("no air absorption data at {f} Hz"))
                        })?;
                    let (f0, f1) = (OCTAVE_CENTERS[b], OCTAVE_CENTERS[b + 1]);
                    let (a0, a1) = (table_db_per_m(t, h, b), table_db_per_m(t, h, b + 1));
                    let w = (f / f0).ln() / (f1 / f0).ln();
                    (a0.ln() * (1.0 - w) + a1.ln() * w).exp()
                }
            };
            Ok(db * np_per_db)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AirAttenuation { gamma })
}

/// Amplitude factor `exp(-γ r)`.
pub fn attenuation(gamma: f64, distance: f64) -> f64 {
    (-gamma * distance).exp()
}

/// Energy factor `exp(-2 γ r)`.
pub fn energy_attenuation(gamma: f64, distance: f64) -> f64 {
    (-2.0 * gamma * distance).exp()
}

/// Scales a response component that travelled `distance` meters.
pub fn apply_air_absorption(component: &[f64], distance: f64, gamma: f64) -> Vec<f64> {
    let k = attenuation(gamma, distance);
    component.iter().map(|x| x * k).collect()
}
