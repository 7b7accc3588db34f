//! Air absorption and the octave filter bank used to merge band responses.

mod air;
mod filterbank;

pub use air::{
    air_gamma, apply_air_absorption, attenuation, energy_attenuation, AirAttenuation,
    AIR_TABLE_DB_PER_M, AIR_TABLE_HUMIDITY, AIR_TABLE_TEMPERATURES,
};
pub use filterbank::{design_bank, merge_bands, FilterBank, FILTER_FFT_SIZE, FILTER_TAPS};
