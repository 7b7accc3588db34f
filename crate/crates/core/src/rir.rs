use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which propagation model produced a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ism,
    Srt,
    Hybrid,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ism => "ism",
            Method::Srt => "srt",
            Method::Hybrid => "hybrid",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ism" => Ok(Method::Ism),
            "srt" => Ok(Method::Srt),
            "hybrid" | "hyb" => Ok(Method::Hybrid),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// Where a response came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RirMeta {
    pub method: Method,
    /// Band centers (Hz) merged into the response; empty for single-band.
    pub bands: Vec<f64>,
    /// Seed of the stochastic parts, if any ran.
    pub seed: Option<u64>,
}

/// A sampled room impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct Rir {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub meta: RirMeta,
}

impl Rir {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Adds `src` into `dst`, growing `dst` as needed.
pub(crate) fn accumulate(dst: &mut Vec<f64>, src: &[f64]) {
    if dst.len() < src.len() {
        dst.resize(src.len(), 0.0);
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
