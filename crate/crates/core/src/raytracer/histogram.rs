/// Time-binned energy arriving at a receiver, per band.
///
/// Deposits are in squared-amplitude units, directly comparable with the
/// energy of an image-source response. `emitted` and `detected` track raw
/// ray energy for the conservation check.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyHistogram {
    bin_width: f64,
    bands: usize,
    /// Flat `[bin * bands + band]`.
    data: Vec<f64>,
    /// Ray energy leaving the source, per band.
    pub emitted: Vec<f64>,
    /// Ray energy intercepted by the receiver (specular crossings plus
    /// diffuse-rain secondaries), per band.
    pub detected: Vec<f64>,
}

impl EnergyHistogram {
    pub fn new(bin_width: f64, n_bins: usize, bands: usize) -> Self {
        Self {
            bin_width,
            bands,
            data: vec![0.0; n_bins * bands],
            emitted: vec![0.0; bands],
            detected: vec![0.0; bands],
        }
    }

    /// Builds a histogram from `bins[band][bin]`.
    pub fn from_bins(bin_width: f64, bins: &[Vec<f64>]) -> Self {
        let bands = bins.len();
        let n_bins = bins.first().map_or(0, Vec::len);
        let mut h = Self::new(bin_width, n_bins, bands);
        for (band, series) in bins.iter().enumerate() {
            assert_eq!(series.len(), n_bins, "ragged histogram");
            for (bin, &e) in series.iter().enumerate() {
                h.data[bin * bands + band] = e;
            }
        }
        h
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn n_bins(&self) -> usize {
        if self.bands == 0 {
            0
        } else {
            self.data.len() / self.bands
        }
    }

    pub fn get(&self, bin: usize, band: usize) -> f64 {
        self.data[bin * self.bands + band]
    }

    /// Energy series of one band.
    pub fn band(&self, band: usize) -> Vec<f64> {
        (0..self.n_bins()).map(|b| self.get(b, band)).collect()
    }

    /// Total deposited energy of one band.
    pub fn total(&self, band: usize) -> f64 {
        (0..self.n_bins()).map(|b| self.get(b, band)).sum()
    }

    /// Adds `energy` to the bin containing `time`; late arrivals are dropped.
    #[inline]
    pub(crate) fn deposit(&mut self, time: f64, band: usize, energy: f64) {
        let bin = (time / self.bin_width) as usize;
        if let Some(slot) = self.data.get_mut(bin * self.bands + band) {
            *slot += energy;
        }
    }

    pub(crate) fn merge(&mut self, other: &EnergyHistogram) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        for (a, b) in self.emitted.iter_mut().zip(&other.emitted) {
            *a += b;
        }
        for (a, b) in self.detected.iter_mut().zip(&other.detected) {
            *a += b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0.0)
    }

    /// True when no band detected more ray energy than it emitted.
    pub fn conserves_energy(&self) -> bool {
        self.detected
            .iter()
            .zip(&self.emitted)
            .all(|(d, e)| *d <= *e * (1.0 + 1e-12))
    }

    /// CSV dump: `bin_start_s` then one energy column per band.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start_s");
        for b in 0..self.bands {
            out.push_str(&format!(",energy_band_{b}"));
        }
        out.push('\n');
        for bin in 0..self.n_bins() {
            out.push_str(&format!("{:.6}", bin as f64 * self.bin_width));
            for band in 0..self.bands {
                out.push_str(&format!(",{:e}", self.get(bin, band)));
            }
            out.push('\n');
        }
        out
    }
}
