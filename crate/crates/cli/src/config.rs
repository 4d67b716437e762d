//! Run configuration: a plain JSON file plus per-flag overrides, validated
//! with field-precise errors. The config (after overrides) is echoed into
//! the run manifest so every output is reproducible from the manifest
//! alone.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use wickheat_core::spectral_basis::SpectralFunction;
use wickheat_core::stochastic_field::GaussianDraw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialData {
    /// u0 = m_1, the constant 1/sqrt(pi)
    Constant,
    /// u0 = m_k
    Mode { k: usize },
    /// random band-limited data with unit L2 norm
    BandLimited { modes: usize, seed: u64 },
}

impl InitialData {
    pub fn build(&self, modes: usize) -> Result<SpectralFunction, String> {
        match self {
            InitialData::Constant => Ok(SpectralFunction::mode(1, modes)),
            InitialData::Mode { k } => {
                if *k < 1 || *k > modes {
                    return Err(format!(
                        "initial_data.k: mode {k} outside 1..={modes} (wavenumber_cap)"
                    ));
                }
                Ok(SpectralFunction::mode(*k, modes))
            }
            InitialData::BandLimited { modes: band, seed } => {
                if *band < 1 || *band > modes {
                    return Err(format!(
                        "initial_data.modes: band {band} outside 1..={modes} (wavenumber_cap)"
                    ));
                }
                let draw = GaussianDraw::generate(*seed, u64::MAX, *band);
                let norm: f64 = draw.values().iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut coeffs: Vec<f64> = draw.values().iter().map(|v| v / norm).collect();
                coeffs.resize(modes, 0.0);
                Ok(SpectralFunction::new(coeffs))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InitialData::Constant => "constant".into(),
            InitialData::Mode { k } => format!("mode {k}"),
            InitialData::BandLimited { modes, seed } => {
                format!("band-limited ({modes} modes, seed {seed})")
            }
        }
    }
}

fn default_order_cap() -> u32 {
    3
}
fn default_wavenumber_cap() -> usize {
    16
}
fn default_noise_modes() -> usize {
    6
}
fn default_initial_data() -> InitialData {
    InitialData::Constant
}
fn default_times() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}
fn default_points() -> Vec<f64> {
    vec![PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]
}
fn default_lag_lo() -> u32 {
    4
}
fn default_lag_hi() -> u32 {
    14
}
fn default_seed() -> u64 {
    1
}
fn default_draws() -> usize {
    100_000
}
fn default_additive_modes() -> usize {
    // the space curve needs wavenumbers past the reciprocal of the smallest
    // lag (2^-14 by default); the series cost is linear and negligible
    1_000_000
}
fn default_horizon() -> f64 {
    1.0
}
fn default_budget() -> usize {
    2_000_000
}
fn default_depth() -> u32 {
    8
}
fn default_alpha() -> f64 {
    0.25
}
fn default_beta() -> f64 {
    0.5
}
fn default_source() -> f64 {
    PI / 2.0
}
fn default_potentials() -> usize {
    5
}
fn default_potential_modes() -> usize {
    8
}
fn default_realizations() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// chaos order truncation N
    #[serde(default = "default_order_cap")]
    pub order_cap: u32,
    /// spectral truncation K
    #[serde(default = "default_wavenumber_cap")]
    pub wavenumber_cap: usize,
    /// noise-mode truncation M
    #[serde(default = "default_noise_modes")]
    pub noise_modes: usize,
    #[serde(default = "default_initial_data")]
    pub initial_data: InitialData,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_points")]
    pub points: Vec<f64>,
    /// dyadic lag grid 2^-lag_lo .. 2^-lag_hi
    #[serde(default = "default_lag_lo")]
    pub lag_lo: u32,
    #[serde(default = "default_lag_hi")]
    pub lag_hi: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// truncation of the exact additive benchmark series
    #[serde(default = "default_additive_modes")]
    pub additive_modes: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// combinatorial budget guard for the solver
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// simplex-integral depth cap
    #[serde(default = "default_depth")]
    pub depth: u32,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// source point for the fundamental solution
    #[serde(default = "default_source")]
    pub source: f64,
    /// number of random potentials for the certificate
    #[serde(default = "default_potentials")]
    pub potentials: usize,
    /// band limit of the random potentials
    #[serde(default = "default_potential_modes")]
    pub potential_modes: usize,
    /// realization columns written by `sample`
    #[serde(default = "default_realizations")]
    pub realizations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.wavenumber_cap < 1 {
            return Err("wavenumber_cap: must be >= 1".into());
        }
        if self.noise_modes < 1 {
            return Err("noise_modes: must be >= 1".into());
        }
        if self.times.is_empty() {
            return Err("times: must be non-empty".into());
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err("times: must be strictly increasing".into());
        }
        if self.times.iter().any(|&t| t < 0.0) {
            return Err("times: must be non-negative".into());
        }
        if self.points.is_empty() {
            return Err("points: must be non-empty".into());
        }
        if self.points.windows(2).any(|w| w[1] <= w[0]) {
            return Err("points: must be strictly increasing".into());
        }
        if self.points.iter().any(|&x| !(0.0..=PI).contains(&x)) {
            return Err("points: must lie in [0, pi]".into());
        }
        if self.lag_lo > self.lag_hi {
            return Err("lag_lo: must be <= lag_hi".into());
        }
        if self.draws < 2 {
            return Err("draws: must be >= 2".into());
        }
        if self.additive_modes < 1 {
            return Err("additive_modes: must be >= 1".into());
        }
        if self.horizon <= 0.0 {
            return Err("horizon: must be positive".into());
        }
        if self.depth < 1 {
            return Err("depth: must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err("alpha: must lie in (0, 1)".into());
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err("beta: must lie in [0, 1)".into());
        }
        if !(0.0..=PI).contains(&self.source) {
            return Err("source: must lie in [0, pi]".into());
        }
        if self.potentials < 1 {
            return Err("potentials: must be >= 1".into());
        }
        if self.potential_modes < 1 || self.potential_modes > self.wavenumber_cap {
            return Err("potential_modes: must lie in 1..=wavenumber_cap".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_losslessly() {
        let config = RunConfig {
            order_cap: 2,
            initial_data: InitialData::BandLimited { modes: 5, seed: 9 },
            times: vec![0.1, 0.7],
            ..RunConfig::default()
        };
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn validation_reports_field() {
        let bad = RunConfig {
            times: vec![1.0, 0.5],
            ..RunConfig::default()
        };
        let err = bad.validate().unwrap_err();
        assert!(err.starts_with("times:"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<RunConfig>("{\"order_cpa\": 3}").unwrap_err();
        assert!(err.to_string().contains("order_cpa"));
    }
}
