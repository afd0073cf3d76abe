//! Run configuration: a sectioned TOML file whose defaults carry the
//! reference link budget (10.7–12.7 GHz, five subcarriers, 302-symbol
//! frames at 240 MHz, σ_n = 1 dB, γ0 = 10 dB, h_R = 3.1 km, 38° elevation,
//! 3 km anchored rain path, band averages 0.022/1.19).

use rainbound::alloc::AllocationContext;
use rainbound::bounds::BandStats;
use rainbound::geometry::ElevationModel;
use rainbound::itu::{CoefficientTable, P838Mode, Polarization, RainPathMode};
use rainbound::{AttenuationModel, Error, FrequencyGrid, LinkConfig, NoiseModel, PathGeometry, RainPrior, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandSection {
    pub low_ghz: f64,
    pub high_ghz: f64,
    pub subcarriers: usize,
    /// "horizontal" or "vertical".
    pub polarization: String,
    /// "band-average" or "per-subcarrier".
    pub p838_mode: String,
    /// Nominal band-average power-law multiplier (closed-form cards).
    pub k_bar: f64,
    /// Nominal band-average power-law exponent.
    pub alpha_bar: f64,
    /// Optional `f_GHz,kH,alphaH` coefficient override file.
    pub coefficient_file: String,
}

impl Default for BandSection {
    fn default() -> Self {
        BandSection {
            low_ghz: 10.7,
            high_ghz: 12.7,
            subcarriers: 5,
            polarization: "horizontal".into(),
            p838_mode: "band-average".into(),
            k_bar: 0.022,
            alpha_bar: 1.19,
            coefficient_file: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkSection {
    pub elevation_deg: f64,
    pub rain_height_km: f64,
    pub gas_path_km: f64,
    pub cloud_path_km: f64,
    pub base_elevation_deg: f64,
    /// Anchored effective rain path at the base elevation, km.
    pub base_rain_path_km: f64,
    /// Clear-sky SNR, dB.
    pub clear_sky_snr_db: f64,
    /// OFDM symbols per frame.
    pub n_sym: u32,
    pub bandwidth_mhz: f64,
    pub pilot_fraction: f64,
    /// Measured dB-domain noise std.
    pub sigma_n_db: f64,
    pub sigma_sys_db: f64,
    /// Water-vapor density, g/m³.
    pub water_vapor_gm3: f64,
    /// Cloud liquid-water content, g/m³.
    pub cloud_lwc_gm3: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection {
            elevation_deg: 38.0,
            rain_height_km: 3.1,
            gas_path_km: 10.0,
            cloud_path_km: 2.0,
            base_elevation_deg: 38.0,
            base_rain_path_km: 3.0,
            clear_sky_snr_db: 10.0,
            n_sym: 302,
            bandwidth_mhz: 240.0,
            pilot_fraction: 0.10,
            sigma_n_db: 1.0,
            sigma_sys_db: 0.63,
            water_vapor_gm3: 7.5,
            cloud_lwc_gm3: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSection {
    pub mean_rate_mmh: f64,
    pub coeff_variation: f64,
    pub temporal_rho: f64,
    /// Observation window for temporal bounds, minutes.
    pub window_minutes: u32,
}

impl Default for PriorSection {
    fn default() -> Self {
        PriorSection { mean_rate_mmh: 5.2, coeff_variation: 1.05, temporal_rho: 0.95, window_minutes: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    /// Spectral-efficiency floor, bit/s/Hz.
    pub c_min_bits: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub tolerance: f64,
    /// Floors swept by the alloc subcommand.
    pub c_min_grid: Vec<f64>,
    /// Fixed-η baselines compared against the adaptive policy.
    pub fixed_etas: Vec<f64>,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            c_min_bits: 1.0,
            eta_min: 0.01,
            eta_max: 0.50,
            tolerance: 1e-4,
            c_min_grid: vec![0.5, 1.0, 1.5, 2.0],
            fixed_etas: vec![0.05, 0.10, 0.20],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectSection {
    pub design_rate_mmh: f64,
    pub p_fa: f64,
    /// Use the wet-antenna effective noise (σ_n = 2 dB) instead of the
    /// configured σ_n.
    pub effective_noise: bool,
}

impl Default for DetectSection {
    fn default() -> Self {
        DetectSection { design_rate_mmh: 5.0, p_fa: 1e-3, effective_noise: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub seed: u64,
    pub stream_id: u64,
    pub estimator_trials: u32,
    pub cusum_trials: u32,
    /// "db" or "chi2".
    pub noise_mode: String,
    pub fusion_links: u32,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            seed: 20250801,
            stream_id: 0,
            estimator_trials: 10_000,
            cusum_trials: 5_000,
            noise_mode: "db".into(),
            fusion_links: 215,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub rain_min_mmh: f64,
    pub rain_max_mmh: f64,
    pub rain_steps: usize,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub elevation_steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            rain_min_mmh: 1.0,
            rain_max_mmh: 120.0,
            rain_steps: 120,
            elevation_min_deg: 5.0,
            elevation_max_deg: 90.0,
            elevation_steps: 171,
        }
    }
}

/// Whole run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub band: BandSection,
    pub link: LinkSection,
    pub prior: PriorSection,
    pub policy: PolicySection,
    pub detect: DetectSection,
    pub mc: McSection,
    pub sweep: SweepSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.band.subcarriers == 0 {
            return Err(Error::Config("band.subcarriers must be >= 1".into()));
        }
        if !(self.band.low_ghz < self.band.high_ghz) && self.band.subcarriers > 1 {
            return Err(Error::Config("band edges must satisfy low < high".into()));
        }
        match self.band.p838_mode.as_str() {
            "band-average" | "per-subcarrier" => {}
            other => return Err(Error::Config(format!("unknown p838_mode `{other}`"))),
        }
        match self.band.polarization.as_str() {
            "horizontal" | "vertical" => {}
            other => return Err(Error::Config(format!("unknown polarization `{other}`"))),
        }
        match self.mc.noise_mode.as_str() {
            "db" | "chi2" => {}
            other => return Err(Error::Config(format!("unknown noise_mode `{other}`"))),
        }
        if self.sweep.rain_steps == 0 {
            return Err(Error::Config("sweep.rain_steps must be >= 1 (empty rain grid)".into()));
        }
        if self.sweep.elevation_steps == 0 {
            return Err(Error::Config("sweep.elevation_steps must be >= 1".into()));
        }
        if !(self.link.pilot_fraction > 0.0 && self.link.pilot_fraction < 1.0) {
            return Err(Error::Config("link.pilot_fraction must lie in (0, 1)".into()));
        }
        // Construct the derived objects so their own invariants run.
        self.frequency_grid()?;
        self.geometry()?;
        self.rain_prior()?;
        self.allocation_policy()?;
        Ok(())
    }

    pub fn polarization(&self) -> Polarization {
        match self.band.polarization.as_str() {
            "vertical" => Polarization::Vertical,
            _ => Polarization::Horizontal,
        }
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        let k = self.band.subcarriers;
        let freqs: Vec<f64> = if k == 1 {
            vec![0.5 * (self.band.low_ghz + self.band.high_ghz)]
        } else {
            (0..k)
                .map(|i| {
                    self.band.low_ghz + (self.band.high_ghz - self.band.low_ghz) * i as f64 / (k - 1) as f64
                })
                .collect()
        };
        FrequencyGrid::new(freqs, self.polarization())
    }

    pub fn attenuation_model(&self) -> Result<AttenuationModel> {
        let mode = match self.band.p838_mode.as_str() {
            "per-subcarrier" => P838Mode::PerSubcarrier,
            _ => P838Mode::BandAverage,
        };
        let table = if self.band.coefficient_file.is_empty() {
            None
        } else {
            let text = std::fs::read_to_string(&self.band.coefficient_file).map_err(|e| {
                Error::Config(format!("coefficient file {}: {e}", self.band.coefficient_file))
            })?;
            Some(CoefficientTable::parse(&text)?)
        };
        Ok(AttenuationModel { mode, table })
    }

    pub fn geometry(&self) -> Result<PathGeometry> {
        PathGeometry::new(
            self.link.elevation_deg,
            self.link.rain_height_km,
            self.link.gas_path_km,
            self.link.cloud_path_km,
            self.link.base_elevation_deg,
            self.link.base_rain_path_km,
            RainPathMode::Anchored,
        )
    }

    pub fn clear_sky_snr_linear(&self) -> f64 {
        10f64.powf(self.link.clear_sky_snr_db / 10.0)
    }

    pub fn link_config(&self) -> Result<LinkConfig> {
        Ok(LinkConfig {
            geometry: self.geometry()?,
            clear_sky_snr: self.clear_sky_snr_linear(),
            n_sym: self.link.n_sym,
            pilot_fraction: self.link.pilot_fraction,
            noise: NoiseModel {
                sigma_sys_db: self.link.sigma_sys_db,
                pilot_count: ((self.link.pilot_fraction * f64::from(self.link.n_sym)).round() as u32).max(1),
                snr_linear: self.clear_sky_snr_linear(),
                fixed_sigma_db: Some(self.link.sigma_n_db),
            },
        })
    }

    pub fn rain_prior(&self) -> Result<RainPrior> {
        RainPrior::new(self.prior.mean_rate_mmh, self.prior.coeff_variation, self.prior.temporal_rho)
    }

    pub fn allocation_policy(&self) -> Result<rainbound::alloc::AllocationPolicy> {
        rainbound::alloc::AllocationPolicy::new(
            self.policy.c_min_bits,
            self.policy.eta_min,
            self.policy.eta_max,
            self.policy.tolerance,
        )
    }

    /// Band averages from the active model over the configured grid.
    pub fn band_stats(&self) -> Result<BandStats> {
        let grid = self.frequency_grid()?;
        Ok(BandStats::from_coefficients(
            &self.attenuation_model()?.band_average_coefficients(&grid)?,
        ))
    }

    /// Nominal band averages as written in the config (closed-form cards).
    pub fn nominal_band_stats(&self) -> BandStats {
        BandStats { k_bar: self.band.k_bar, alpha_bar: self.band.alpha_bar }
    }

    pub fn elevation_model(&self, include_gas: bool) -> Result<ElevationModel> {
        let grid = self.frequency_grid()?;
        Ok(ElevationModel {
            link: self.link_config()?,
            band: self.band_stats()?,
            k_subcarriers: grid.len(),
            center_freq_ghz: grid.center(),
            water_vapor: self.link.water_vapor_gm3,
            include_gas,
        })
    }

    pub fn allocation_context(&self) -> Result<AllocationContext> {
        let grid = self.frequency_grid()?;
        Ok(AllocationContext {
            band: self.band_stats()?,
            k_subcarriers: grid.len(),
            link: self.link_config()?,
            prior: self.rain_prior()?,
            t_window: self.prior.window_minutes,
            baseline_attenuation_db: 0.0,
            include_sys_floor: false,
        })
    }

    pub fn detector_sigma_db(&self) -> f64 {
        if self.detect.effective_noise {
            2.0
        } else {
            self.link.sigma_n_db
        }
    }

    pub fn rain_grid(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.rain_steps == 1 {
            return vec![s.rain_min_mmh];
        }
        (0..s.rain_steps)
            .map(|i| {
                s.rain_min_mmh + (s.rain_max_mmh - s.rain_min_mmh) * i as f64 / (s.rain_steps - 1) as f64
            })
            .collect()
    }

    pub fn elevation_grid(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.elevation_steps == 1 {
            return vec![s.elevation_min_deg];
        }
        (0..s.elevation_steps)
            .map(|i| {
                s.elevation_min_deg
                    + (s.elevation_max_deg - s.elevation_min_deg) * i as f64 / (s.elevation_steps - 1) as f64
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_carry_reference_values() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        for needle in ["10.7", "12.7", "0.022", "1.19", "302", "240", "1.0", "10.0", "3.1", "38.0", "3.0"] {
            assert!(text.contains(needle), "serialized defaults missing `{needle}`\n{text}");
        }
        let reparsed = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, reparsed);
        assert_eq!(reparsed.to_toml(), text);
    }

    #[test]
    fn rejects_bad_sections() {
        assert!(RunConfig::from_toml("[band]\nsubcarriers = 0\n").is_err());
        assert!(RunConfig::from_toml("[sweep]\nrain_steps = 0\n").is_err());
        assert!(RunConfig::from_toml("[mc]\nnoise_mode = \"bogus\"\n").is_err());
        assert!(RunConfig::from_toml("[nope]\nx = 1\n").is_err());
    }

    #[test]
    fn grid_construction() {
        let cfg = RunConfig::default();
        let grid = cfg.frequency_grid().unwrap();
        assert_eq!(grid.len(), 5);
        assert_eq!(grid.frequencies()[0], 10.7);
        assert_eq!(grid.frequencies()[4], 12.7);
        let band = cfg.band_stats().unwrap();
        assert!((band.k_bar - 0.022).abs() / 0.022 < 0.05);
        assert!((band.alpha_bar - 1.19).abs() / 1.19 < 0.05);
    }

    #[test]
    fn coefficient_file_override_feeds_band_stats() {
        let dir = std::env::temp_dir().join("rainbound_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("coeffs.csv");
        std::fs::write(&path, "10.0,0.010,1.30\n13.0,0.010,1.30\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.band.coefficient_file = path.display().to_string();
        let band = cfg.band_stats().unwrap();
        assert!((band.k_bar - 0.010).abs() < 1e-12);
        assert!((band.alpha_bar - 1.30).abs() < 1e-12);
        // Missing file surfaces as a config error.
        cfg.band.coefficient_file = dir.join("absent.csv").display().to_string();
        assert!(matches!(cfg.attenuation_model(), Err(rainbound::Error::Config(_))));
    }

    #[test]
    fn effective_noise_switches_detector_sigma() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.detector_sigma_db(), 1.0);
        cfg.detect.effective_noise = true;
        assert_eq!(cfg.detector_sigma_db(), 2.0);
    }
}
