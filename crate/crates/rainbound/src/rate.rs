//! Communication-side model: rain-degraded mean SNR, pilot-aided CSI error
//! and the resulting spectral efficiency
//!
//! ```text
//! C(η) = (1 − η) · log2(1 + γ̄² η N_sym / (1 + γ̄ η N_sym)),
//! ```
//!
//! which is concave in `η` with the throughput-optimal maximizer
//! `η*_rate = (√(1 + γ̄ N_sym) − 1)/(γ̄ N_sym)`.

use crate::{Error, Result};

/// OFDM frame split and link budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    /// Symbols per frame.
    pub n_sym: u32,
    /// Pilot fraction.
    pub eta: f64,
    /// Bandwidth, MHz.
    pub bandwidth_mhz: f64,
    /// Clear-sky SNR, linear.
    pub clear_sky_snr: f64,
}

impl FrameConfig {
    pub fn new(n_sym: u32, eta: f64, bandwidth_mhz: f64, clear_sky_snr: f64) -> Result<Self> {
        let np = (eta * f64::from(n_sym)).round();
        if !(np >= 1.0 && np <= f64::from(n_sym) - 1.0) {
            return Err(Error::Config(format!(
                "pilot fraction {eta} leaves no room for pilots and data in a {n_sym}-symbol frame"
            )));
        }
        if !(clear_sky_snr > 0.0) {
            return Err(Error::Config("clear-sky SNR must be positive".into()));
        }
        Ok(FrameConfig { n_sym, eta, bandwidth_mhz, clear_sky_snr })
    }

    /// Reference frame: 302 symbols, 240 MHz, η = 0.10, 10 dB clear sky.
    pub fn reference() -> Self {
        FrameConfig { n_sym: 302, eta: 0.10, bandwidth_mhz: 240.0, clear_sky_snr: 10.0 }
    }
}

/// Mean SNR under attenuation, `γ̄ = γ0 · 10^{−A/10}`.
pub fn mean_snr_under_rain(clear_sky_snr: f64, attenuation_db: f64) -> Result<f64> {
    if !(clear_sky_snr > 0.0) {
        return Err(Error::Domain("clear-sky SNR must be positive".into()));
    }
    Ok(clear_sky_snr * 10f64.powf(-attenuation_db / 10.0))
}

/// Pilot-aided channel-estimate MSE, `1/(η N_sym γ̄)`.
pub fn csi_mse(eta: f64, n_sym: u32, mean_snr: f64) -> Result<f64> {
    let pilots = eta * f64::from(n_sym);
    if !(pilots >= 1.0) {
        return Err(Error::Domain(format!("η·N_sym = {pilots} leaves no pilot symbols")));
    }
    if !(mean_snr > 0.0) {
        return Err(Error::Domain("mean SNR must be positive".into()));
    }
    Ok(1.0 / (pilots * mean_snr))
}

/// Spectral efficiency under imperfect CSI, bit/s/Hz.
pub fn spectral_efficiency(eta: f64, n_sym: u32, mean_snr: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("pilot fraction must lie in (0, 1), got {eta}")));
    }
    if !(mean_snr > 0.0) {
        return Err(Error::Domain("mean SNR must be positive".into()));
    }
    let pn = eta * f64::from(n_sym);
    let eff_snr = mean_snr * mean_snr * pn / (1.0 + mean_snr * pn);
    Ok((1.0 - eta) * (1.0 + eff_snr).log2())
}

/// Throughput-optimal pilot fraction
/// `η*_rate = (√(1 + γ N_sym) − 1)/(γ N_sym)`.
pub fn throughput_optimal_eta(snr: f64, n_sym: u32) -> Result<f64> {
    let gn = snr * f64::from(n_sym);
    if !(gn > 0.0) {
        return Err(Error::Domain("γ·N_sym must be positive".into()));
    }
    Ok(((1.0 + gn).sqrt() - 1.0) / gn)
}
