//! Rain sensing on Ku-band satellite OFDM downlinks.
//!
//! The crate models the full estimation-theoretic pipeline for retrieving
//! rain rate from downlink attenuation measurements:
//!
//! * [`itu`] — slant-path attenuation physics (P.838 power law, P.618 path
//!   reduction, simplified gaseous/cloud terms) and its sensitivity matrix;
//! * [`bounds`] — Fisher information, standard/joint Cramér–Rao bounds,
//!   Bayesian (Van Trees) and temporal bounds, multi-link fusion bounds,
//!   minimum detectable rain rate, identifiability diagnostics;
//! * [`geometry`] — elevation-dependent path/SNR scaling and the
//!   sensing-optimal elevation (closed form and numeric);
//! * [`rate`] — pilot-aided spectral efficiency and the throughput-optimal
//!   pilot fraction;
//! * [`alloc`] — weather-adaptive pilot allocation under a hard
//!   spectral-efficiency floor (three-regime structure);
//! * [`detect`] — CUSUM rain-onset detection with Wald delay prediction;
//! * [`estimate`] — closed-form initializer, Newton MLE, prior-penalized MAP
//!   and FIM-weighted multi-link fusion;
//! * [`mc`] — reproducible Monte Carlo experiments that verify the bounds,
//!   estimator efficiency and detector delay.
//!
//! All computations are pure functions of value inputs and safe to call
//! concurrently.

// Guards are written `!(x > 0.0)` so NaN inputs fail validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alloc;
pub mod bounds;
pub mod detect;
pub mod estimate;
pub mod geometry;
pub mod itu;
pub mod linalg;
pub mod mc;
pub mod rate;
pub use bounds::{BandStats, BoundResult, NoiseModel, RainPrior};
pub use itu::{AtmosphericState, AttenuationModel, FrequencyGrid, P838Coefficients, PathGeometry, Polarization};

/// `c0 = (10 / ln 10)^2 ≈ 18.86`, the dB-conversion constant of the
/// pilot-power noise model.
pub const C0: f64 = 18.861_115_708_129_18;

/// Library-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical/physical domain of an operation.
    Domain(String),
    /// Non-finite intermediate or ill-conditioned numeric state.
    Numeric(String),
    /// Inconsistent or out-of-range configuration.
    Config(String),
    /// Root bracketing failed: the requested level is never attained.
    NoSolution(String),
    /// Nuisance information block is singular; the parameter set cannot be
    /// separated by the data.
    Unidentifiable(String),
    /// CUSUM drift is non-positive: the rain rate is below the detectable
    /// region for the configured design point.
    Undetectable(String),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Numeric(m) => write!(f, "numeric error: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::NoSolution(m) => write!(f, "no solution: {m}"),
            Error::Unidentifiable(m) => write!(f, "unidentifiable: {m}"),
            Error::Undetectable(m) => write!(f, "undetectable: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

/// Link-level configuration shared by the bound, allocation and detection
/// modules: geometry, signal budget and the pilot-power noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub geometry: PathGeometry,
    /// Clear-sky per-subcarrier SNR, linear.
    pub clear_sky_snr: f64,
    /// OFDM symbols per frame.
    pub n_sym: u32,
    /// Pilot fraction of the frame.
    pub pilot_fraction: f64,
    pub noise: NoiseModel,
}

impl LinkConfig {
    /// Reference single-link configuration: 38° elevation, 3 km anchored
    /// rain path, 10 dB clear-sky SNR, 302-symbol frame at 10% pilots,
    /// 1 dB measured noise.
    pub fn reference() -> Self {
        LinkConfig {
            geometry: PathGeometry::reference(),
            clear_sky_snr: 10.0,
            n_sym: 302,
            pilot_fraction: 0.10,
            noise: NoiseModel::fixed(1.0),
        }
    }

    /// Pilot symbols per frame implied by the pilot fraction.
    pub fn n_pilots(&self) -> u32 {
        let np = (self.pilot_fraction * f64::from(self.n_sym)).round();
        (np as u32).clamp(1, self.n_sym.saturating_sub(1).max(1))
    }
}
