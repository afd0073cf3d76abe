//! Dynamic slant geometry.
//!
//! Along a pass the elevation angle couples two opposing effects: the
//! anchored rain path grows toward the horizon (`L_eff ∝ 1/sin θ`,
//! boosting data information `J_D ∝ L_eff²`), while free-space loss cuts
//! the SNR (`γ̄ ∝ sin² θ`), inflating the pilot noise. The minimum
//! detectable rain rate therefore develops a U-shape over elevation with
//! an interior optimum given in closed form by a quadratic in the noise
//! balance (`x* = 1 + √(1 + N_p σ_sys²/c0)`).
//!
//! Noise along the sweep uses the elevation shape of the pilot noise model
//! normalized to the configured σ_n at the anchor elevation, so the
//! baseline column reproduces the fixed-noise bounds exactly. Gaseous
//! absorption can be folded into the SNR (`include_gas`); it lengthens
//! low-elevation paths enough to matter and is on by default.

use crate::bounds::{rmin_closed_form, BandStats};
use crate::itu::{gas_specific_attenuation, AttenuationModel, FrequencyGrid};
use crate::rate;
use crate::{Error, LinkConfig, Result, C0};

/// Noise treatment along an elevation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElevationNoise {
    /// Pilot noise shape `c0/N_p (1 + 1/γ(θ))² + σ_sys²`, normalized to the
    /// configured σ_n at the anchor elevation.
    Realistic,
    /// Fixed σ_n at every elevation (isolates the geometric leverage).
    ConstantNoise,
}

/// Elevation-dependent model: link budget plus band statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationModel {
    pub link: LinkConfig,
    pub band: BandStats,
    pub k_subcarriers: usize,
    /// Band-center frequency for the gas term, GHz.
    pub center_freq_ghz: f64,
    /// Water-vapor density feeding the gas term, g/m³.
    pub water_vapor: f64,
    /// Fold gaseous absorption into the elevation-dependent SNR.
    pub include_gas: bool,
}

impl ElevationModel {
    /// Reference model: Table-level link budget with the Ku band averages.
    pub fn reference() -> Self {
        let grid = FrequencyGrid::ku_default();
        let avg = AttenuationModel::per_subcarrier()
            .band_average_coefficients(&grid)
            .expect("reference grid is valid");
        ElevationModel {
            link: LinkConfig::reference(),
            band: BandStats::from_coefficients(&avg),
            k_subcarriers: grid.len(),
            center_freq_ghz: grid.center(),
            water_vapor: 7.5,
            include_gas: true,
        }
    }

    fn sin_ratio(&self, elevation_deg: f64) -> f64 {
        elevation_deg.to_radians().sin() / self.link.geometry.base_elevation_deg.to_radians().sin()
    }

    /// Anchored rain path at an elevation, km.
    pub fn rain_path_km(&self, elevation_deg: f64) -> Result<f64> {
        leff_of_elevation(elevation_deg, &self.link.geometry)
    }

    fn gas_attenuation_db(&self, elevation_deg: f64) -> Result<f64> {
        if !self.include_gas {
            return Ok(0.0);
        }
        let gamma_g = gas_specific_attenuation(self.center_freq_ghz, self.water_vapor)?;
        Ok(gamma_g * self.link.geometry.gas_path_km / self.sin_ratio(elevation_deg))
    }

    /// SNR at an elevation with optional rain loading, linear.
    pub fn snr_at(&self, elevation_deg: f64, rain_rate: f64) -> Result<f64> {
        let free_space = snr_of_elevation(
            elevation_deg,
            self.link.clear_sky_snr,
            self.link.geometry.base_elevation_deg,
        )?;
        let a_rain = self.band.mean_attenuation_db(rain_rate, self.rain_path_km(elevation_deg)?);
        let a_gas = self.gas_attenuation_db(elevation_deg)?;
        Ok(free_space * 10f64.powf(-(a_rain + a_gas) / 10.0))
    }

    fn noise_shape(&self, snr: f64) -> f64 {
        let np = f64::from(self.link.n_pilots());
        C0 / np * (1.0 + 1.0 / snr).powi(2) + self.link.noise.sigma_sys_db.powi(2)
    }

    /// Noise std at an elevation, dB.
    pub fn sigma_at(&self, elevation_deg: f64, rain_rate: f64, mode: ElevationNoise) -> Result<f64> {
        let sigma_base = self.link.noise.sigma_db()?;
        match mode {
            ElevationNoise::ConstantNoise => Ok(sigma_base),
            ElevationNoise::Realistic => {
                let base_elev = self.link.geometry.base_elevation_deg;
                let shape = self.noise_shape(self.snr_at(elevation_deg, rain_rate)?);
                let shape_base = self.noise_shape(self.snr_at(base_elev, 0.0)?);
                Ok(sigma_base * (shape / shape_base).sqrt())
            }
        }
    }

    /// Operating-point CRB RMSE at rain rate `R` and elevation `θ`, with
    /// rain-degraded SNR feeding the noise, mm/h.
    pub fn bound_rmse_at(&self, elevation_deg: f64, rain_rate: f64) -> Result<f64> {
        let sigma = self.sigma_at(elevation_deg, rain_rate, ElevationNoise::Realistic)?;
        let l = self.rain_path_km(elevation_deg)?;
        let slope = self.band.k_bar
            * self.band.alpha_bar
            * rain_rate.powf(self.band.alpha_bar - 1.0)
            * l;
        let j = (self.k_subcarriers as f64) * slope * slope / (sigma * sigma);
        Ok((1.0 / j).sqrt())
    }
}

/// Anchored effective rain path `L_0 · sin θ_base / sin θ_el`, km.
pub fn leff_of_elevation(elevation_deg: f64, geom: &crate::itu::PathGeometry) -> Result<f64> {
    if !(elevation_deg > 0.0 && elevation_deg <= 90.0) {
        return Err(Error::Domain(format!("elevation must lie in (0, 90], got {elevation_deg}")));
    }
    Ok(geom.base_rain_path_km * geom.base_elevation_deg.to_radians().sin()
        / elevation_deg.to_radians().sin())
}

/// Free-space SNR scaling `γ(θ) = γ0 · sin²θ / sin²θ_base`, linear.
pub fn snr_of_elevation(elevation_deg: f64, clear_sky_snr: f64, base_elevation_deg: f64) -> Result<f64> {
    if !(elevation_deg > 0.0 && elevation_deg <= 90.0) {
        return Err(Error::Domain(format!("elevation must lie in (0, 90], got {elevation_deg}")));
    }
    let ratio = elevation_deg.to_radians().sin() / base_elevation_deg.to_radians().sin();
    Ok(clear_sky_snr * ratio * ratio)
}

/// Minimum detectable rain rate at an elevation, mm/h.
pub fn rmin_of_elevation(elevation_deg: f64, model: &ElevationModel, mode: ElevationNoise) -> Result<f64> {
    let sigma = model.sigma_at(elevation_deg, 0.0, mode)?;
    let l_eff = model.rain_path_km(elevation_deg)?;
    Ok(rmin_closed_form(sigma, model.k_subcarriers, &model.band, l_eff))
}

/// Closed-form sensing-optimal elevation, degrees. Reports 90° when the
/// optimal SNR level is unreachable (no interior optimum).
pub fn sensing_optimal_elevation_closed(link: &LinkConfig) -> Result<f64> {
    if !(link.clear_sky_snr > 0.0) {
        return Err(Error::Domain("clear-sky SNR must be positive".into()));
    }
    let np = f64::from(link.n_pilots());
    let x_star = 1.0 + (1.0 + np * link.noise.sigma_sys_db.powi(2) / C0).sqrt();
    let beta_star = 1.0 / (x_star - 1.0);
    let sin_star =
        link.geometry.base_elevation_deg.to_radians().sin() * (beta_star / link.clear_sky_snr).sqrt();
    if sin_star >= 1.0 {
        return Ok(90.0);
    }
    Ok(sin_star.asin().to_degrees())
}

/// Golden-section minimizer of a unimodal scalar function on `[lo, hi]`.
pub fn golden_section_min<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Numeric sensing-optimal elevation: coarse unimodality scan followed by
/// golden-section refinement to 0.05°.
pub fn sensing_optimal_elevation_numeric(model: &ElevationModel, mode: ElevationNoise) -> Result<f64> {
    let f = |theta: f64| rmin_of_elevation(theta, model, mode);
    let n = 86;
    let thetas: Vec<f64> = (0..n).map(|i| 5.0 + 85.0 * i as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = thetas.iter().map(|&t| f(t)).collect::<Result<_>>()?;
    let mut descents = 0;
    let mut last_dir = 0i8;
    for w in values.windows(2) {
        let dir = if w[1] > w[0] { 1 } else { -1 };
        if dir == 1 && last_dir == -1 {
            descents += 1;
        }
        if dir == -1 && last_dir == 1 {
            return Err(Error::Numeric("elevation profile is not unimodal".into()));
        }
        last_dir = dir;
    }
    if descents > 1 {
        return Err(Error::Numeric("elevation profile has multiple minima".into()));
    }
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let lo = thetas[best.saturating_sub(1)];
    let hi = thetas[(best + 1).min(thetas.len() - 1)];
    golden_section_min(f, lo, hi, 0.05)
}

/// One elevation of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub elevation_deg: f64,
    pub rmin_realistic: f64,
    pub rmin_constant_noise: f64,
    /// Below the P.618 validity floor: values are extrapolated.
    pub extrapolation_zone: bool,
}

/// R_min profile over elevation with both noise treatments.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationSweep {
    pub points: Vec<SweepPoint>,
    pub p618_floor_deg: f64,
    pub terminal_floor_deg: f64,
}

pub fn elevation_sweep(model: &ElevationModel, elevations: &[f64]) -> Result<ElevationSweep> {
    let p618_floor = 15.0;
    let points = elevations
        .iter()
        .map(|&theta| {
            Ok(SweepPoint {
                elevation_deg: theta,
                rmin_realistic: rmin_of_elevation(theta, model, ElevationNoise::Realistic)?,
                rmin_constant_noise: rmin_of_elevation(theta, model, ElevationNoise::ConstantNoise)?,
                extrapolation_zone: theta < p618_floor,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ElevationSweep { points, p618_floor_deg: p618_floor, terminal_floor_deg: 20.0 })
}

/// Sensing- vs communication-optimal elevation at one rain rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusPoint {
    pub rain_rate: f64,
    pub theta_sensing_deg: f64,
    pub theta_comm_deg: f64,
    pub gap_deg: f64,
}

/// Optimal-elevation locus over a rain-rate grid. The sensing optimum
/// minimizes the operating-point bound RMSE over the capped range
/// `[15°, 90°]` with rain-degraded SNR; the communication optimum
/// maximizes spectral efficiency over the same range.
pub fn optimal_locus(model: &ElevationModel, rain_rates: &[f64]) -> Result<Vec<LocusPoint>> {
    let cap_lo = 15.0;
    let cap_hi = 90.0;
    let mut out = Vec::with_capacity(rain_rates.len());
    for &r in rain_rates {
        if !(r > 0.0) {
            return Err(Error::Domain("locus rain rates must be positive".into()));
        }
        let theta_sens = grid_then_golden(|t| model.bound_rmse_at(t, r), cap_lo, cap_hi)?;
        let comm_objective = |t: f64| -> Result<f64> {
            let snr = model.snr_at(t, r)?;
            Ok(-rate::spectral_efficiency(model.link.pilot_fraction, model.link.n_sym, snr)?)
        };
        let theta_comm = grid_then_golden(comm_objective, cap_lo, cap_hi)?;
        out.push(LocusPoint {
            rain_rate: r,
            theta_sensing_deg: theta_sens,
            theta_comm_deg: theta_comm,
            gap_deg: theta_comm - theta_sens,
        });
    }
    Ok(out)
}

fn grid_then_golden<F>(f: F, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = 76;
    let mut best = (lo, f(lo)?);
    for i in 1..n {
        let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = f(t)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    let step = (hi - lo) / (n - 1) as f64;
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    golden_section_min(f, a, b, 0.05)
}
