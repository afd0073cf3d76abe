//! Slant-path attenuation physics.
//!
//! Total excess attenuation decomposes into four addends,
//!
//! ```text
//! A_tot(f) = k(f)·R^α(f)·L_eff  +  γ_g(f, ρ_wv)·L_g  +  K_l(f)·M_c·L_c  +  G,
//! ```
//!
//! with P.838-3 rain power-law coefficients, a simplified gaseous absorption
//! model (single 22.235 GHz water-vapor line plus continuum over an oxygen
//! floor), a single-Debye Rayleigh cloud coefficient, and a dB offset `G`.
//! The module also provides the sensitivity (gradient) matrix of `A_tot`
//! with respect to the atmospheric state, which feeds all Fisher-information
//! computations.
//!
//! Two rain-path conventions are supported: the P.618 reduction factor
//! applied to the geometric slant path, and an anchored mode that scales a
//! reference path with elevation (`L_0·sin θ_base / sin θ_el`). The anchored
//! mode is the one used by every table/geometry reproduction.

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Electric-field polarization of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Horizontal,
    Vertical,
}

/// P.838 power-law pair `(k, α)` so that `γ_R = k·R^α` in dB/km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P838Coefficients {
    pub k_coef: f64,
    pub alpha: f64,
}

impl P838Coefficients {
    pub fn new(k_coef: f64, alpha: f64) -> Result<Self> {
        if !(k_coef > 0.0) {
            return Err(Error::Domain(format!("k coefficient must be positive, got {k_coef}")));
        }
        if !(alpha > 0.5 && alpha < 2.0) {
            return Err(Error::Domain(format!("alpha must lie in (0.5, 2.0), got {alpha}")));
        }
        Ok(P838Coefficients { k_coef, alpha })
    }

    /// Specific rain attenuation `k·R^α` in dB/km.
    pub fn specific_attenuation(&self, rain_rate: f64) -> f64 {
        if rain_rate == 0.0 {
            return 0.0;
        }
        self.k_coef * rain_rate.powf(self.alpha)
    }
}

/// The K subcarrier frequencies of the sensing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    frequencies: Vec<f64>,
    pub polarization: Polarization,
}

impl FrequencyGrid {
    pub fn new(frequencies: Vec<f64>, polarization: Polarization) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::Domain("frequency grid must be non-empty".into()));
        }
        for w in frequencies.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain("frequencies must be strictly increasing".into()));
            }
        }
        if frequencies.iter().any(|f| !(*f >= 1.0 && *f <= 100.0)) {
            return Err(Error::Domain("frequencies must lie in [1, 100] GHz".into()));
        }
        Ok(FrequencyGrid { frequencies, polarization })
    }

    /// `K` evenly spaced subcarriers across the Ku downlink band
    /// 10.7–12.7 GHz, horizontal polarization.
    pub fn ku(k: usize) -> Self {
        let freqs = even_grid(10.7, 12.7, k);
        FrequencyGrid { frequencies: freqs, polarization: Polarization::Horizontal }
    }

    /// The default 5-subcarrier Ku grid.
    pub fn ku_default() -> Self {
        Self::ku(5)
    }

    /// Ku grid extended with Ka-band subcarriers over 17.7–20.2 GHz.
    pub fn ku_plus_ka(k_ku: usize, k_ka: usize) -> Self {
        let mut freqs = even_grid(10.7, 12.7, k_ku);
        freqs.extend(even_grid(17.7, 20.2, k_ka));
        FrequencyGrid { frequencies: freqs, polarization: Polarization::Horizontal }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Band-center frequency (midpoint of the grid extremes).
    pub fn center(&self) -> f64 {
        0.5 * (self.frequencies[0] + self.frequencies[self.frequencies.len() - 1])
    }
}

fn even_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    assert!(k >= 1);
    if k == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

/// Atmospheric parameter vector `θ = [R, ρ_wv, M_c, G]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericState {
    /// Rain rate, mm/h.
    pub rain_rate: f64,
    /// Water-vapor density, g/m³.
    pub water_vapor: f64,
    /// Cloud liquid-water content, g/m³.
    pub cloud_lwc: f64,
    /// Calibration offset, dB.
    pub offset_db: f64,
}

impl AtmosphericState {
    pub fn new(rain_rate: f64, water_vapor: f64, cloud_lwc: f64, offset_db: f64) -> Result<Self> {
        if !(rain_rate >= 0.0) {
            return Err(Error::Domain(format!("rain rate must be >= 0, got {rain_rate}")));
        }
        if !(water_vapor >= 0.0) {
            return Err(Error::Domain(format!("water vapor must be >= 0, got {water_vapor}")));
        }
        if !(cloud_lwc >= 0.0) {
            return Err(Error::Domain(format!("cloud LWC must be >= 0, got {cloud_lwc}")));
        }
        if !offset_db.is_finite() {
            return Err(Error::Domain("offset must be finite".into()));
        }
        Ok(AtmosphericState { rain_rate, water_vapor, cloud_lwc, offset_db })
    }

    /// Rain-only state with zero nuisance terms.
    pub fn rain_only(rain_rate: f64) -> Self {
        AtmosphericState { rain_rate, water_vapor: 0.0, cloud_lwc: 0.0, offset_db: 0.0 }
    }
}

/// How the effective rain path is obtained from the slant geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RainPathMode {
    /// `L_eff = L_0 · sin θ_base / sin θ_el`; rain-rate independent.
    #[default]
    Anchored,
    /// `L_eff = L_s · r_eff` with the P.618 horizontal reduction factor.
    P618,
}

/// Earth–space slant geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    /// Elevation angle, degrees.
    pub elevation_deg: f64,
    /// Rain height, km.
    pub rain_height_km: f64,
    /// Effective gaseous absorption path, km.
    pub gas_path_km: f64,
    /// Effective cloud-layer path, km.
    pub cloud_path_km: f64,
    /// Anchor elevation for the scaled rain path, degrees.
    pub base_elevation_deg: f64,
    /// Effective rain path at the anchor elevation, km.
    pub base_rain_path_km: f64,
    pub rain_path_mode: RainPathMode,
}

impl PathGeometry {
    pub fn new(
        elevation_deg: f64,
        rain_height_km: f64,
        gas_path_km: f64,
        cloud_path_km: f64,
        base_elevation_deg: f64,
        base_rain_path_km: f64,
        rain_path_mode: RainPathMode,
    ) -> Result<Self> {
        if !(5.0..=90.0).contains(&elevation_deg) {
            return Err(Error::Domain(format!("elevation must lie in [5, 90] deg, got {elevation_deg}")));
        }
        if !(rain_height_km > 0.0) {
            return Err(Error::Domain("rain height must be positive".into()));
        }
        if !(base_rain_path_km > 0.0) {
            return Err(Error::Domain("base rain path must be positive".into()));
        }
        Ok(PathGeometry {
            elevation_deg,
            rain_height_km,
            gas_path_km,
            cloud_path_km,
            base_elevation_deg,
            base_rain_path_km,
            rain_path_mode,
        })
    }

    /// Reference geometry: 38° elevation, 3.1 km rain height, 10 km gas
    /// path, 2 km cloud path, anchored 3 km rain path.
    pub fn reference() -> Self {
        PathGeometry {
            elevation_deg: 38.0,
            rain_height_km: 3.1,
            gas_path_km: 10.0,
            cloud_path_km: 2.0,
            base_elevation_deg: 38.0,
            base_rain_path_km: 3.0,
            rain_path_mode: RainPathMode::Anchored,
        }
    }

    pub fn at_elevation(&self, elevation_deg: f64) -> Self {
        PathGeometry { elevation_deg, ..*self }
    }

    /// Geometric slant path `L_s = h_R / sin θ_el`, km.
    pub fn slant_path_km(&self) -> f64 {
        self.rain_height_km / self.elevation_deg.to_radians().sin()
    }

    /// Horizontal projection `L_G = L_s · cos θ_el`, km.
    pub fn horizontal_projection_km(&self) -> f64 {
        self.slant_path_km() * self.elevation_deg.to_radians().cos()
    }

    /// Anchored effective rain path `L_0 · sin θ_base / sin θ_el`, km.
    pub fn anchored_rain_path_km(&self) -> Result<f64> {
        if !(self.elevation_deg > 0.0) {
            return Err(Error::Domain("elevation must be positive".into()));
        }
        Ok(self.base_rain_path_km * self.base_elevation_deg.to_radians().sin()
            / self.elevation_deg.to_radians().sin())
    }

    /// Effective rain path in the configured mode, km.
    pub fn effective_rain_path_km(&self, gamma_r: f64, f_ghz: f64) -> Result<f64> {
        match self.rain_path_mode {
            RainPathMode::Anchored => self.anchored_rain_path_km(),
            RainPathMode::P618 => p618_effective_path(self, gamma_r, f_ghz),
        }
    }

    /// Gas and cloud paths scaled from the anchor elevation with the same
    /// `sin θ_base / sin θ_el` leverage as the rain path.
    pub fn gas_path_at_elevation_km(&self) -> f64 {
        self.gas_path_km * self.base_elevation_deg.to_radians().sin()
            / self.elevation_deg.to_radians().sin()
    }
}

// ---------------------------------------------------------------------------
// ITU-R P.838-3 regression
// ---------------------------------------------------------------------------

struct P838Fit {
    terms: &'static [(f64, f64, f64)],
    m: f64,
    c: f64,
}

// log10 k = Σ a_j exp(-((log10 f - b_j)/c_j)^2) + m_k log10 f + c_k
const KH_FIT: P838Fit = P838Fit {
    terms: &[
        (-5.33980, -0.10008, 1.13098),
        (-0.35351, 1.26970, 0.45400),
        (-0.23789, 0.86036, 0.15354),
        (-0.94158, 0.64552, 0.16817),
    ],
    m: -0.18961,
    c: 0.71147,
};

const KV_FIT: P838Fit = P838Fit {
    terms: &[
        (-3.80595, 0.56934, 0.81061),
        (-3.44965, -0.22911, 0.51059),
        (-0.39902, 0.73042, 0.11899),
        (0.50167, 1.07319, 0.27195),
    ],
    m: -0.16398,
    c: 0.63297,
};

// α = Σ a_j exp(-((log10 f - b_j)/c_j)^2) + m_α log10 f + c_α
const AH_FIT: P838Fit = P838Fit {
    terms: &[
        (-0.14318, 1.82442, -0.55187),
        (0.29591, 0.77564, 0.19822),
        (0.32177, 0.63773, 0.13164),
        (-5.37610, -0.96230, 1.47828),
        (16.1721, -3.29980, 3.43990),
    ],
    m: 0.67849,
    c: -1.95537,
};

const AV_FIT: P838Fit = P838Fit {
    terms: &[
        (-0.07771, 2.33840, -0.76284),
        (0.56727, 0.95545, 0.54039),
        (-0.20238, 1.14520, 0.26809),
        (-48.2991, 0.791669, 0.116226),
        (48.5833, 0.791459, 0.116479),
    ],
    m: -0.053739,
    c: 0.83433,
};

fn eval_fit(fit: &P838Fit, log_f: f64) -> f64 {
    let mut s = fit.m * log_f + fit.c;
    for &(a, b, c) in fit.terms {
        let t = (log_f - b) / c;
        s += a * (-t * t).exp();
    }
    s
}

/// P.838-3 rain power-law coefficients from the embedded regression.
pub fn p838_coefficients(f_ghz: f64, polarization: Polarization) -> Result<P838Coefficients> {
    if !(1.0..=100.0).contains(&f_ghz) {
        return Err(Error::Domain(format!("frequency {f_ghz} GHz outside [1, 100] GHz")));
    }
    let log_f = f_ghz.log10();
    let (k_fit, a_fit) = match polarization {
        Polarization::Horizontal => (&KH_FIT, &AH_FIT),
        Polarization::Vertical => (&KV_FIT, &AV_FIT),
    };
    let k = 10f64.powf(eval_fit(k_fit, log_f));
    let alpha = eval_fit(a_fit, log_f);
    P838Coefficients::new(k, alpha)
}

/// Specific rain attenuation `γ_R = k(f)·R^α(f)` in dB/km (regression
/// coefficients at the grid polarization of `pol`).
pub fn specific_rain_attenuation(f_ghz: f64, rain_rate: f64, pol: Polarization) -> Result<f64> {
    if !(rain_rate >= 0.0) {
        return Err(Error::Domain(format!("rain rate must be >= 0, got {rain_rate}")));
    }
    Ok(p838_coefficients(f_ghz, pol)?.specific_attenuation(rain_rate))
}

/// Optional coefficient override loaded from a plain-text table
/// (`f_GHz,kH,alphaH` per line, `#` comments allowed). Lookups interpolate
/// `k` log-linearly and `α` linearly in `log10 f`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    rows: Vec<(f64, f64, f64)>,
}

impl CoefficientTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::Config(format!(
                    "coefficient table line {}: expected `f_GHz,kH,alphaH`, got `{line}`",
                    lineno + 1
                )));
            }
            let f: f64 = parts[0]
                .parse()
                .map_err(|_| Error::Config(format!("coefficient table line {}: bad frequency", lineno + 1)))?;
            let k: f64 = parts[1]
                .parse()
                .map_err(|_| Error::Config(format!("coefficient table line {}: bad k", lineno + 1)))?;
            let a: f64 = parts[2]
                .parse()
                .map_err(|_| Error::Config(format!("coefficient table line {}: bad alpha", lineno + 1)))?;
            rows.push((f, k, a));
        }
        if rows.len() < 2 {
            return Err(Error::Config("coefficient table needs at least two rows".into()));
        }
        for w in rows.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Config("coefficient table frequencies must be strictly increasing".into()));
            }
        }
        Ok(CoefficientTable { rows })
    }

    pub fn coefficients(&self, f_ghz: f64) -> Result<P838Coefficients> {
        let rows = &self.rows;
        if f_ghz < rows[0].0 || f_ghz > rows[rows.len() - 1].0 {
            return Err(Error::Domain(format!(
                "frequency {f_ghz} GHz outside table range [{}, {}]",
                rows[0].0,
                rows[rows.len() - 1].0
            )));
        }
        let hi = rows.iter().position(|r| r.0 >= f_ghz).unwrap();
        if rows[hi].0 == f_ghz || hi == 0 {
            return P838Coefficients::new(rows[hi].1, rows[hi].2);
        }
        let lo = hi - 1;
        let t = (f_ghz.ln() - rows[lo].0.ln()) / (rows[hi].0.ln() - rows[lo].0.ln());
        let k = (rows[lo].1.ln() + t * (rows[hi].1.ln() - rows[lo].1.ln())).exp();
        let a = rows[lo].2 + t * (rows[hi].2 - rows[lo].2);
        P838Coefficients::new(k, a)
    }
}

/// Which P.838 coefficients the attenuation model feeds to each subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum P838Mode {
    /// Per-subcarrier regression coefficients.
    PerSubcarrier,
    /// One `(k̄, ᾱ)` pair — the arithmetic grid mean of the regression
    /// coefficients — applied at every subcarrier.
    #[default]
    BandAverage,
}

/// Attenuation model: coefficient mode plus optional file override.
#[derive(Debug, Clone, Default)]
pub struct AttenuationModel {
    pub mode: P838Mode,
    pub table: Option<CoefficientTable>,
}

impl AttenuationModel {
    pub fn band_average() -> Self {
        AttenuationModel { mode: P838Mode::BandAverage, table: None }
    }

    pub fn per_subcarrier() -> Self {
        AttenuationModel { mode: P838Mode::PerSubcarrier, table: None }
    }

    fn raw_coefficients(&self, f_ghz: f64, pol: Polarization) -> Result<P838Coefficients> {
        match &self.table {
            Some(t) => {
                if pol != Polarization::Horizontal {
                    return Err(Error::Config("coefficient table overrides carry H-pol values only".into()));
                }
                t.coefficients(f_ghz)
            }
            None => p838_coefficients(f_ghz, pol),
        }
    }

    /// Per-subcarrier coefficients honoring the mode.
    pub fn coefficients(&self, grid: &FrequencyGrid) -> Result<Vec<P838Coefficients>> {
        let per: Vec<P838Coefficients> = grid
            .frequencies()
            .iter()
            .map(|&f| self.raw_coefficients(f, grid.polarization))
            .collect::<Result<_>>()?;
        match self.mode {
            P838Mode::PerSubcarrier => Ok(per),
            P838Mode::BandAverage => {
                let n = per.len() as f64;
                let k_bar = per.iter().map(|c| c.k_coef).sum::<f64>() / n;
                let a_bar = per.iter().map(|c| c.alpha).sum::<f64>() / n;
                let avg = P838Coefficients::new(k_bar, a_bar)?;
                Ok(vec![avg; per.len()])
            }
        }
    }

    /// Grid-mean `(k̄, ᾱ)` of the regression coefficients, irrespective of
    /// the mode.
    pub fn band_average_coefficients(&self, grid: &FrequencyGrid) -> Result<P838Coefficients> {
        let per: Vec<P838Coefficients> = grid
            .frequencies()
            .iter()
            .map(|&f| self.raw_coefficients(f, grid.polarization))
            .collect::<Result<_>>()?;
        let n = per.len() as f64;
        P838Coefficients::new(
            per.iter().map(|c| c.k_coef).sum::<f64>() / n,
            per.iter().map(|c| c.alpha).sum::<f64>() / n,
        )
    }
}

// ---------------------------------------------------------------------------
// P.618 path reduction
// ---------------------------------------------------------------------------

/// P.618 horizontal reduction factor
/// `r_eff = 1 / (1 + 0.78·√(L_G·γ_R/f) − 0.38·(1 − e^{−2 L_G}))`.
pub fn p618_reduction_factor(geom: &PathGeometry, gamma_r: f64, f_ghz: f64) -> Result<f64> {
    if !(geom.elevation_deg > 0.0) {
        return Err(Error::Domain("elevation must be positive".into()));
    }
    if !(gamma_r >= 0.0) {
        return Err(Error::Domain("specific attenuation must be >= 0".into()));
    }
    let lg = geom.horizontal_projection_km();
    let denom = 1.0 + 0.78 * (lg * gamma_r / f_ghz).sqrt() - 0.38 * (1.0 - (-2.0 * lg).exp());
    if !(denom > 0.0) {
        return Err(Error::Numeric("P.618 reduction factor denominator not positive".into()));
    }
    Ok(1.0 / denom)
}

/// Effective rain path `L_eff = L_s · r_eff` in km.
pub fn p618_effective_path(geom: &PathGeometry, gamma_r: f64, f_ghz: f64) -> Result<f64> {
    Ok(geom.slant_path_km() * p618_reduction_factor(geom, gamma_r, f_ghz)?)
}

// ---------------------------------------------------------------------------
// Simplified gaseous absorption (water-vapor line + continuum over an
// oxygen floor)
// ---------------------------------------------------------------------------

const WV_LINE_GHZ: f64 = 22.235;
const WV_LINE_WIDTH_GHZ: f64 = 2.1;
const WV_LINE_GAIN: f64 = 0.16; // dB/km per g/m³ at line center (shape-normalized)
const WV_CONTINUUM_GAIN: f64 = 0.0057; // dB/km per g/m³ at the line frequency

fn wv_line_shape(f_ghz: f64) -> f64 {
    let d2 = WV_LINE_WIDTH_GHZ * WV_LINE_WIDTH_GHZ;
    let ratio = f_ghz / WV_LINE_GHZ;
    ratio
        * ratio
        * (d2 / ((f_ghz - WV_LINE_GHZ).powi(2) + d2) + d2 / ((f_ghz + WV_LINE_GHZ).powi(2) + d2))
}

/// Oxygen absorption floor, dB/km.
pub fn oxygen_specific_attenuation(f_ghz: f64) -> f64 {
    0.0062 + 2.1e-5 * f_ghz * f_ghz
}

/// Gaseous specific attenuation `γ_g(f, ρ_wv)` in dB/km.
pub fn gas_specific_attenuation(f_ghz: f64, water_vapor: f64) -> Result<f64> {
    if !(1.0..=100.0).contains(&f_ghz) {
        return Err(Error::Domain(format!("frequency {f_ghz} GHz outside [1, 100] GHz")));
    }
    if !(water_vapor >= 0.0) {
        return Err(Error::Domain("water vapor must be >= 0".into()));
    }
    Ok(oxygen_specific_attenuation(f_ghz) + water_vapor * gas_vapor_slope(f_ghz))
}

/// `∂γ_g/∂ρ_wv`, dB/km per g/m³ — independent of `ρ_wv` in this model.
pub fn gas_vapor_slope(f_ghz: f64) -> f64 {
    let ratio = f_ghz / WV_LINE_GHZ;
    WV_LINE_GAIN * wv_line_shape(f_ghz) + WV_CONTINUUM_GAIN * ratio * ratio
}

// ---------------------------------------------------------------------------
// Single-Debye Rayleigh cloud coefficient
// ---------------------------------------------------------------------------

const CLOUD_EPS_STATIC: f64 = 80.0;
const CLOUD_EPS_INF: f64 = 5.5;
const CLOUD_RELAX_GHZ: f64 = 9.6;

/// Cloud attenuation coefficient `K_l(f)` in dB/km per g/m³.
pub fn cloud_coefficient(f_ghz: f64) -> Result<f64> {
    if !(1.0..=100.0).contains(&f_ghz) {
        return Err(Error::Domain(format!("frequency {f_ghz} GHz outside [1, 100] GHz")));
    }
    let x = f_ghz / CLOUD_RELAX_GHZ;
    let denom = 1.0 + x * x;
    let eps_re = CLOUD_EPS_INF + (CLOUD_EPS_STATIC - CLOUD_EPS_INF) / denom;
    let eps_im = x * (CLOUD_EPS_STATIC - CLOUD_EPS_INF) / denom;
    let eta = (2.0 + eps_re) / eps_im;
    Ok(0.819 * f_ghz / (eps_im * (1.0 + eta * eta)))
}

// ---------------------------------------------------------------------------
// Total attenuation and sensitivities
// ---------------------------------------------------------------------------

/// The four addends of the total excess attenuation, dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuationTerms {
    pub rain_db: f64,
    pub gas_db: f64,
    pub cloud_db: f64,
    pub offset_db: f64,
}

impl AttenuationTerms {
    pub fn total_db(&self) -> f64 {
        self.rain_db + self.gas_db + self.cloud_db + self.offset_db
    }
}

/// Decomposed excess attenuation at one subcarrier.
pub fn attenuation_terms(
    model: &AttenuationModel,
    f_ghz: f64,
    state: &AtmosphericState,
    geom: &PathGeometry,
    pol: Polarization,
) -> Result<AttenuationTerms> {
    let coeff = model.raw_coefficients(f_ghz, pol)?;
    attenuation_terms_with(&coeff, f_ghz, state, geom)
}

fn attenuation_terms_with(
    coeff: &P838Coefficients,
    f_ghz: f64,
    state: &AtmosphericState,
    geom: &PathGeometry,
) -> Result<AttenuationTerms> {
    let gamma_r = coeff.specific_attenuation(state.rain_rate);
    let l_eff = geom.effective_rain_path_km(gamma_r, f_ghz)?;
    Ok(AttenuationTerms {
        rain_db: gamma_r * l_eff,
        gas_db: gas_specific_attenuation(f_ghz, state.water_vapor)? * geom.gas_path_km,
        cloud_db: cloud_coefficient(f_ghz)? * state.cloud_lwc * geom.cloud_path_km,
        offset_db: state.offset_db,
    })
}

/// Total excess attenuation at one subcarrier, dB.
pub fn total_attenuation(
    model: &AttenuationModel,
    f_ghz: f64,
    state: &AtmosphericState,
    geom: &PathGeometry,
    pol: Polarization,
) -> Result<f64> {
    Ok(attenuation_terms(model, f_ghz, state, geom, pol)?.total_db())
}

/// Attenuation vector `a(θ)` over the whole grid, dB.
pub fn attenuation_vector(
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    state: &AtmosphericState,
    geom: &PathGeometry,
) -> Result<Vec<f64>> {
    let coeffs = model.coefficients(grid)?;
    grid.frequencies()
        .iter()
        .zip(coeffs.iter())
        .map(|(&f, c)| Ok(attenuation_terms_with(c, f, state, geom)?.total_db()))
        .collect()
}

/// One atmospheric parameter, in the canonical ordering of the state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    RainRate,
    WaterVapor,
    CloudLwc,
    Offset,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::RainRate, Param::WaterVapor, Param::CloudLwc, Param::Offset];

    pub fn label(&self) -> &'static str {
        match self {
            Param::RainRate => "R",
            Param::WaterVapor => "rho_wv",
            Param::CloudLwc => "M_c",
            Param::Offset => "G",
        }
    }
}

/// Subset of parameters whose sensitivity columns are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSet {
    pub rain: bool,
    pub water_vapor: bool,
    pub cloud: bool,
    pub offset: bool,
}

impl ParamSet {
    pub fn rain_only() -> Self {
        ParamSet { rain: true, water_vapor: false, cloud: false, offset: false }
    }

    pub fn all() -> Self {
        ParamSet { rain: true, water_vapor: true, cloud: true, offset: true }
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = Vec::new();
        if self.rain {
            p.push(Param::RainRate);
        }
        if self.water_vapor {
            p.push(Param::WaterVapor);
        }
        if self.cloud {
            p.push(Param::CloudLwc);
        }
        if self.offset {
            p.push(Param::Offset);
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        !(self.rain || self.water_vapor || self.cloud || self.offset)
    }
}

/// Sensitivity matrix `[∂A_tot(f_k)/∂θ_i]`, K rows × |subset| columns,
/// columns in canonical parameter order.
///
/// The rain derivative treats `L_eff` as rain-independent (exact in
/// anchored mode; in P.618 mode the reduction factor is frozen at the
/// state's own rain rate).
pub fn sensitivity_matrix(
    model: &AttenuationModel,
    state: &AtmosphericState,
    grid: &FrequencyGrid,
    geom: &PathGeometry,
    subset: ParamSet,
) -> Result<Matrix> {
    if subset.is_empty() {
        return Err(Error::Domain("sensitivity subset must name at least one parameter".into()));
    }
    let coeffs = model.coefficients(grid)?;
    if subset.rain && state.rain_rate < 1e-6 {
        // At R = 0 the rain column is exactly zero only when every α > 1
        // (band-average mode); otherwise the derivative is ill-conditioned
        // near the boundary.
        let degenerate_ok =
            model.mode == P838Mode::BandAverage && coeffs.iter().all(|c| c.alpha > 1.0);
        if !degenerate_ok {
            return Err(Error::Domain(
                "rain sensitivity requires R >= 1e-6 mm/h (conditioning at the R = 0 boundary)".into(),
            ));
        }
    }
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for param in subset.params() {
        let mut col = Vec::with_capacity(grid.len());
        for (&f, c) in grid.frequencies().iter().zip(coeffs.iter()) {
            let v = match param {
                Param::RainRate => {
                    let gamma_r = c.specific_attenuation(state.rain_rate);
                    let l_eff = geom.effective_rain_path_km(gamma_r, f)?;
                    if state.rain_rate == 0.0 {
                        0.0
                    } else {
                        c.k_coef * c.alpha * state.rain_rate.powf(c.alpha - 1.0) * l_eff
                    }
                }
                Param::WaterVapor => gas_vapor_slope(f) * geom.gas_path_km,
                Param::CloudLwc => cloud_coefficient(f)? * geom.cloud_path_km,
                Param::Offset => 1.0,
            };
            col.push(v);
        }
        columns.push(col);
    }
    let m = Matrix::from_columns(&columns);
    if !m.is_finite() {
        return Err(Error::Numeric("non-finite sensitivity entries".into()));
    }
    Ok(m)
}
