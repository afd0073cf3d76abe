//! Fisher information and estimation bounds.
//!
//! Under the dB-domain Gaussian observation model `â = a(θ) + n`,
//! `n ~ N(0, σ_n² I)`, the Fisher information matrix is `J = σ_n⁻² GᵀG`
//! with `G` the attenuation sensitivity matrix. This module builds the
//! standard (rain-only) CRB, the joint CRB via the Schur complement, the
//! Bayesian bound `1/(N·G_T·J_D + J_P)` with the closed-form log-normal
//! prior information, the minimum detectable rain rate (unit relative
//! error), identifiability diagnostics (condition number, gradient
//! coherence, side-information hierarchy) and the sensing–throughput
//! Pareto frontier.

use crate::itu::{
    sensitivity_matrix, AtmosphericState, AttenuationModel, FrequencyGrid, P838Coefficients,
    Param, ParamSet, PathGeometry,
};
use crate::linalg::{self, Matrix};
use crate::rate;
use crate::{Error, LinkConfig, Result, C0};

/// Band-averaged power-law pair `(k̄, ᾱ)` used by closed-form expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandStats {
    pub k_bar: f64,
    pub alpha_bar: f64,
}

impl BandStats {
    /// Nominal Ku-band H-pol averages.
    pub const fn nominal_ku() -> Self {
        BandStats { k_bar: 0.022, alpha_bar: 1.19 }
    }

    pub fn from_coefficients(c: &P838Coefficients) -> Self {
        BandStats { k_bar: c.k_coef, alpha_bar: c.alpha }
    }

    /// Mean attenuation `k̄·R^ᾱ·L_eff` at rain rate `R`, dB.
    pub fn mean_attenuation_db(&self, rain_rate: f64, l_eff_km: f64) -> f64 {
        if rain_rate == 0.0 {
            return 0.0;
        }
        self.k_bar * rain_rate.powf(self.alpha_bar) * l_eff_km
    }
}

/// dB-domain observation noise: chi-squared pilot-averaging term plus a
/// systematic floor, or a fixed override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Systematic noise floor, dB.
    pub sigma_sys_db: f64,
    /// Pilot symbols averaged per estimate.
    pub pilot_count: u32,
    /// Per-subcarrier SNR, linear.
    pub snr_linear: f64,
    /// When present, the total noise std is this value, dB.
    pub fixed_sigma_db: Option<f64>,
}

impl NoiseModel {
    pub fn fixed(sigma_db: f64) -> Self {
        NoiseModel { sigma_sys_db: 0.63, pilot_count: 30, snr_linear: 10.0, fixed_sigma_db: Some(sigma_db) }
    }

    pub fn pilot(pilot_count: u32, snr_linear: f64, sigma_sys_db: f64) -> Self {
        NoiseModel { sigma_sys_db, pilot_count, snr_linear, fixed_sigma_db: None }
    }

    /// Noise variance `σ_n² = c0/N_p (1 + 1/γ)² + σ_sys²`, dB².
    pub fn variance_db2(&self) -> Result<f64> {
        if let Some(s) = self.fixed_sigma_db {
            if !(s > 0.0) {
                return Err(Error::Domain(format!("fixed noise std must be positive, got {s}")));
            }
            return Ok(s * s);
        }
        if self.pilot_count == 0 {
            return Err(Error::Domain("pilot count must be >= 1".into()));
        }
        if !(self.snr_linear > 0.0) {
            return Err(Error::Domain("SNR must be positive".into()));
        }
        let est = C0 / f64::from(self.pilot_count) * (1.0 + 1.0 / self.snr_linear).powi(2);
        Ok(est + self.sigma_sys_db * self.sigma_sys_db)
    }

    pub fn sigma_db(&self) -> Result<f64> {
        Ok(self.variance_db2()?.sqrt())
    }
}

/// Log-normal rain prior with first-order Gauss–Markov temporal structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RainPrior {
    /// Mean rain rate during events, mm/h.
    pub mean_rate: f64,
    /// Coefficient of variation.
    pub coeff_variation: f64,
    /// `σ_ln = √ln(1 + c_v²)`.
    pub sigma_ln: f64,
    /// `μ_ln = ln R̄ − σ_ln²/2`.
    pub mu_ln: f64,
    /// Lag-1 autocorrelation of `ln R` at 1-min resolution.
    pub temporal_rho: f64,
}

impl RainPrior {
    pub fn new(mean_rate: f64, coeff_variation: f64, temporal_rho: f64) -> Result<Self> {
        if !(mean_rate > 0.0) {
            return Err(Error::Domain("mean rain rate must be positive".into()));
        }
        if !(coeff_variation > 0.0) {
            return Err(Error::Domain("coefficient of variation must be positive".into()));
        }
        if !(0.0..1.0).contains(&temporal_rho) {
            return Err(Error::Domain("temporal correlation must lie in [0, 1)".into()));
        }
        let sigma_ln = (1.0 + coeff_variation * coeff_variation).ln().sqrt();
        let mu_ln = mean_rate.ln() - 0.5 * sigma_ln * sigma_ln;
        Ok(RainPrior { mean_rate, coeff_variation, sigma_ln, mu_ln, temporal_rho })
    }

    /// Campaign-fitted prior: `R̄ = 5.2` mm/h, `c_v = 1.05`, `ρ = 0.95`.
    pub fn reference() -> Self {
        RainPrior::new(5.2, 1.05, 0.95).expect("reference prior is valid")
    }

    /// Mode of the log-normal density, `exp(μ_ln − σ_ln²)`.
    pub fn mode(&self) -> f64 {
        (self.mu_ln - self.sigma_ln * self.sigma_ln).exp()
    }
}

/// One bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    /// Per-link data Fisher information, mm⁻²h².
    pub j_data: f64,
    /// Prior Fisher information, mm⁻²h².
    pub j_prior: f64,
    /// Temporal information gain `G_T`.
    pub temporal_gain: f64,
    /// Number of fused links.
    pub n_links: u32,
    /// Bound variance, mm²/h².
    pub variance: f64,
    /// Bound RMSE, mm/h.
    pub rmse: f64,
}

/// Fisher information matrix `J = σ_n⁻² GᵀG`.
pub fn fim(g: &Matrix, sigma_db: f64) -> Result<Matrix> {
    if !(sigma_db > 0.0) {
        return Err(Error::Domain("noise std must be positive".into()));
    }
    if !g.is_finite() {
        return Err(Error::Numeric("sensitivity matrix has non-finite entries".into()));
    }
    let j = g.gram().scaled(1.0 / (sigma_db * sigma_db));
    if !j.is_finite() {
        return Err(Error::Numeric("Fisher information has non-finite entries".into()));
    }
    Ok(j)
}

/// Rain-only data information `J_D = σ_n⁻² Σ_k (∂A_k/∂R)²`, mm⁻²h².
pub fn rain_information(
    model: &AttenuationModel,
    state: &AtmosphericState,
    grid: &FrequencyGrid,
    geom: &PathGeometry,
    sigma_db: f64,
) -> Result<f64> {
    let g = sensitivity_matrix(model, state, grid, geom, ParamSet::rain_only())?;
    let j = fim(&g, sigma_db)?;
    Ok(j[(0, 0)])
}

/// Standard CRB for `R` with all nuisance parameters fixed, mm²/h².
pub fn crb_rain_only(
    model: &AttenuationModel,
    state: &AtmosphericState,
    grid: &FrequencyGrid,
    geom: &PathGeometry,
    sigma_db: f64,
) -> Result<f64> {
    if !(state.rain_rate > 0.0) {
        return Err(Error::Domain("rain-only CRB needs R > 0".into()));
    }
    let j = rain_information(model, state, grid, geom, sigma_db)?;
    if !(j > 0.0) {
        return Err(Error::Domain("rain information vanished".into()));
    }
    Ok(1.0 / j)
}

/// Joint CRB for the first (rain) parameter of a partitioned FIM via the
/// Schur complement `[J_RR − j_{Rν}ᵀ J_νν⁻¹ j_{Rν}]⁻¹`.
pub fn crb_joint_schur(j: &Matrix) -> Result<f64> {
    assert_eq!(j.rows, j.cols, "FIM must be square");
    let p = j.rows;
    if p == 0 {
        return Err(Error::Domain("empty FIM".into()));
    }
    if p == 1 {
        if !(j[(0, 0)] > 0.0) {
            return Err(Error::Unidentifiable("scalar information is not positive".into()));
        }
        return Ok(1.0 / j[(0, 0)]);
    }
    let m = p - 1;
    let mut nuisance = Matrix::zeros(m, m);
    let mut cross = vec![0.0; m];
    for i in 0..m {
        cross[i] = j[(i + 1, 0)];
        for k in 0..m {
            nuisance[(i, k)] = j[(i + 1, k + 1)];
        }
    }
    let solved = linalg::solve(&nuisance, &cross)
        .ok_or_else(|| Error::Unidentifiable("nuisance information block is singular".into()))?;
    let mut schur = j[(0, 0)];
    for i in 0..m {
        schur -= cross[i] * solved[i];
    }
    if !(schur > 0.0) || !schur.is_finite() {
        return Err(Error::Unidentifiable(format!(
            "Schur complement {schur} is not positive: rain is inseparable from the nuisance set"
        )));
    }
    Ok(1.0 / schur)
}

/// Condition number `κ = λ_max/λ_min` of a symmetric PSD matrix;
/// `f64::INFINITY` for singular input.
pub fn condition_number(j: &Matrix) -> f64 {
    let eig = linalg::sym_eigenvalues(j);
    let max = eig[eig.len() - 1];
    let min = eig[0];
    if min <= 0.0 || min < max * 1e-300 {
        return f64::INFINITY;
    }
    max / min
}

/// Normalized gradient coherence `|g_aᵀ g_b| / (‖g_a‖ ‖g_b‖)`.
pub fn gradient_coherence(g_a: &[f64], g_b: &[f64]) -> Result<f64> {
    if g_a.len() != g_b.len() {
        return Err(Error::Domain("gradient vectors must have equal length".into()));
    }
    let na = g_a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = g_b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("gradient coherence of a zero vector".into()));
    }
    let dot: f64 = g_a.iter().zip(g_b.iter()).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).abs().min(1.0))
}

/// Closed-form prior Fisher information of the log-normal rain prior,
/// `J_P = (1 + 1/σ_ln²)/R̄² · e^{3σ_ln²}`, mm⁻²h².
pub fn prior_fisher_info(prior: &RainPrior) -> f64 {
    let s2 = prior.sigma_ln * prior.sigma_ln;
    (1.0 + 1.0 / s2) / (prior.mean_rate * prior.mean_rate) * (3.0 * s2).exp()
}

/// Temporal information gain `G_T = (1 − ρ^{2T}) / (1 − ρ²)`.
pub fn temporal_gain(rho: f64, t_snapshots: u32) -> f64 {
    assert!((0.0..1.0).contains(&rho), "rho must lie in [0, 1)");
    assert!(t_snapshots >= 1, "window must have at least one snapshot");
    if rho == 0.0 {
        return 1.0;
    }
    (1.0 - rho.powi(2 * t_snapshots as i32)) / (1.0 - rho * rho)
}

/// Saturation limit `G_∞ = 1/(1 − ρ²)`.
pub fn temporal_gain_infinite(rho: f64) -> f64 {
    1.0 / (1.0 - rho * rho)
}

/// Exact window (in minutes) capturing 95% of the temporal gain,
/// `T₉₅ = ln 0.05 / (2 ln ρ)`.
pub fn t95_exact(rho: f64) -> f64 {
    0.05f64.ln() / (2.0 * rho.ln())
}

/// Bayesian bound with temporal and multi-link pooling:
/// `variance = 1 / (N · G_T · J_D + J_P)`.
pub fn bcrb(j_data: f64, j_prior: f64, temporal_gain: f64, n_links: u32) -> Result<BoundResult> {
    if !(j_data >= 0.0 && j_prior >= 0.0 && temporal_gain >= 0.0) {
        return Err(Error::Domain("information terms must be non-negative".into()));
    }
    let total = f64::from(n_links) * temporal_gain * j_data + j_prior;
    if !(total > 0.0) {
        return Err(Error::Domain("total information is zero".into()));
    }
    let variance = 1.0 / total;
    Ok(BoundResult { j_data, j_prior, temporal_gain, n_links, variance, rmse: variance.sqrt() })
}

/// BCRB-to-CRB variance ratio `1 / (1 + J_P/J_D) ≤ 1`.
pub fn bcrb_crb_ratio(j_data: f64, j_prior: f64) -> f64 {
    assert!(j_data > 0.0, "data information must be positive");
    1.0 / (1.0 + j_prior / j_data)
}

/// Minimum detectable rain rate: the root of `√bound(R) = R` (unit relative
/// error) by bisection on `[1e-3, 1e3]` to `|ΔR| < 1e-6`.
pub fn rmin_solve<F>(bound_fn: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (1e-3, 1e3);
    let eval = |r: f64| -> Result<f64> { Ok(bound_fn(r)?.sqrt() - r) };
    let f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSolution(format!(
            "unit relative error is never crossed on [{lo}, {hi}] (f({lo}) = {f_lo:.3e}, f({hi}) = {f_hi:.3e})"
        )));
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        let f_mid = eval(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form minimum detectable rain rate
/// `R_min = (σ_n² / (K k̄² ᾱ² L_eff²))^{1/(2ᾱ)}`.
pub fn rmin_closed_form(sigma_db: f64, k_subcarriers: usize, band: &BandStats, l_eff_km: f64) -> f64 {
    assert!(sigma_db > 0.0 && k_subcarriers >= 1 && l_eff_km > 0.0);
    let denom = k_subcarriers as f64
        * band.k_bar
        * band.k_bar
        * band.alpha_bar
        * band.alpha_bar
        * l_eff_km
        * l_eff_km;
    (sigma_db * sigma_db / denom).powf(1.0 / (2.0 * band.alpha_bar))
}

/// Wideband information gain `CRB⁽¹⁾/CRB⁽ᴷ⁾ = Σ_k t_k² / t_1²` with
/// `t_k = k_k α_k R^{α_k−1}`.
pub fn wideband_gain_ratio(model: &AttenuationModel, grid: &FrequencyGrid, rain_rate: f64) -> Result<f64> {
    let coeffs = model.coefficients(grid)?;
    let term = |c: &P838Coefficients| c.k_coef * c.alpha * rain_rate.powf(c.alpha - 1.0);
    let first = term(&coeffs[0]);
    let sum: f64 = coeffs.iter().map(|c| term(c).powi(2)).sum();
    Ok(sum / (first * first))
}

/// One point of the sensing–throughput Pareto frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub eta: f64,
    pub n_pilots: u32,
    pub spectral_efficiency: f64,
    pub crb_rmse: f64,
    pub bcrb_rmse: f64,
}

/// Pareto frontier over a pilot-fraction grid at fixed rain rate.
///
/// The pilot-count coupling keeps only the estimation term of the noise
/// model (`σ_n² = c0/N_p (1 + 1/γ̄)²`), which makes the bound scale as
/// `1/η` along the frontier.
pub fn pareto_frontier(
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    rain_rate: f64,
    prior: &RainPrior,
    link: &LinkConfig,
    t_window: u32,
    etas: &[f64],
) -> Result<Vec<ParetoPoint>> {
    if etas.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Domain("pilot fractions must lie in (0, 1)".into()));
    }
    let state = AtmosphericState::rain_only(rain_rate);
    let a_vec = crate::itu::attenuation_vector(model, grid, &state, &link.geometry)?;
    let a_mean = a_vec.iter().sum::<f64>() / a_vec.len() as f64;
    let snr = rate::mean_snr_under_rain(link.clear_sky_snr, a_mean)?;
    let j_p = prior_fisher_info(prior);
    let g_t = temporal_gain(prior.temporal_rho, t_window);
    let mut out = Vec::with_capacity(etas.len());
    for &eta in etas {
        let n_p = ((eta * f64::from(link.n_sym)).round() as u32).max(1);
        let sigma2 = C0 / f64::from(n_p) * (1.0 + 1.0 / snr).powi(2);
        let j_d = rain_information(model, &state, grid, &link.geometry, sigma2.sqrt())?;
        let c = rate::spectral_efficiency(eta, link.n_sym, snr)?;
        out.push(ParetoPoint {
            eta,
            n_pilots: n_p,
            spectral_efficiency: c,
            crb_rmse: (1.0 / j_d).sqrt(),
            bcrb_rmse: bcrb(j_d, j_p, g_t, 1)?.rmse,
        });
    }
    Ok(out)
}

/// One row of the side-information hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct SideInfoRow {
    pub label: String,
    pub params: Vec<Param>,
    /// Joint CRB relative to the rain-only CRB, percent excess.
    pub rel_crb_excess_percent: f64,
    pub kappa: f64,
    pub status: &'static str,
}

fn identifiability_status(kappa: f64) -> &'static str {
    if kappa < 1e3 {
        "identifiable"
    } else if kappa < 1e4 {
        "marginal"
    } else {
        "unidentifiable"
    }
}

/// Side-information hierarchy over the canonical nuisance sets
/// (R), (R,G), (R,ρ_wv), (R,M_c), (R,ρ_wv,M_c), all four.
pub fn sideinfo_hierarchy(
    model: &AttenuationModel,
    state: &AtmosphericState,
    grid: &FrequencyGrid,
    geom: &PathGeometry,
    sigma_db: f64,
) -> Result<Vec<SideInfoRow>> {
    let sets: [(&str, ParamSet); 6] = [
        ("R", ParamSet::rain_only()),
        ("R+G", ParamSet { rain: true, water_vapor: false, cloud: false, offset: true }),
        ("R+rho_wv", ParamSet { rain: true, water_vapor: true, cloud: false, offset: false }),
        ("R+M_c", ParamSet { rain: true, water_vapor: false, cloud: true, offset: false }),
        ("R+rho_wv+M_c", ParamSet { rain: true, water_vapor: true, cloud: true, offset: false }),
        ("R+rho_wv+M_c+G", ParamSet::all()),
    ];
    let crb_ref = crb_rain_only(model, state, grid, geom, sigma_db)?;
    let mut rows = Vec::with_capacity(sets.len());
    for (label, set) in sets {
        let g = sensitivity_matrix(model, state, grid, geom, set)?;
        let j = fim(&g, sigma_db)?;
        let kappa = condition_number(&j);
        let rel = match crb_joint_schur(&j) {
            Ok(crb) => (crb / crb_ref - 1.0) * 100.0,
            Err(Error::Unidentifiable(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        rows.push(SideInfoRow {
            label: label.to_string(),
            params: set.params(),
            rel_crb_excess_percent: rel,
            kappa,
            status: identifiability_status(kappa),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_setup() -> (AttenuationModel, FrequencyGrid, PathGeometry) {
        (AttenuationModel::band_average(), FrequencyGrid::ku_default(), PathGeometry::reference())
    }

    #[test]
    fn fim_offset_only_column() {
        let g = Matrix::from_columns(&[vec![1.0; 5]]);
        let j = fim(&g, 1.0).unwrap();
        assert_eq!(j.rows, 1);
        assert_relative_eq!(j[(0, 0)], 5.0, max_relative = 1e-15);
    }

    #[test]
    fn fim_is_symmetric() {
        let grid = FrequencyGrid::ku_default();
        let geom = PathGeometry::reference();
        let state = AtmosphericState::new(20.0, 7.5, 0.4, 0.0).unwrap();
        let g = sensitivity_matrix(&AttenuationModel::per_subcarrier(), &state, &grid, &geom, ParamSet::all()).unwrap();
        let j = fim(&g, 1.0).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                assert!((j[(i, k)] - j[(k, i)]).abs() <= 1e-15 * j[(i, i)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn rain_only_information_nominal_band_value() {
        // 5 · (0.022 · 1.19 · 20^0.19 · 3)² ≈ 0.0963 with the nominal pair.
        let band = BandStats::nominal_ku();
        let slope = band.k_bar * band.alpha_bar * 20f64.powf(band.alpha_bar - 1.0) * 3.0;
        let j = 5.0 * slope * slope;
        assert_relative_eq!(j, 0.0963, max_relative = 1e-3);
    }

    #[test]
    fn crb_rain_only_reference_rmse() {
        let (model, grid, geom) = reference_setup();
        let state = AtmosphericState::rain_only(20.0);
        let rmse = crb_rain_only(&model, &state, &grid, &geom, 1.0).unwrap().sqrt();
        assert!((rmse - 3.19).abs() < 0.05, "RMSE@20 = {rmse}");
    }

    #[test]
    fn crb_scaling_law() {
        let (model, grid, geom) = reference_setup();
        for r in [2.0, 8.0, 30.0] {
            let c1 = crb_rain_only(&model, &AtmosphericState::rain_only(r), &grid, &geom, 1.0).unwrap();
            let c2 = crb_rain_only(&model, &AtmosphericState::rain_only(2.0 * r), &grid, &geom, 1.0).unwrap();
            assert_relative_eq!(c2 / c1, 2f64.powf(-0.38), max_relative = 0.02);
        }
    }

    #[test]
    fn crb_k1_vs_k5() {
        let model = AttenuationModel::band_average();
        let geom = PathGeometry::reference();
        let state = AtmosphericState::rain_only(20.0);
        let c5 = crb_rain_only(&model, &state, &FrequencyGrid::ku(5), &geom, 1.0).unwrap();
        let c1 = crb_rain_only(&model, &state, &FrequencyGrid::ku(1), &geom, 1.0).unwrap();
        assert!(c1 / c5 >= 5.0 - 1e-9, "ratio {}", c1 / c5);
    }

    #[test]
    fn schur_equals_rain_only_without_nuisance() {
        let (model, grid, geom) = reference_setup();
        let state = AtmosphericState::rain_only(20.0);
        let g = sensitivity_matrix(&model, &state, &grid, &geom, ParamSet::rain_only()).unwrap();
        let j = fim(&g, 1.0).unwrap();
        let joint = crb_joint_schur(&j).unwrap();
        let rain_only = crb_rain_only(&model, &state, &grid, &geom, 1.0).unwrap();
        assert_relative_eq!(joint, rain_only, max_relative = 1e-14);
    }

    #[test]
    fn schur_never_below_rain_only() {
        let model = AttenuationModel::per_subcarrier();
        let grid = FrequencyGrid::ku(20);
        let geom = PathGeometry::reference();
        let state = AtmosphericState::new(20.0, 7.5, 0.4, 0.0).unwrap();
        let rain_only = crb_rain_only(&model, &state, &grid, &geom, 1.0).unwrap();
        let set = ParamSet { rain: true, water_vapor: false, cloud: false, offset: true };
        let g = sensitivity_matrix(&model, &state, &grid, &geom, set).unwrap();
        let joint = crb_joint_schur(&fim(&g, 1.0).unwrap()).unwrap();
        assert!(joint >= rain_only * (1.0 - 1e-12));
    }

    #[test]
    fn condition_number_identity() {
        let mut j = Matrix::zeros(2, 2);
        j[(0, 0)] = 1.0;
        j[(1, 1)] = 1.0;
        assert_relative_eq!(condition_number(&j), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn condition_number_three_params_exceeds_1e4() {
        let model = AttenuationModel::per_subcarrier();
        let grid = FrequencyGrid::ku(20);
        let geom = PathGeometry::reference();
        let state = AtmosphericState::new(20.0, 7.5, 0.4, 0.0).unwrap();
        let set = ParamSet { rain: true, water_vapor: true, cloud: true, offset: false };
        let g = sensitivity_matrix(&model, &state, &grid, &geom, set).unwrap();
        let j = fim(&g, 1.0).unwrap();
        assert!(condition_number(&j) > 1e4);
    }

    #[test]
    fn kappa_hierarchy_ordering() {
        let model = AttenuationModel::per_subcarrier();
        let grid = FrequencyGrid::ku(20);
        let geom = PathGeometry::reference();
        let state = AtmosphericState::new(20.0, 7.5, 0.4, 0.0).unwrap();
        let rows = sideinfo_hierarchy(&model, &state, &grid, &geom, 1.0).unwrap();
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2) {
            assert!(
                w[1].kappa > w[0].kappa,
                "kappa must grow along the hierarchy: {} ({}) vs {} ({})",
                w[0].label,
                w[0].kappa,
                w[1].label,
                w[1].kappa
            );
            let a = w[0].rel_crb_excess_percent;
            let b = w[1].rel_crb_excess_percent;
            assert!(b >= a || b.is_infinite(), "relative CRB must not shrink: {a} vs {b}");
        }
    }

    #[test]
    fn coherence_collinear_and_band_values() {
        let a = vec![1.0, 2.0, 3.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        assert_relative_eq!(gradient_coherence(&a, &b).unwrap(), 1.0, max_relative = 1e-15);
        assert!(gradient_coherence(&a, &[0.0, 0.0, 0.0]).is_err());

        let model = AttenuationModel::per_subcarrier();
        let geom = PathGeometry::reference();
        let state = AtmosphericState::new(20.0, 7.5, 0.4, 0.0).unwrap();
        let set = ParamSet { rain: true, water_vapor: true, cloud: false, offset: false };

        let ku = FrequencyGrid::ku(5);
        let g = sensitivity_matrix(&model, &state, &ku, &geom, set).unwrap();
        let mu_ku = gradient_coherence(&g.column(0), &g.column(1)).unwrap();
        assert!((mu_ku - 0.97).abs() < 0.05, "Ku coherence {mu_ku}");

        let kuka = FrequencyGrid::ku_plus_ka(5, 3);
        let g2 = sensitivity_matrix(&model, &state, &kuka, &geom, set).unwrap();
        let mu_kuka = gradient_coherence(&g2.column(0), &g2.column(1)).unwrap();
        assert!(mu_kuka < mu_ku, "adding Ka must reduce coherence: {mu_kuka} vs {mu_ku}");
    }

    #[test]
    fn prior_fisher_reference_value() {
        let prior = RainPrior::reference();
        let jp = prior_fisher_info(&prior);
        assert!((jp - 0.806).abs() < 0.005, "J_P = {jp}");
        // 1/R̄² scaling.
        let doubled = RainPrior::new(10.4, 1.05, 0.95).unwrap();
        assert_relative_eq!(prior_fisher_info(&doubled), jp / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn prior_derived_fields_consistent() {
        let prior = RainPrior::reference();
        assert_relative_eq!(prior.sigma_ln, (1.0 + 1.05f64 * 1.05).ln().sqrt(), epsilon = 1e-12);
        assert_relative_eq!(prior.mu_ln, 5.2f64.ln() - 0.5 * prior.sigma_ln * prior.sigma_ln, epsilon = 1e-12);
    }

    #[test]
    fn temporal_gain_values() {
        assert_relative_eq!(temporal_gain(0.95, 1), 1.0, epsilon = 1e-15);
        assert_relative_eq!(temporal_gain(0.3, 1), 1.0, epsilon = 1e-15);
        assert!((temporal_gain_infinite(0.95) - 10.256).abs() < 0.01);
        let t95 = t95_exact(0.95);
        assert!((t95 - 29.2).abs() < 0.1, "T95 = {t95}");
        assert_eq!(t95.ceil() as u32, 30);
        // Increasing in T toward the limit.
        let mut last = 0.0;
        for t in 1..200 {
            let g = temporal_gain(0.95, t);
            assert!(g > last);
            last = g;
        }
        assert!(last < temporal_gain_infinite(0.95));
    }

    #[test]
    fn bcrb_reference_rows() {
        let (model, grid, geom) = reference_setup();
        let prior = RainPrior::reference();
        let jp = prior_fisher_info(&prior);
        let jd = rain_information(&model, &AtmosphericState::rain_only(20.0), &grid, &geom, 1.0).unwrap();

        let t1 = bcrb(jd, jp, 1.0, 1).unwrap();
        assert!((t1.rmse - 1.05).abs() < 0.05, "T=1 rmse {}", t1.rmse);
        let t30 = bcrb(jd, jp, temporal_gain(0.95, 30), 1).unwrap();
        assert!((t30.rmse - 0.75).abs() < 0.05, "T=30 rmse {}", t30.rmse);
        let fused = bcrb(jd, jp, temporal_gain(0.95, 30), 215).unwrap();
        assert!((fused.rmse - 0.07).abs() < 0.01, "N=215 rmse {}", fused.rmse);

        // Reduces to the CRB when the prior and pooling are off.
        let plain = bcrb(jd, 0.0, 1.0, 1).unwrap();
        assert_relative_eq!(plain.variance, 1.0 / jd, max_relative = 1e-14);
        assert!(bcrb(0.0, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn bcrb_ratio_behaviour() {
        assert_relative_eq!(bcrb_crb_ratio(0.5, 0.0), 1.0, epsilon = 1e-15);
        let (model, grid, geom) = reference_setup();
        let jp = prior_fisher_info(&RainPrior::reference());
        let jd2 = rain_information(&model, &AtmosphericState::rain_only(2.0), &grid, &geom, 1.0).unwrap();
        let jd20 = rain_information(&model, &AtmosphericState::rain_only(20.0), &grid, &geom, 1.0).unwrap();
        assert!(bcrb_crb_ratio(jd2, jp) < bcrb_crb_ratio(jd20, jp));
        // Temporal variant at T=30 stays below one half for rho > 0.85.
        for rho in [0.86, 0.9, 0.95, 0.99] {
            let ratio = bcrb(jd20, jp, temporal_gain(rho, 30), 1).unwrap().variance * jd20;
            assert!(ratio < 0.5, "rho {rho}: ratio {ratio}");
        }
    }

    #[test]
    fn rmin_solver_reference_values() {
        let (model, grid, geom) = reference_setup();
        let prior = RainPrior::reference();
        let jp = prior_fisher_info(&prior);
        let crb_fn = |r: f64| crb_rain_only(&model, &AtmosphericState::rain_only(r), &grid, &geom, 1.0);
        let rmin = rmin_solve(crb_fn).unwrap();
        assert!((rmin - 4.26).abs() < 0.05, "standard CRB R_min {rmin}");

        for (t, expect) in [(1u32, 1.09), (10, 0.99), (30, 0.95)] {
            let g_t = temporal_gain(0.95, t);
            let f = |r: f64| -> Result<f64> {
                let jd = rain_information(&model, &AtmosphericState::rain_only(r), &grid, &geom, 1.0)?;
                Ok(bcrb(jd, jp, g_t, 1)?.variance)
            };
            let rmin_t = rmin_solve(f).unwrap();
            assert!((rmin_t - expect).abs() < 0.02, "T={t}: {rmin_t} vs {expect}");
        }
    }

    #[test]
    fn rmin_solver_satisfies_unit_relative_error() {
        let (model, grid, geom) = reference_setup();
        let crb_fn = |r: f64| crb_rain_only(&model, &AtmosphericState::rain_only(r), &grid, &geom, 1.0);
        let rmin = rmin_solve(crb_fn).unwrap();
        let gap = (crb_fn(rmin).unwrap().sqrt() - rmin).abs();
        assert!(gap < 1e-5, "residual {gap}");
    }

    #[test]
    fn rmin_closed_form_matches_solver_with_nominal_stats() {
        let band = BandStats::nominal_ku();
        let closed = rmin_closed_form(1.0, 5, &band, 3.0);
        assert!((closed - 4.3).abs() < 0.05, "closed form {closed}");

        // Literal band-stats bound: CRB(R) = σ²/(K (k̄ ᾱ R^{ᾱ-1} L)²).
        let bound = |r: f64| -> Result<f64> {
            let slope = band.k_bar * band.alpha_bar * r.powf(band.alpha_bar - 1.0) * 3.0;
            Ok(1.0 / (5.0 * slope * slope))
        };
        let solved = rmin_solve(bound).unwrap();
        assert!((closed - solved).abs() < 1e-6, "closed {closed} vs solved {solved}");

        // Exponent algebra.
        let l2 = rmin_closed_form(1.0, 5, &band, 6.0);
        assert_relative_eq!(l2 / closed, 2f64.powf(-1.0 / band.alpha_bar), max_relative = 1e-12);
        let s2 = rmin_closed_form(2.0, 5, &band, 3.0);
        assert_relative_eq!(s2 / closed, 4f64.powf(1.0 / (2.0 * band.alpha_bar)), max_relative = 1e-12);
    }

    #[test]
    fn rmin_no_solution_reported() {
        // A bound so tight that √bound(R) < R on the whole bracket.
        let res = rmin_solve(|_r| Ok(1e-12));
        assert!(matches!(res, Err(Error::NoSolution(_))));
    }

    #[test]
    fn wideband_ratio() {
        let band = AttenuationModel::band_average();
        assert_relative_eq!(wideband_gain_ratio(&band, &FrequencyGrid::ku(1), 20.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(wideband_gain_ratio(&band, &FrequencyGrid::ku(5), 20.0).unwrap(), 5.0, max_relative = 1e-12);
        let full = AttenuationModel::per_subcarrier();
        let r = wideband_gain_ratio(&full, &FrequencyGrid::ku(5), 20.0).unwrap();
        assert!(r >= 5.0, "full-mode ratio {r}");
    }

    #[test]
    fn pareto_frontier_shape() {
        let model = AttenuationModel::band_average();
        let grid = FrequencyGrid::ku_default();
        let link = LinkConfig::reference();
        let prior = RainPrior::reference();
        let etas: Vec<f64> = (1..=50).map(|i| i as f64 * 0.01).collect();
        let pts = pareto_frontier(&model, &grid, 20.0, &prior, &link, 30, &etas).unwrap();
        // RMSE strictly decreasing in eta (J_D ∝ N_p).
        for w in pts.windows(2) {
            assert!(w[1].bcrb_rmse < w[0].bcrb_rmse);
            assert!(w[1].crb_rmse < w[0].crb_rmse);
        }
        // Pilot reduction: BCRB(T=30) at η=0.05 beats the CRB at η=0.20.
        let at = |eta: f64| pts.iter().find(|p| (p.eta - eta).abs() < 1e-9).unwrap();
        assert!(at(0.05).bcrb_rmse <= at(0.20).crb_rmse);
        // C decreasing past the throughput-optimal fraction.
        let state = AtmosphericState::rain_only(20.0);
        let v = crate::itu::attenuation_vector(&model, &grid, &state, &link.geometry).unwrap();
        let snr = rate::mean_snr_under_rain(link.clear_sky_snr, v.iter().sum::<f64>() / v.len() as f64).unwrap();
        let eta_rate = rate::throughput_optimal_eta(snr, link.n_sym).unwrap();
        for w in pts.windows(2) {
            if w[0].eta > eta_rate {
                assert!(w[1].spectral_efficiency < w[0].spectral_efficiency);
            }
        }
    }
}
