//! Weather-adaptive pilot allocation.
//!
//! The allocation minimizes the Bayesian bound subject to a hard
//! spectral-efficiency floor. Because the bound decreases monotonically in
//! the pilot fraction while `C(η)` is concave past its maximizer, the
//! optimum is the supremum of the feasible set,
//!
//! ```text
//! η*(R) = sup{ η ∈ [η_min, η_max] : C(η, γ̄(R)) ≥ C_min },
//! ```
//!
//! with a three-regime structure over rain rate: full sensing
//! (`η* = η_max`), throughput tracking (rate constraint active) and outage
//! (`η* = η*_rate`).
//!
//! The pilot-count noise coupling uses the estimation term only
//! (`σ_n² = c0/N_p (1 + 1/γ̄)²`), so the bound scales as `1/η`; the
//! systematic floor can be folded back in via `include_sys_floor`.

use crate::bounds::{bcrb, prior_fisher_info, temporal_gain, BandStats, RainPrior};
use crate::rate;
use crate::{Error, LinkConfig, Result, C0};

/// Constraint set of the allocation problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationPolicy {
    /// Spectral-efficiency floor, bit/s/Hz.
    pub c_min: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    /// Bisection tolerance on η.
    pub tolerance: f64,
}

impl AllocationPolicy {
    pub fn new(c_min: f64, eta_min: f64, eta_max: f64, tolerance: f64) -> Result<Self> {
        if !(eta_min > 0.0 && eta_min < eta_max && eta_max < 1.0) {
            return Err(Error::Config(format!("need 0 < η_min < η_max < 1, got [{eta_min}, {eta_max}]")));
        }
        if !(c_min > 0.0) {
            return Err(Error::Config("C_min must be positive".into()));
        }
        if !(tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(AllocationPolicy { c_min, eta_min, eta_max, tolerance })
    }

    pub fn reference(c_min: f64) -> Self {
        AllocationPolicy { c_min, eta_min: 0.01, eta_max: 0.50, tolerance: 1e-4 }
    }

    /// Guaranteed bisection iteration count `⌈log2((η_max − η_min)/ε)⌉`.
    pub fn bisection_iterations(&self) -> u32 {
        ((self.eta_max - self.eta_min) / self.tolerance).log2().ceil() as u32
    }
}

/// Operating regime of the allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    FullSensing,
    ThroughputTracking,
    Outage,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::FullSensing => "full_sensing",
            Regime::ThroughputTracking => "throughput_tracking",
            Regime::Outage => "outage",
        }
    }
}

/// Outcome of the allocation at one rain rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    pub eta_star: f64,
    pub regime: Regime,
    pub achieved_c: f64,
    pub bound_rmse: f64,
    pub bisection_iterations: u32,
}

/// Rain-dependent channel context for the allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationContext {
    pub band: BandStats,
    pub k_subcarriers: usize,
    pub link: LinkConfig,
    pub prior: RainPrior,
    /// Temporal window feeding the bound, snapshots (minutes).
    pub t_window: u32,
    /// Fixed gas/cloud attenuation added to the rain term, dB.
    pub baseline_attenuation_db: f64,
    /// Keep the σ_sys² floor inside the pilot-coupled noise.
    pub include_sys_floor: bool,
}

impl AllocationContext {
    pub fn reference() -> Self {
        let grid = crate::itu::FrequencyGrid::ku_default();
        let avg = crate::itu::AttenuationModel::per_subcarrier()
            .band_average_coefficients(&grid)
            .expect("reference grid is valid");
        AllocationContext {
            band: BandStats::from_coefficients(&avg),
            k_subcarriers: grid.len(),
            link: LinkConfig::reference(),
            prior: RainPrior::reference(),
            t_window: 30,
            baseline_attenuation_db: 0.0,
            include_sys_floor: false,
        }
    }

    /// Mean SNR at rain rate `R`, linear.
    pub fn mean_snr(&self, rain_rate: f64) -> Result<f64> {
        let l_eff = self.link.geometry.anchored_rain_path_km()?;
        let a = self.band.mean_attenuation_db(rain_rate, l_eff) + self.baseline_attenuation_db;
        rate::mean_snr_under_rain(self.link.clear_sky_snr, a)
    }

    fn c_of(&self, eta: f64, snr: f64) -> Result<f64> {
        rate::spectral_efficiency(eta, self.link.n_sym, snr)
    }

    /// Bound RMSE at `(R, η)` with the pilot-coupled noise, mm/h.
    pub fn bound_rmse(&self, rain_rate: f64, eta: f64) -> Result<f64> {
        let snr = self.mean_snr(rain_rate)?;
        let n_p = ((eta * f64::from(self.link.n_sym)).round() as u32).max(1);
        let mut sigma2 = C0 / f64::from(n_p) * (1.0 + 1.0 / snr).powi(2);
        if self.include_sys_floor {
            sigma2 += self.link.noise.sigma_sys_db.powi(2);
        }
        let l_eff = self.link.geometry.anchored_rain_path_km()?;
        let slope =
            self.band.k_bar * self.band.alpha_bar * rain_rate.powf(self.band.alpha_bar - 1.0) * l_eff;
        let j_d = self.k_subcarriers as f64 * slope * slope / sigma2;
        let g_t = temporal_gain(self.prior.temporal_rho, self.t_window);
        Ok(bcrb(j_d, prior_fisher_info(&self.prior), g_t, 1)?.rmse)
    }
}

/// Weather-adaptive pilot fraction at rain rate `R`.
pub fn eta_star(
    rain_rate: f64,
    policy: &AllocationPolicy,
    ctx: &AllocationContext,
) -> Result<AllocationResult> {
    if !(rain_rate >= 0.0) {
        return Err(Error::Domain("rain rate must be >= 0".into()));
    }
    let snr = ctx.mean_snr(rain_rate)?;
    let eta_rate = rate::throughput_optimal_eta(snr, ctx.link.n_sym)?;
    let eta_peak = eta_rate.clamp(policy.eta_min, policy.eta_max);

    let c_at_max = ctx.c_of(policy.eta_max, snr)?;
    if c_at_max >= policy.c_min {
        return Ok(AllocationResult {
            eta_star: policy.eta_max,
            regime: Regime::FullSensing,
            achieved_c: c_at_max,
            bound_rmse: ctx.bound_rmse(rain_rate, policy.eta_max)?,
            bisection_iterations: 0,
        });
    }
    let c_peak = ctx.c_of(eta_peak, snr)?;
    if c_peak < policy.c_min {
        return Ok(AllocationResult {
            eta_star: eta_peak,
            regime: Regime::Outage,
            achieved_c: c_peak,
            bound_rmse: ctx.bound_rmse(rain_rate, eta_peak)?,
            bisection_iterations: 0,
        });
    }

    // Rate constraint active: C is decreasing on [η_peak, η_max], so keep
    // `lo` feasible and `hi` infeasible; the loop count is fixed by the
    // policy tolerance.
    let iterations = policy.bisection_iterations();
    let mut lo = eta_peak;
    let mut hi = policy.eta_max;
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if ctx.c_of(mid, snr)? >= policy.c_min {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(AllocationResult {
        eta_star: lo,
        regime: Regime::ThroughputTracking,
        achieved_c: ctx.c_of(lo, snr)?,
        bound_rmse: ctx.bound_rmse(rain_rate, lo)?,
        bisection_iterations: iterations,
    })
}

/// Regime thresholds `(R_sat, R_out)`: the rain rates at which the rate
/// constraint first binds at `η_max` and at which even the throughput
/// optimum drops below `C_min`. Saturates at the bracket edges when a
/// threshold is never crossed on `[0, 300]` mm/h.
pub fn regime_thresholds(policy: &AllocationPolicy, ctx: &AllocationContext) -> Result<(f64, f64)> {
    let r_hi = 300.0;
    let c_at = |eta: f64, r: f64| -> Result<f64> { ctx.c_of(eta, ctx.mean_snr(r)?) };
    let c_peak_at = |r: f64| -> Result<f64> {
        let snr = ctx.mean_snr(r)?;
        let eta_peak = rate::throughput_optimal_eta(snr, ctx.link.n_sym)?
            .clamp(policy.eta_min, policy.eta_max);
        ctx.c_of(eta_peak, snr)
    };
    let solve = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        // C(R) is strictly decreasing in R through the attenuation.
        if f(0.0)? <= policy.c_min {
            return Ok(0.0);
        }
        if f(r_hi)? >= policy.c_min {
            return Ok(r_hi);
        }
        let (mut lo, mut hi) = (0.0, r_hi);
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? >= policy.c_min {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let f_sat = |r: f64| c_at(policy.eta_max, r);
    let r_sat = solve(&f_sat)?;
    let r_out = solve(&c_peak_at)?;
    Ok((r_sat, r_out.max(r_sat)))
}

/// High-SNR asymptote `η* ≈ 1 − C_min/log2(1 + γ̄)`, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighSnrEta {
    pub eta: f64,
    /// Set when `γ̄` is below the validity floor of the asymptote.
    pub below_validity: bool,
}

pub fn eta_high_snr(mean_snr: f64, c_min: f64) -> Result<HighSnrEta> {
    if !(mean_snr > 0.0) {
        return Err(Error::Domain("mean SNR must be positive".into()));
    }
    let eta = (1.0 - c_min / (1.0 + mean_snr).log2()).clamp(0.0, 1.0);
    Ok(HighSnrEta { eta, below_validity: mean_snr < 10.0 })
}

/// Fixed-η baseline evaluated alongside the adaptive policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineCell {
    pub eta: f64,
    pub achieved_c: f64,
    /// Whether the baseline satisfies the rate floor at this rain rate.
    pub feasible: bool,
    pub bound_rmse: f64,
}

/// One row of the allocation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSweepRow {
    pub rain_rate: f64,
    pub c_min: f64,
    pub result: AllocationResult,
    pub baselines: Vec<BaselineCell>,
}

/// Sweep of the adaptive allocation against fixed-η baselines.
pub fn allocation_sweep(
    rain_rates: &[f64],
    c_mins: &[f64],
    fixed_etas: &[f64],
    ctx: &AllocationContext,
) -> Result<Vec<AllocationSweepRow>> {
    if rain_rates.is_empty() || c_mins.is_empty() {
        return Err(Error::Config("allocation sweep needs non-empty grids".into()));
    }
    let mut rows = Vec::with_capacity(rain_rates.len() * c_mins.len());
    for &c_min in c_mins {
        let policy = AllocationPolicy::reference(c_min);
        for &r in rain_rates {
            let result = eta_star(r, &policy, ctx)?;
            let snr = ctx.mean_snr(r)?;
            let baselines = fixed_etas
                .iter()
                .map(|&eta| {
                    let c = rate::spectral_efficiency(eta, ctx.link.n_sym, snr)?;
                    Ok(BaselineCell {
                        eta,
                        achieved_c: c,
                        feasible: c >= c_min,
                        bound_rmse: ctx.bound_rmse(r, eta)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(AllocationSweepRow { rain_rate: r, c_min, result, baselines });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_regimes_at_reference_floor() {
        let ctx = AllocationContext::reference();
        let policy = AllocationPolicy::reference(1.0);

        let low = eta_star(10.0, &policy, &ctx).unwrap();
        assert_eq!(low.regime, Regime::FullSensing);
        assert_eq!(low.eta_star, 0.50);

        let mid = eta_star(60.0, &policy, &ctx).unwrap();
        assert_eq!(mid.regime, Regime::ThroughputTracking);
        assert!(mid.eta_star < 0.5 && mid.eta_star > 0.01);
        assert!((mid.achieved_c - 1.0).abs() <= 1e-3, "C(η*) = {}", mid.achieved_c);

        let heavy = eta_star(100.0, &policy, &ctx).unwrap();
        assert_eq!(heavy.regime, Regime::Outage);
        let snr = ctx.mean_snr(100.0).unwrap();
        let eta_rate = rate::throughput_optimal_eta(snr, ctx.link.n_sym).unwrap();
        assert!((heavy.eta_star - eta_rate.clamp(0.01, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn eta_star_non_increasing_in_tracking_regime() {
        let ctx = AllocationContext::reference();
        let policy = AllocationPolicy::reference(1.0);
        let (r_sat, r_out) = regime_thresholds(&policy, &ctx).unwrap();
        let mut last = f64::INFINITY;
        let mut r = r_sat + 0.5;
        while r < r_out - 0.5 {
            let res = eta_star(r, &policy, &ctx).unwrap();
            assert_eq!(res.regime, Regime::ThroughputTracking, "at R = {r}");
            assert!(res.eta_star <= last + 1e-9, "η* must not increase with R");
            assert!(res.achieved_c >= policy.c_min - 1e-6);
            last = res.eta_star;
            r += 1.0;
        }
    }

    #[test]
    fn bisection_iteration_count_is_exact() {
        let ctx = AllocationContext::reference();
        let policy = AllocationPolicy::reference(1.0);
        let expected = ((policy.eta_max - policy.eta_min) / policy.tolerance).log2().ceil() as u32;
        let res = eta_star(55.0, &policy, &ctx).unwrap();
        assert_eq!(res.regime, Regime::ThroughputTracking);
        assert_eq!(res.bisection_iterations, expected);
    }

    #[test]
    fn thresholds_reference_windows() {
        let ctx = AllocationContext::reference();
        let policy = AllocationPolicy::reference(1.0);
        let (r_sat, r_out) = regime_thresholds(&policy, &ctx).unwrap();
        assert!((r_sat - 35.0).abs() <= 5.0, "R_sat = {r_sat}");
        assert!((r_out - 65.0).abs() <= 5.0, "R_out = {r_out}");
        assert!(r_sat <= r_out);

        // Vacuous constraint pushes both thresholds to the bracket edge.
        let lax = AllocationPolicy::reference(1e-9);
        let (s, o) = regime_thresholds(&lax, &ctx).unwrap();
        assert_eq!(s, 300.0);
        assert_eq!(o, 300.0);
    }

    #[test]
    fn thresholds_bracket_regime_labels() {
        let ctx = AllocationContext::reference();
        let policy = AllocationPolicy::reference(1.0);
        let (r_sat, r_out) = regime_thresholds(&policy, &ctx).unwrap();
        let mut r = 1.0;
        while r < 120.0 {
            let regime = eta_star(r, &policy, &ctx).unwrap().regime;
            let expected = if r < r_sat {
                Regime::FullSensing
            } else if r <= r_out {
                Regime::ThroughputTracking
            } else {
                Regime::Outage
            };
            if (r - r_sat).abs() > 1.0 && (r - r_out).abs() > 1.0 {
                assert_eq!(regime, expected, "at R = {r}");
            }
            r += 1.0;
        }
    }

    #[test]
    fn high_snr_asymptote() {
        let res = eta_high_snr(1023.0, 5.0).unwrap();
        assert!((res.eta - 0.5).abs() < 1e-12);
        assert!(!res.below_validity);
        assert!(eta_high_snr(5.0, 1.0).unwrap().below_validity);
        let zero = eta_high_snr(1023.0, 10.0).unwrap();
        assert!(zero.eta.abs() < 1e-12);

        // Agreement with the bisection optimum at γ̄ = 10³.
        let mut ctx = AllocationContext::reference();
        ctx.link.clear_sky_snr = 1000.0;
        let policy = AllocationPolicy::new(2.0, 0.01, 0.99, 1e-4).unwrap();
        let exact = eta_star(0.0, &policy, &ctx).unwrap();
        let asym = eta_high_snr(1000.0, 2.0).unwrap();
        assert_eq!(exact.regime, Regime::ThroughputTracking);
        assert!(
            (exact.eta_star - asym.eta).abs() < 0.05,
            "bisection {} vs asymptote {}",
            exact.eta_star,
            asym.eta
        );
    }

    #[test]
    fn sweep_adaptive_dominates_feasible_baselines() {
        let ctx = AllocationContext::reference();
        let rates: Vec<f64> = (1..=24).map(|i| 5.0 * i as f64).collect();
        let rows = allocation_sweep(&rates, &[1.0], &[0.05, 0.10, 0.20], &ctx).unwrap();
        let mut improvement_at_10 = None;
        for row in &rows {
            let feasible_best = row
                .baselines
                .iter()
                .filter(|b| b.feasible)
                .map(|b| b.bound_rmse)
                .fold(f64::INFINITY, f64::min);
            if row.result.regime != Regime::Outage && feasible_best.is_finite() {
                assert!(
                    row.result.bound_rmse <= feasible_best + 1e-12,
                    "adaptive must dominate at R = {}",
                    row.rain_rate
                );
            }
            if (row.rain_rate - 10.0).abs() < 1e-9 {
                improvement_at_10 = Some(1.0 - row.result.bound_rmse / feasible_best);
            }
        }
        let improvement = improvement_at_10.expect("R = 10 present in grid");
        assert!(improvement > 0.30, "improvement at R = 10 was {improvement}");
    }

    #[test]
    fn fixed_eta_baseline_violates_at_high_rain() {
        let ctx = AllocationContext::reference();
        let rows = allocation_sweep(&[80.0], &[1.0], &[0.20], &ctx).unwrap();
        let cell = &rows[0].baselines[0];
        assert!(!cell.feasible, "η = 0.20 must violate C_min = 1 at R = 80");
    }

    #[test]
    fn invalid_policies_rejected() {
        assert!(AllocationPolicy::new(1.0, 0.2, 0.1, 1e-4).is_err());
        assert!(AllocationPolicy::new(0.0, 0.01, 0.5, 1e-4).is_err());
        assert!(AllocationPolicy::new(1.0, 0.01, 0.5, 0.0).is_err());
    }
}
