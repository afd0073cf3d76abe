//! Reproducible Monte Carlo experiments.
//!
//! Every experiment is a pure function of its inputs and an [`RngSpec`];
//! identical specs give bit-identical tables. Per-trial randomness comes
//! from independent ChaCha streams so trial order (or a future parallel
//! reduction) cannot change results.

use crate::bounds::{
    bcrb, crb_rain_only, prior_fisher_info, rain_information, temporal_gain, RainPrior,
};
use crate::detect::{add_wald, cusum_update, CusumConfig, CusumState};
use crate::estimate::{fuse_estimates, map_newton, mle_newton};
use crate::itu::{attenuation_vector, AtmosphericState, AttenuationModel, FrequencyGrid};
use crate::{Error, LinkConfig, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

/// Seed plus stream id; the unit of reproducibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngSpec { seed, stream_id }
    }

    /// Independent stream for a sub-experiment or trial.
    pub fn stream(&self, offset: u64) -> Self {
        RngSpec { seed: self.seed, stream_id: self.stream_id.wrapping_add(offset) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Observation noise generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Additive Gaussian noise in the dB domain.
    DbGaussian,
    /// Chi-squared pilot-power averaging converted through the clear-sky
    /// baseline, plus the systematic Gaussian floor.
    ChiSquaredPilot,
}

/// Synthetic generation setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub truth: AtmosphericState,
    pub link: LinkConfig,
    pub noise_mode: NoiseMode,
    pub trials: u32,
}

impl SyntheticScenario {
    pub fn new(truth: AtmosphericState, link: LinkConfig, noise_mode: NoiseMode, trials: u32) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Config("scenario needs at least one trial".into()));
        }
        Ok(SyntheticScenario { truth, link, noise_mode, trials })
    }

    /// One observation drawn under this scenario.
    pub fn observe(
        &self,
        model: &AttenuationModel,
        grid: &FrequencyGrid,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>> {
        gen_observation(model, grid, &self.truth, &self.link, self.noise_mode, rng)
    }
}

/// One noisy attenuation observation over the grid, dB.
pub fn gen_observation(
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    truth: &AtmosphericState,
    link: &LinkConfig,
    mode: NoiseMode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let a = attenuation_vector(model, grid, truth, &link.geometry)?;
    match mode {
        NoiseMode::DbGaussian => {
            let sigma = link.noise.sigma_db()?;
            Ok(a.iter().map(|v| v + sigma * standard_normal(rng)).collect())
        }
        NoiseMode::ChiSquaredPilot => {
            let n_p = link.n_pilots();
            let gamma_shape = Gamma::new(f64::from(n_p), 1.0 / f64::from(n_p))
                .map_err(|e| Error::Numeric(format!("gamma sampler: {e}")))?;
            let sigma_sys = link.noise.sigma_sys_db;
            let mut out = Vec::with_capacity(a.len());
            for &a_k in &a {
                // Signal and total pilot power in units of the noise floor.
                let snr_k = link.clear_sky_snr * 10f64.powf(-a_k / 10.0);
                let p_tot = 1.0 + snr_k;
                let p_hat = p_tot * gamma_shape.sample(rng);
                let p_sig = (p_hat - 1.0).max(snr_k * 1e-9);
                let mut a_hat = 10.0 * (link.clear_sky_snr / p_sig).log10();
                if sigma_sys > 0.0 {
                    a_hat += sigma_sys * standard_normal(rng);
                }
                out.push(a_hat);
            }
            Ok(out)
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    Normal::new(0.0, 1.0).unwrap().sample(rng)
}

/// Gauss–Markov rain series `ln R(t) = ρ ln R(t−1) + (1−ρ)μ_ln + w(t)`
/// with stationary initialization, mm/h.
pub fn gen_rain_series(prior: &RainPrior, t_steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if t_steps == 0 {
        return Vec::new();
    }
    let rho = prior.temporal_rho;
    let innovation = prior.sigma_ln * (1.0 - rho * rho).sqrt();
    let mut ln_r = prior.mu_ln + prior.sigma_ln * standard_normal(rng);
    let mut out = Vec::with_capacity(t_steps);
    out.push(ln_r.exp());
    for _ in 1..t_steps {
        ln_r = rho * ln_r + (1.0 - rho) * prior.mu_ln + innovation * standard_normal(rng);
        out.push(ln_r.exp());
    }
    out
}

/// Importance-sampled Monte Carlo of the prior Fisher information
/// `E[(∂ ln p(R)/∂R)²]` under the log-normal prior.
///
/// Sampling happens under the exponentially tilted density
/// `z ~ N(μ_ln − σ_ln, σ_ln²)` (in standardized form `ζ ~ N(0,1)`), where
/// the weighted score-squared reduces to
/// `e^{−2μ+3σ²/2} · e^{−σζ} ζ²/σ²` — still a genuinely stochastic average
/// of an exponential moment, but with sample relative std ≈ 4.4 instead of
/// ≈ 24 for naive draws, which a 10⁶-sample run resolves well below 1%.
pub fn jp_score_monte_carlo(prior: &RainPrior, draws: u64, spec: RngSpec) -> f64 {
    let mut rng = spec.rng();
    let sigma = prior.sigma_ln;
    let prefactor = (-2.0 * prior.mu_ln + 1.5 * sigma * sigma).exp() / (sigma * sigma);
    let mut acc = 0.0;
    for _ in 0..draws {
        let zeta = standard_normal(&mut rng);
        acc += (-sigma * zeta).exp() * zeta * zeta;
    }
    prefactor * acc / draws as f64
}

/// Efficiency of the MLE/MAP against the bound at one true rain rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyRow {
    pub rain_rate: f64,
    pub trials: u32,
    pub mle_rmse: f64,
    pub map_rmse: f64,
    pub crb_rmse: f64,
    pub bcrb_t1_rmse: f64,
    /// MLE RMSE over √CRB.
    pub mle_ratio: f64,
    pub mle_median_iterations: u32,
    pub mle_convergence_failures: u32,
}

/// MLE/MAP efficiency experiment over a rain-rate grid.
#[allow(clippy::too_many_arguments)]
pub fn estimator_efficiency_experiment(
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    link: &LinkConfig,
    prior: &RainPrior,
    rain_rates: &[f64],
    trials: u32,
    mode: NoiseMode,
    spec: RngSpec,
) -> Result<Vec<EfficiencyRow>> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let sigma = link.noise.sigma_db()?;
    let clear = AtmosphericState::rain_only(0.0);
    let nuisance = attenuation_vector(model, grid, &clear, &link.geometry)?;
    let mut rows = Vec::with_capacity(rain_rates.len());
    for (ri, &r) in rain_rates.iter().enumerate() {
        let truth = AtmosphericState::rain_only(r);
        let mut sq_mle = 0.0;
        let mut sq_map = 0.0;
        let mut iters = Vec::with_capacity(trials as usize);
        let mut failures = 0u32;
        for trial in 0..trials {
            let mut rng = spec.stream((ri as u64) << 32 | u64::from(trial)).rng();
            let obs = gen_observation(model, grid, &truth, link, mode, &mut rng)?;
            let mle = mle_newton(&obs, model, grid, &link.geometry, &nuisance, sigma)?;
            let map = map_newton(&obs, model, grid, &link.geometry, &nuisance, sigma, prior)?;
            sq_mle += (mle.estimate - r) * (mle.estimate - r);
            sq_map += (map.estimate - r) * (map.estimate - r);
            iters.push(mle.iterations);
            if !mle.converged {
                failures += 1;
            }
        }
        iters.sort_unstable();
        let crb = crb_rain_only(model, &truth, grid, &link.geometry, sigma)?;
        let jd = 1.0 / crb;
        let jp = prior_fisher_info(prior);
        let mle_rmse = (sq_mle / f64::from(trials)).sqrt();
        rows.push(EfficiencyRow {
            rain_rate: r,
            trials,
            mle_rmse,
            map_rmse: (sq_map / f64::from(trials)).sqrt(),
            crb_rmse: crb.sqrt(),
            bcrb_t1_rmse: bcrb(jd, jp, 1.0, 1)?.rmse,
            mle_ratio: mle_rmse / crb.sqrt(),
            mle_median_iterations: iters[iters.len() / 2],
            mle_convergence_failures: failures,
        });
    }
    Ok(rows)
}

/// CUSUM delay statistics at one rain rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayRow {
    pub rain_rate: f64,
    pub trials: u32,
    /// Wald approximation, minutes.
    pub wald_add: f64,
    /// Monte Carlo mean delay, minutes.
    pub mc_add: f64,
    /// MC over Wald.
    pub ratio: f64,
    /// Detection frequency within 5/10/30 minutes.
    pub pd_5min: f64,
    pub pd_10min: f64,
    pub pd_30min: f64,
}

/// Rain-onset delay experiment: constant-rate step at t = 0, Gaussian
/// dB-domain noise, delay counted in samples from onset (inclusive).
pub fn cusum_delay_experiment(
    rain_rates: &[f64],
    config: &CusumConfig,
    trials: u32,
    spec: RngSpec,
) -> Result<Vec<DelayRow>> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let horizon = 3000usize;
    let mut rows = Vec::with_capacity(rain_rates.len());
    for (ri, &r) in rain_rates.iter().enumerate() {
        let wald = add_wald(r, config)?;
        let mu_r = config.mean_attenuation(r);
        let mut delays = Vec::with_capacity(trials as usize);
        for trial in 0..trials {
            let mut rng = spec.stream((ri as u64) << 32 | u64::from(trial)).rng();
            let mut state = CusumState::default();
            let mut delay = horizon;
            for step in 1..=horizon {
                let a = mu_r + config.sigma_db * standard_normal(&mut rng);
                state = cusum_update(state, a, config)?;
                if state.alarmed {
                    delay = step;
                    break;
                }
            }
            delays.push(delay as f64);
        }
        let mc_add = delays.iter().sum::<f64>() / f64::from(trials);
        let within = |w: f64| delays.iter().filter(|d| **d <= w).count() as f64 / f64::from(trials);
        rows.push(DelayRow {
            rain_rate: r,
            trials,
            wald_add: wald,
            mc_add,
            ratio: mc_add / wald,
            pd_5min: within(5.0),
            pd_10min: within(10.0),
            pd_30min: within(30.0),
        });
    }
    Ok(rows)
}

/// Gauss–Markov-onset variant: the post-onset rain follows the prior's
/// temporal process instead of a constant step. Returns the MC mean delay.
pub fn cusum_gauss_markov_delay(
    prior: &RainPrior,
    config: &CusumConfig,
    trials: u32,
    spec: RngSpec,
) -> Result<f64> {
    let horizon = 3000usize;
    let mut total = 0.0;
    for trial in 0..trials {
        let mut rng = spec.stream(u64::from(trial)).rng();
        let rain = gen_rain_series(prior, horizon, &mut rng);
        let mut state = CusumState::default();
        let mut delay = horizon;
        for (i, &r) in rain.iter().enumerate() {
            let a = config.mean_attenuation(r) + config.sigma_db * standard_normal(&mut rng);
            state = cusum_update(state, a, config)?;
            if state.alarmed {
                delay = i + 1;
                break;
            }
        }
        total += delay as f64;
    }
    Ok(total / f64::from(trials))
}

/// Empirical mean time to false alarm under clear sky (zero-mean Gaussian
/// samples), in samples.
pub fn arl0_experiment(config: &CusumConfig, runs: u32, spec: RngSpec) -> Result<f64> {
    if runs == 0 {
        return Err(Error::Config("need at least one run".into()));
    }
    let cap = 2_000_000usize;
    let mut total = 0.0;
    for run in 0..runs {
        let mut rng = spec.stream(u64::from(run)).rng();
        let mut state = CusumState::default();
        let mut steps = cap;
        for step in 1..=cap {
            let a = config.sigma_db * standard_normal(&mut rng);
            state = cusum_update(state, a, config)?;
            if state.alarmed {
                steps = step;
                break;
            }
        }
        total += steps as f64;
    }
    Ok(total / f64::from(runs))
}

/// Multi-link bound scaling (pure bound evaluation, no sampling).
pub fn multilink_scaling_experiment(
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    link: &LinkConfig,
    prior: &RainPrior,
    rain_rate: f64,
    t_window: u32,
    n_links: &[u32],
) -> Result<Vec<(u32, f64)>> {
    let sigma = link.noise.sigma_db()?;
    let truth = AtmosphericState::rain_only(rain_rate);
    let jd = rain_information(model, &truth, grid, &link.geometry, sigma)?;
    let jp = prior_fisher_info(prior);
    let g_t = temporal_gain(prior.temporal_rho, t_window);
    n_links
        .iter()
        .map(|&n| Ok((n, bcrb(jd, jp, g_t, n)?.rmse)))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in points {
        num += (x.ln() - mx) * (y.ln() - my);
        den += (x.ln() - mx) * (x.ln() - mx);
    }
    num / den
}

/// Multi-link fusion of per-link MLEs against the pooled-information
/// prediction `1/√(Σ J_D)`. Returns `(mc_rmse, predicted_rmse)`.
pub fn fusion_experiment(
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    link: &LinkConfig,
    rain_rate: f64,
    n_links: u32,
    trials: u32,
    spec: RngSpec,
) -> Result<(f64, f64)> {
    let sigma = link.noise.sigma_db()?;
    let truth = AtmosphericState::rain_only(rain_rate);
    let clear = AtmosphericState::rain_only(0.0);
    let nuisance = attenuation_vector(model, grid, &clear, &link.geometry)?;
    let jd = rain_information(model, &truth, grid, &link.geometry, sigma)?;
    let weights = vec![jd; n_links as usize];
    let mut sq = 0.0;
    for trial in 0..trials {
        let mut estimates = Vec::with_capacity(n_links as usize);
        for n in 0..n_links {
            let mut rng = spec.stream(u64::from(trial) << 32 | u64::from(n)).rng();
            let obs = gen_observation(model, grid, &truth, link, NoiseMode::DbGaussian, &mut rng)?;
            estimates.push(mle_newton(&obs, model, grid, &link.geometry, &nuisance, sigma)?.estimate);
        }
        let fused = fuse_estimates(&estimates, &weights)?;
        sq += (fused - rain_rate) * (fused - rain_rate);
    }
    let predicted = (1.0 / (jd * f64::from(n_links))).sqrt();
    Ok(((sq / f64::from(trials)).sqrt(), predicted))
}
