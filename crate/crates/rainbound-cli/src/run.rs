//! Subcommand runners. Each emits its CSV/JSON set plus a `manifest.json`
//! recording the resolved-config hash, seed and produced files.

use crate::config::RunConfig;
use crate::emit::{write_csv, write_json, Cell};
use crate::ingest::IngestedSeries;
use crate::CliResult;
use rainbound::alloc::{allocation_sweep, regime_thresholds, AllocationPolicy};
use rainbound::bounds::{
    bcrb, crb_rain_only, pareto_frontier, prior_fisher_info, rain_information, rmin_closed_form,
    rmin_solve, sideinfo_hierarchy, temporal_gain,
};
use rainbound::detect::{
    add_wald, arl0_siegmund, arl0_wald, detection_probability, run_series, CusumConfig,
};
use rainbound::estimate::{map_newton, mle_newton};
use rainbound::geometry::{
    elevation_sweep, optimal_locus, rmin_of_elevation, sensing_optimal_elevation_closed,
    sensing_optimal_elevation_numeric, ElevationNoise,
};
use rainbound::itu::attenuation_vector;
use rainbound::mc::{
    cusum_delay_experiment, estimator_efficiency_experiment, fusion_experiment, gen_observation,
    gen_rain_series, jp_score_monte_carlo, log_log_slope, multilink_scaling_experiment, NoiseMode,
    RngSpec,
};
use rainbound::{AtmosphericState, FrequencyGrid, Result};
use serde_json::json;
use sha2::{Digest, Sha256};

pub struct RunContext {
    pub config: RunConfig,
    pub config_source: String,
    pub out_dir: std::path::PathBuf,
}

impl RunContext {
    pub fn rng_spec(&self) -> RngSpec {
        RngSpec::new(self.config.mc.seed, self.config.mc.stream_id)
    }

    pub fn noise_mode(&self) -> NoiseMode {
        match self.config.mc.noise_mode.as_str() {
            "chi2" => NoiseMode::ChiSquaredPilot,
            _ => NoiseMode::DbGaussian,
        }
    }

    fn write_manifest(&self, subcommand: &str, files: &[String]) -> CliResult<()> {
        let resolved = self.config.to_toml();
        let mut hasher = Sha256::new();
        hasher.update(resolved.as_bytes());
        let hash = hex_digest(&hasher.finalize());
        let manifest = json!({
            "subcommand": subcommand,
            "crate_version": env!("CARGO_PKG_VERSION"),
            "seed": self.config.mc.seed,
            "stream_id": self.config.mc.stream_id,
            "p838_mode": self.config.band.p838_mode,
            "noise_mode": self.config.mc.noise_mode,
            "config_source": self.config_source,
            "config_sha256": hash,
            "files": files,
        });
        write_json(&self.out_dir, "manifest.json", &manifest)?;
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub fn run_bounds(ctx: &RunContext) -> CliResult<()> {
    let cfg = &ctx.config;
    let model = cfg.attenuation_model()?;
    let grid = cfg.frequency_grid()?;
    let geom = cfg.geometry()?;
    let prior = cfg.rain_prior()?;
    let link = cfg.link_config()?;
    let sigma = cfg.link.sigma_n_db;
    let jp = prior_fisher_info(&prior);
    let rho = prior.temporal_rho;
    let jd = |r: f64| -> Result<f64> {
        rain_information(&model, &AtmosphericState::rain_only(r), &grid, &geom, sigma)
    };

    let mut files = Vec::new();

    // Bound RMSE against rain rate for the standard CRB and three windows.
    let mut rows = Vec::new();
    for r in cfg.rain_grid() {
        let j = jd(r)?;
        rows.push(vec![
            Cell::F(r),
            Cell::F((1.0 / j).sqrt()),
            Cell::F(bcrb(j, jp, temporal_gain(rho, 1), 1)?.rmse),
            Cell::F(bcrb(j, jp, temporal_gain(rho, 10), 1)?.rmse),
            Cell::F(bcrb(j, jp, temporal_gain(rho, 30), 1)?.rmse),
        ]);
    }
    files.push(write_csv(
        &ctx.out_dir,
        "crb_vs_R.csv",
        &[
            "rain_rate_mm_per_h",
            "crb_rmse_mm_per_h",
            "bcrb_t1_rmse_mm_per_h",
            "bcrb_t10_rmse_mm_per_h",
            "bcrb_t30_rmse_mm_per_h",
        ],
        &rows,
    )?);

    // Minimum detectable rain rate table.
    let mut rmin_rows = Vec::new();
    let crb_rmin = rmin_solve(|r| crb_rain_only(&model, &AtmosphericState::rain_only(r), &grid, &geom, sigma))?;
    rmin_rows.push(vec![
        Cell::from("standard_crb"),
        Cell::F(crb_rmin),
        Cell::F((1.0 / jd(20.0)?).sqrt()),
    ]);
    for t in [1u32, 10, 30] {
        let g_t = temporal_gain(rho, t);
        let rmin = rmin_solve(|r| -> Result<f64> { Ok(bcrb(jd(r)?, jp, g_t, 1)?.variance) })?;
        rmin_rows.push(vec![
            Cell::S(format!("bcrb_t{t}")),
            Cell::F(rmin),
            Cell::F(bcrb(jd(20.0)?, jp, g_t, 1)?.rmse),
        ]);
    }
    let nominal = cfg.nominal_band_stats();
    let l_eff = geom.anchored_rain_path_km()?;
    let slope20 = nominal.k_bar * nominal.alpha_bar * 20f64.powf(nominal.alpha_bar - 1.0) * l_eff;
    rmin_rows.push(vec![
        Cell::from("closed_form_nominal"),
        Cell::F(rmin_closed_form(sigma, grid.len(), &nominal, l_eff)),
        Cell::F(sigma / ((grid.len() as f64).sqrt() * slope20)),
    ]);
    files.push(write_csv(
        &ctx.out_dir,
        "rmin_table.csv",
        &["configuration", "rmin_mm_per_h", "rmse_at_20_mm_per_h"],
        &rmin_rows,
    )?);

    // Side-information hierarchy on the wide per-subcarrier grid.
    let wide = FrequencyGrid::new(
        {
            let k = 20usize;
            (0..k)
                .map(|i| cfg.band.low_ghz + (cfg.band.high_ghz - cfg.band.low_ghz) * i as f64 / (k - 1) as f64)
                .collect()
        },
        cfg.polarization(),
    )?;
    let state = AtmosphericState::new(20.0, cfg.link.water_vapor_gm3, cfg.link.cloud_lwc_gm3, 0.0)?;
    let full = rainbound::AttenuationModel { mode: rainbound::itu::P838Mode::PerSubcarrier, table: model.table.clone() };
    let rows = sideinfo_hierarchy(&full, &state, &wide, &geom, sigma)?;
    let side_rows: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::S(r.label.clone()),
                Cell::F(r.rel_crb_excess_percent),
                Cell::F(r.kappa),
                Cell::from(r.status),
            ]
        })
        .collect();
    files.push(write_csv(
        &ctx.out_dir,
        "sideinfo_table.csv",
        &["unknown_params", "rel_crb_excess_percent", "kappa", "status"],
        &side_rows,
    )?);

    // Sensing-throughput Pareto frontier at the R = 20 operating point.
    let etas: Vec<f64> = (1..=50).map(|i| i as f64 * 0.01).collect();
    let frontier = pareto_frontier(&model, &grid, 20.0, &prior, &link, cfg.prior.window_minutes, &etas)?;
    let pareto_rows: Vec<Vec<Cell>> = frontier
        .iter()
        .map(|p| {
            vec![
                Cell::F(20.0),
                Cell::F(p.eta),
                Cell::U(u64::from(p.n_pilots)),
                Cell::F(p.spectral_efficiency),
                Cell::F(p.crb_rmse),
                Cell::F(p.bcrb_rmse),
            ]
        })
        .collect();
    files.push(write_csv(
        &ctx.out_dir,
        "pareto.csv",
        &[
            "rain_rate_mm_per_h",
            "pilot_fraction",
            "pilot_symbols",
            "spectral_efficiency_bit_per_s_per_hz",
            "crb_rmse_mm_per_h",
            "bcrb_t_rmse_mm_per_h",
        ],
        &pareto_rows,
    )?);

    ctx.write_manifest("bounds", &files)
}

pub fn run_geometry(ctx: &RunContext) -> CliResult<()> {
    let cfg = &ctx.config;
    let model_gas = cfg.elevation_model(true)?;
    let model_nogas = cfg.elevation_model(false)?;

    let mut files = Vec::new();

    let sweep = elevation_sweep(&model_gas, &cfg.elevation_grid())?;
    let rows: Vec<Vec<Cell>> = sweep
        .points
        .iter()
        .map(|p| {
            vec![
                Cell::F(p.elevation_deg),
                Cell::F(p.rmin_realistic),
                Cell::F(p.rmin_constant_noise),
                Cell::B(p.extrapolation_zone),
                Cell::F(model_gas.rain_path_km(p.elevation_deg).unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    files.push(write_csv(
        &ctx.out_dir,
        "rmin_vs_elevation.csv",
        &[
            "elevation_deg",
            "rmin_realistic_mm_per_h",
            "rmin_constant_noise_mm_per_h",
            "p618_extrapolation_zone",
            "anchored_rain_path_km",
        ],
        &rows,
    )?);

    let rates: Vec<f64> = (0..12).map(|i| 3.0 + 2.0 * i as f64).collect();
    let locus = optimal_locus(&model_nogas, &rates)?;
    let locus_gas = optimal_locus(&model_gas, &rates)?;
    let locus_rows: Vec<Vec<Cell>> = locus
        .iter()
        .zip(locus_gas.iter())
        .map(|(p, pg)| {
            vec![
                Cell::F(p.rain_rate),
                Cell::F(p.theta_sensing_deg),
                Cell::F(pg.theta_sensing_deg),
                Cell::F(p.theta_comm_deg),
                Cell::F(p.gap_deg),
            ]
        })
        .collect();
    files.push(write_csv(
        &ctx.out_dir,
        "optimal_locus.csv",
        &[
            "rain_rate_mm_per_h",
            "theta_sens_rain_only_deg",
            "theta_sens_with_gas_deg",
            "theta_comm_deg",
            "gap_rain_only_deg",
        ],
        &locus_rows,
    )?);

    let theta_closed = sensing_optimal_elevation_closed(&model_gas.link)?;
    let theta_numeric = sensing_optimal_elevation_numeric(&model_nogas, ElevationNoise::Realistic)?;
    let r38 = rmin_of_elevation(cfg.link.base_elevation_deg, &model_gas, ElevationNoise::Realistic)?;
    let r20 = rmin_of_elevation(20.0, &model_gas, ElevationNoise::Realistic)?;
    let r15 = rmin_of_elevation(15.0, &model_gas, ElevationNoise::Realistic)?;
    let report = json!({
        "theta_star_closed_deg": theta_closed,
        "theta_star_numeric_no_gas_deg": theta_numeric,
        "rmin_base_mm_per_h": r38,
        "rmin_20deg_mm_per_h": r20,
        "rmin_15deg_mm_per_h": r15,
        "improvement_15deg": r38 / r15,
        "improvement_20deg": r38 / r20,
        "p618_floor_deg": sweep.p618_floor_deg,
        "terminal_floor_deg": sweep.terminal_floor_deg,
    });
    files.push(write_json(&ctx.out_dir, "geometry_report.json", &report)?);

    ctx.write_manifest("geometry", &files)
}

pub fn run_alloc(ctx: &RunContext) -> CliResult<()> {
    let cfg = &ctx.config;
    let alloc_ctx = cfg.allocation_context()?;
    let rates = cfg.rain_grid();

    let mut files = Vec::new();

    let rows = allocation_sweep(&rates, &cfg.policy.c_min_grid, &cfg.policy.fixed_etas, &alloc_ctx)?;
    let mut eta_rows = Vec::new();
    let mut baseline_rows = Vec::new();
    for row in &rows {
        eta_rows.push(vec![
            Cell::F(row.rain_rate),
            Cell::F(row.c_min),
            Cell::F(row.result.eta_star),
            Cell::from(row.result.regime.label()),
            Cell::F(row.result.achieved_c),
            Cell::F(row.result.bound_rmse),
            Cell::U(u64::from(row.result.bisection_iterations)),
        ]);
        for b in &row.baselines {
            baseline_rows.push(vec![
                Cell::F(row.rain_rate),
                Cell::F(row.c_min),
                Cell::F(b.eta),
                Cell::F(b.achieved_c),
                Cell::B(b.feasible),
                Cell::F(b.bound_rmse),
            ]);
        }
    }
    files.push(write_csv(
        &ctx.out_dir,
        "eta_star_vs_R.csv",
        &[
            "rain_rate_mm_per_h",
            "c_min_bit_per_s_per_hz",
            "eta_star",
            "regime",
            "achieved_c_bit_per_s_per_hz",
            "bound_rmse_mm_per_h",
            "bisection_iterations",
        ],
        &eta_rows,
    )?);
    files.push(write_csv(
        &ctx.out_dir,
        "fixed_eta_baselines.csv",
        &[
            "rain_rate_mm_per_h",
            "c_min_bit_per_s_per_hz",
            "eta",
            "achieved_c_bit_per_s_per_hz",
            "satisfies_c_min",
            "bound_rmse_mm_per_h",
        ],
        &baseline_rows,
    )?);

    let mut threshold_rows = Vec::new();
    for &c_min in &cfg.policy.c_min_grid {
        let policy = AllocationPolicy::new(c_min, cfg.policy.eta_min, cfg.policy.eta_max, cfg.policy.tolerance)?;
        let (r_sat, r_out) = regime_thresholds(&policy, &alloc_ctx)?;
        threshold_rows.push(vec![Cell::F(c_min), Cell::F(r_sat), Cell::F(r_out)]);
    }
    files.push(write_csv(
        &ctx.out_dir,
        "regime_thresholds.csv",
        &["c_min_bit_per_s_per_hz", "r_sat_mm_per_h", "r_out_mm_per_h"],
        &threshold_rows,
    )?);

    ctx.write_manifest("alloc", &files)
}

pub fn run_detect(ctx: &RunContext, series: Option<&IngestedSeries>) -> CliResult<()> {
    let cfg = &ctx.config;
    let band = cfg.band_stats()?;
    let l_eff = cfg.geometry()?.anchored_rain_path_km()?;
    let config = CusumConfig::new(
        cfg.detect.design_rate_mmh,
        band,
        l_eff,
        cfg.detector_sigma_db(),
        cfg.detect.p_fa,
    )?;

    let mut files = Vec::new();

    let rates = [5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0];
    let mc = cusum_delay_experiment(&rates, &config, cfg.mc.cusum_trials, ctx.rng_spec())?;
    let mut rows: Vec<Vec<Cell>> = Vec::with_capacity(mc.len());
    for d in &mc {
        rows.push(vec![
            Cell::F(d.rain_rate),
            Cell::F(d.wald_add),
            Cell::F(d.mc_add),
            Cell::F(d.ratio),
            Cell::F(d.pd_5min),
            Cell::F(d.pd_10min),
            Cell::F(d.pd_30min),
            Cell::F(detection_probability(d.rain_rate, 10.0, &config)?),
            Cell::F(detection_probability(d.rain_rate, 30.0, &config)?),
        ]);
    }
    files.push(write_csv(
        &ctx.out_dir,
        "add_table.csv",
        &[
            "rain_rate_mm_per_h",
            "wald_add_min",
            "mc_add_min",
            "mc_over_wald",
            "pd_mc_5min",
            "pd_mc_10min",
            "pd_mc_30min",
            "pd_analytic_10min",
            "pd_analytic_30min",
        ],
        &rows,
    )?);

    let detector = json!({
        "design_rate_mm_per_h": config.design_rate,
        "mu_d_db": config.mu_d_db,
        "threshold_db": config.threshold_db,
        "sigma_db": config.sigma_db,
        "p_fa": config.p_fa,
        "arl0_wald_samples": arl0_wald(&config),
        "arl0_siegmund_samples": arl0_siegmund(&config),
        "add_wald_20_min": add_wald(20.0, &config)?,
        "add_wald_50_min": add_wald(50.0, &config)?,
    });
    files.push(write_json(&ctx.out_dir, "detector.json", &detector)?);

    if let Some(series) = series {
        let outcome = run_series(&series.attenuation_db, &config)?;
        let rows: Vec<Vec<Cell>> = series
            .timestamps
            .iter()
            .zip(series.attenuation_db.iter())
            .zip(outcome.trajectory.iter())
            .enumerate()
            .map(|(i, ((ts, a), s))| {
                vec![
                    Cell::U(i as u64),
                    Cell::S(ts.to_rfc3339()),
                    Cell::F(*a),
                    Cell::F(*s),
                    Cell::B(outcome.alarm_time.map(|t| i >= t).unwrap_or(false)),
                ]
            })
            .collect();
        files.push(write_csv(
            &ctx.out_dir,
            "series_detection.csv",
            &["index", "timestamp_iso8601", "attenuation_db", "statistic_db", "alarmed"],
            &rows,
        )?);
        let summary = json!({
            "samples": series.attenuation_db.len(),
            "alarm_index": outcome.alarm_time,
            "alarm_timestamp": outcome.alarm_time.map(|t| series.timestamps[t].to_rfc3339()),
            "gaps": series.gaps.iter().map(|g| json!({"index": g.index, "minutes": g.minutes})).collect::<Vec<_>>(),
        });
        files.push(write_json(&ctx.out_dir, "detection_summary.json", &summary)?);
    }

    ctx.write_manifest("detect", &files)
}

pub fn run_estimate(ctx: &RunContext, series: Option<&IngestedSeries>) -> CliResult<()> {
    let cfg = &ctx.config;
    let model = cfg.attenuation_model()?;
    let grid = cfg.frequency_grid()?;
    let link = cfg.link_config()?;
    let prior = cfg.rain_prior()?;

    let mut files = Vec::new();

    let rates = [2.0, 5.0, 10.0, 20.0, 50.0];
    let rows = estimator_efficiency_experiment(
        &model,
        &grid,
        &link,
        &prior,
        &rates,
        cfg.mc.estimator_trials,
        ctx.noise_mode(),
        ctx.rng_spec(),
    )?;
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::F(r.rain_rate),
                Cell::U(u64::from(r.trials)),
                Cell::F(r.mle_rmse),
                Cell::F(r.map_rmse),
                Cell::F(r.crb_rmse),
                Cell::F(r.bcrb_t1_rmse),
                Cell::F(r.mle_ratio),
                Cell::U(u64::from(r.mle_median_iterations)),
                Cell::U(u64::from(r.mle_convergence_failures)),
            ]
        })
        .collect();
    files.push(write_csv(
        &ctx.out_dir,
        "efficiency_table.csv",
        &[
            "rain_rate_mm_per_h",
            "trials",
            "mle_rmse_mm_per_h",
            "map_rmse_mm_per_h",
            "crb_rmse_mm_per_h",
            "bcrb_t1_rmse_mm_per_h",
            "mle_rmse_over_crb",
            "mle_median_iterations",
            "mle_convergence_failures",
        ],
        &table,
    )?);

    if let Some(series) = series {
        // Scalar per-minute attenuation: single-band inversion at the grid
        // center, rain-attributed (no nuisance subtraction).
        let center_grid = FrequencyGrid::new(vec![grid.center()], cfg.polarization())?;
        let sigma = cfg.link.sigma_n_db;
        let geom = cfg.geometry()?;
        let mut rows = Vec::with_capacity(series.attenuation_db.len());
        for (i, (&a, ts)) in series.attenuation_db.iter().zip(series.timestamps.iter()).enumerate() {
            let obs = [a];
            let mle = mle_newton(&obs, &model, &center_grid, &geom, &[0.0], sigma)?;
            let map = map_newton(&obs, &model, &center_grid, &geom, &[0.0], sigma, &prior)?;
            rows.push(vec![
                Cell::U(i as u64),
                Cell::S(ts.to_rfc3339()),
                Cell::F(a),
                Cell::F(mle.estimate),
                Cell::F(map.estimate),
            ]);
        }
        files.push(write_csv(
            &ctx.out_dir,
            "series_estimates.csv",
            &["index", "timestamp_iso8601", "attenuation_db", "r_mle_mm_per_h", "r_map_mm_per_h"],
            &rows,
        )?);
    }

    ctx.write_manifest("estimate", &files)
}

pub fn run_mc(ctx: &RunContext) -> CliResult<()> {
    let cfg = &ctx.config;
    let model = cfg.attenuation_model()?;
    let grid = cfg.frequency_grid()?;
    let link = cfg.link_config()?;
    let prior = cfg.rain_prior()?;
    let spec = ctx.rng_spec();

    let mut files = Vec::new();

    let ns: Vec<u32> = (2..=43).map(|i| i * 5).collect();
    let scaling = multilink_scaling_experiment(&model, &grid, &link, &prior, 20.0, cfg.prior.window_minutes, &ns)?;
    let rows: Vec<Vec<Cell>> = scaling
        .iter()
        .map(|(n, r)| vec![Cell::U(u64::from(*n)), Cell::F(*r)])
        .collect();
    files.push(write_csv(
        &ctx.out_dir,
        "multilink_scaling.csv",
        &["n_links", "bcrb_rmse_mm_per_h"],
        &rows,
    )?);
    let slope = log_log_slope(
        &scaling.iter().map(|(n, r)| (f64::from(*n), *r)).collect::<Vec<_>>(),
    );

    // Generator calibration: dB-domain sample std under both noise modes.
    let truth = AtmosphericState::rain_only(0.0);
    let mean = attenuation_vector(&model, &grid, &truth, &link.geometry)?;
    let sample_std = |mode: NoiseMode, stream: u64| -> Result<f64> {
        let mut rng = spec.stream(stream).rng();
        let mut pilot_link = link.clone();
        if mode == NoiseMode::ChiSquaredPilot {
            pilot_link.noise = rainbound::NoiseModel::pilot(
                pilot_link.n_pilots(),
                cfg.clear_sky_snr_linear(),
                cfg.link.sigma_sys_db,
            );
        }
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        let mut n = 0.0;
        for _ in 0..4000 {
            let obs = gen_observation(&model, &grid, &truth, &pilot_link, mode, &mut rng)?;
            for (o, m) in obs.iter().zip(mean.iter()) {
                let d = o - m;
                acc += d;
                acc2 += d * d;
                n += 1.0;
            }
        }
        Ok((acc2 / n - (acc / n) * (acc / n)).sqrt())
    };
    let db_std = sample_std(NoiseMode::DbGaussian, 101)?;
    let chi2_std = sample_std(NoiseMode::ChiSquaredPilot, 102)?;

    // Rain-series statistics.
    let mut rng = spec.stream(103).rng();
    let series = gen_rain_series(&prior, 200_000, &mut rng);
    let logs: Vec<f64> = series.iter().map(|r| r.ln()).collect();
    let n = logs.len() as f64;
    let mean_ln = logs.iter().sum::<f64>() / n;
    let var_ln = logs.iter().map(|x| (x - mean_ln) * (x - mean_ln)).sum::<f64>() / n;
    let mut lag1 = 0.0;
    for w in logs.windows(2) {
        lag1 += (w[0] - mean_ln) * (w[1] - mean_ln);
    }
    lag1 /= (n - 1.0) * var_ln;
    let mean_r = series.iter().sum::<f64>() / n;

    let jp_closed = prior_fisher_info(&prior);
    let jp_mc = jp_score_monte_carlo(&prior, 1_000_000, spec.stream(104));

    let (fused_rmse, fused_pred) = fusion_experiment(
        &model,
        &grid,
        &link,
        20.0,
        cfg.mc.fusion_links,
        200,
        spec.stream(105),
    )?;

    let summary = json!({
        "multilink": {
            "rmse_at_n215_mm_per_h": scaling.iter().find(|(n, _)| *n == 215).map(|(_, r)| *r),
            "loglog_slope": slope,
        },
        "noise_calibration": {
            "db_gaussian_sample_std_db": db_std,
            "chi2_pilot_sample_std_db": chi2_std,
            "configured_sigma_db": cfg.link.sigma_n_db,
        },
        "rain_series": {
            "lag1_autocorrelation": lag1,
            "stationary_mean_mm_per_h": mean_r,
            "target_mean_mm_per_h": prior.mean_rate,
        },
        "prior_information": {
            "closed_form": jp_closed,
            "monte_carlo_1e6": jp_mc,
            "relative_error": (jp_mc / jp_closed - 1.0).abs(),
        },
        "fusion": {
            "links": cfg.mc.fusion_links,
            "trials": 200,
            "mc_rmse_mm_per_h": fused_rmse,
            "predicted_rmse_mm_per_h": fused_pred,
        },
    });
    files.push(write_json(&ctx.out_dir, "mc_summary.json", &summary)?);

    ctx.write_manifest("mc", &files)
}
