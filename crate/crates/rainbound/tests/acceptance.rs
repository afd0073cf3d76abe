//! Acceptance suite: every release-gate criterion with its tolerance
//! pinned in code. Each test prints one line per criterion.
//!
//! Run with `cargo test -p rainbound --test acceptance -- --nocapture`.

use std::time::Instant;

use rainbound::alloc::{
    allocation_sweep, eta_high_snr, eta_star, regime_thresholds, AllocationContext,
    AllocationPolicy, Regime,
};
use rainbound::bounds::{
    bcrb, condition_number, crb_joint_schur, crb_rain_only, fim, gradient_coherence,
    prior_fisher_info, rain_information, rmin_solve, sideinfo_hierarchy, t95_exact, temporal_gain,
    temporal_gain_infinite, BandStats, RainPrior,
};
use rainbound::detect::{add_wald, CusumConfig};
use rainbound::estimate::{map_newton, mle_newton};
use rainbound::geometry::{
    rmin_of_elevation, sensing_optimal_elevation_closed, sensing_optimal_elevation_numeric,
    ElevationModel, ElevationNoise,
};
use rainbound::itu::{
    attenuation_vector, sensitivity_matrix, AtmosphericState, AttenuationModel, FrequencyGrid,
    ParamSet, PathGeometry,
};
use rainbound::mc::{
    cusum_delay_experiment, estimator_efficiency_experiment, jp_score_monte_carlo, log_log_slope,
    multilink_scaling_experiment, NoiseMode, RngSpec,
};
use rainbound::{LinkConfig, Result};

fn verdict(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn reference() -> (AttenuationModel, FrequencyGrid, PathGeometry) {
    (AttenuationModel::band_average(), FrequencyGrid::ku_default(), PathGeometry::reference())
}

#[test]
fn criterion_01_bound_table_reproduction() {
    let start = Instant::now();
    let (model, grid, geom) = reference();
    let prior = RainPrior::reference();
    let jp = prior_fisher_info(&prior);
    let jd = |r: f64| rain_information(&model, &AtmosphericState::rain_only(r), &grid, &geom, 1.0);

    let crb_rmin = rmin_solve(|r| crb_rain_only(&model, &AtmosphericState::rain_only(r), &grid, &geom, 1.0)).unwrap();
    let bcrb_rmin = |t: u32| -> f64 {
        let g_t = temporal_gain(prior.temporal_rho, t);
        rmin_solve(|r| -> Result<f64> { Ok(bcrb(jd(r)?, jp, g_t, 1)?.variance) }).unwrap()
    };
    let rmse20 = |t: Option<u32>| -> f64 {
        let j = jd(20.0).unwrap();
        match t {
            None => (1.0 / j).sqrt(),
            Some(t) => bcrb(j, jp, temporal_gain(prior.temporal_rho, t), 1).unwrap().rmse,
        }
    };

    let rmin = [crb_rmin, bcrb_rmin(1), bcrb_rmin(10), bcrb_rmin(30)];
    let rmse = [rmse20(None), rmse20(Some(1)), rmse20(Some(10)), rmse20(Some(30))];
    let rmin_expect = [4.26, 1.09, 0.99, 0.95];
    let rmse_expect = [3.19, 1.05, 0.83, 0.75];
    let elapsed = start.elapsed();

    let cells_ok = rmin
        .iter()
        .zip(rmin_expect.iter())
        .chain(rmse.iter().zip(rmse_expect.iter()))
        .all(|(got, want)| (got - want).abs() <= 0.05);
    let fast = elapsed.as_secs_f64() < 1.0;
    verdict(
        "criterion 01 bound-table reproduction",
        cells_ok && fast,
        &format!(
            "R_min = {rmin:.3?} (expect {rmin_expect:?} ±0.05), RMSE@20 = {rmse:.3?} (expect {rmse_expect:?} ±0.05), runtime {:.3} s < 1 s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_prior_information() {
    let prior = RainPrior::reference();
    let closed = prior_fisher_info(&prior);
    let mc = jp_score_monte_carlo(&prior, 1_000_000, RngSpec::new(2024, 0));
    let rel = (mc / closed - 1.0).abs();
    verdict(
        "criterion 02 prior Fisher information",
        (closed - 0.806).abs() <= 0.005 && rel < 0.01,
        &format!("closed form {closed:.4} (expect 0.806 ±0.005), 10⁶-draw MC {mc:.4}, rel err {:.3}%", rel * 100.0),
    );
}

#[test]
fn criterion_03_temporal_constants() {
    let g_inf = temporal_gain_infinite(0.95);
    let t95 = t95_exact(0.95);
    verdict(
        "criterion 03 temporal constants",
        (g_inf - 10.26).abs() <= 0.01 && (t95 - 29.2).abs() <= 0.1,
        &format!("G_inf = {g_inf:.4} (expect 10.26 ±0.01), T95 = {t95:.4} min (expect 29.2 ±0.1)"),
    );
}

#[test]
fn criterion_04_sensing_optimal_geometry() {
    let model = ElevationModel::reference();
    let theta_closed = sensing_optimal_elevation_closed(&model.link).unwrap();
    let no_gas = ElevationModel { include_gas: false, ..model.clone() };
    let theta_numeric = sensing_optimal_elevation_numeric(&no_gas, ElevationNoise::Realistic).unwrap();

    let r38 = rmin_of_elevation(38.0, &model, ElevationNoise::Realistic).unwrap();
    let r15 = rmin_of_elevation(15.0, &model, ElevationNoise::Realistic).unwrap();
    let r20 = rmin_of_elevation(20.0, &model, ElevationNoise::Realistic).unwrap();

    let ok = (9.2..=10.2).contains(&theta_closed)
        && (theta_numeric - theta_closed).abs() <= 0.2
        && (r15 - 2.67).abs() <= 0.1
        && (r38 / r15 - 1.58).abs() <= 0.05
        && (r20 - 2.92).abs() <= 0.1
        && (r38 / r20 - 1.45).abs() <= 0.05;
    verdict(
        "criterion 04 sensing-optimal geometry",
        ok,
        &format!(
            "θ* closed {theta_closed:.2}° (expect 9.2–10.2), numeric {theta_numeric:.2}° (|Δ| ≤ 0.2), R_min(15°) {r15:.3} ratio {:.3}, R_min(20°) {r20:.3} ratio {:.3}",
            r38 / r15,
            r38 / r20
        ),
    );
}

#[test]
fn criterion_05_multilink_scaling() {
    let (model, grid, _) = reference();
    let link = LinkConfig::reference();
    let prior = RainPrior::reference();
    let ns: Vec<u32> = (2..=43).map(|i| i * 5).collect();
    let rows = multilink_scaling_experiment(&model, &grid, &link, &prior, 20.0, 30, &ns).unwrap();
    let at_215 = rows.iter().find(|(n, _)| *n == 215).unwrap().1;
    let pts: Vec<(f64, f64)> = rows.iter().map(|(n, r)| (f64::from(*n), *r)).collect();
    let slope = log_log_slope(&pts);
    verdict(
        "criterion 05 multi-link scaling",
        (at_215 - 0.07).abs() <= 0.01 && (-0.52..=-0.48).contains(&slope),
        &format!("RMSE(N=215, T=30, R=20) = {at_215:.4} (expect 0.07 ±0.01), log-log slope {slope:.4} ∈ [−0.52, −0.48]"),
    );
}

#[test]
fn criterion_06_adaptive_allocation() {
    let ctx = AllocationContext::reference();
    let policy = AllocationPolicy::reference(1.0);
    let (r_sat, r_out) = regime_thresholds(&policy, &ctx).unwrap();

    let rates: Vec<f64> = (1..=120).map(f64::from).collect();
    let rows = allocation_sweep(&rates, &[1.0], &[0.05, 0.10, 0.20], &ctx).unwrap();
    let mut regimes = [false; 3];
    let mut dominated = true;
    let mut improvement_at_10 = f64::NAN;
    for row in &rows {
        match row.result.regime {
            Regime::FullSensing => regimes[0] = true,
            Regime::ThroughputTracking => regimes[1] = true,
            Regime::Outage => regimes[2] = true,
        }
        let best_feasible = row
            .baselines
            .iter()
            .filter(|b| b.feasible)
            .map(|b| b.bound_rmse)
            .fold(f64::INFINITY, f64::min);
        if row.result.regime != Regime::Outage
            && best_feasible.is_finite()
            && row.result.bound_rmse > best_feasible + 1e-12
        {
            dominated = false;
        }
        if (row.rain_rate - 10.0).abs() < 1e-9 {
            improvement_at_10 = 1.0 - row.result.bound_rmse / best_feasible;
        }
    }
    let ok = regimes.iter().all(|r| *r)
        && (r_sat - 35.0).abs() <= 5.0
        && (r_out - 65.0).abs() <= 5.0
        && dominated
        && improvement_at_10 > 0.30;
    verdict(
        "criterion 06 weather-adaptive allocation",
        ok,
        &format!(
            "regimes present {regimes:?}, R_sat {r_sat:.1} (expect 35 ±5), R_out {r_out:.1} (expect 65 ±5), adaptive dominates feasible baselines: {dominated}, improvement@10 {:.1}% > 30%",
            improvement_at_10 * 100.0
        ),
    );
}

#[test]
fn criterion_07_throughput_optimal_pilots() {
    let eta = rainbound::rate::throughput_optimal_eta(10.0, 302).unwrap();
    let mut ctx = AllocationContext::reference();
    ctx.link.clear_sky_snr = 1000.0;
    let policy = AllocationPolicy::new(2.0, 0.01, 0.99, 1e-4).unwrap();
    let exact = eta_star(0.0, &policy, &ctx).unwrap();
    let asym = eta_high_snr(1000.0, 2.0).unwrap();
    let gap = (exact.eta_star - asym.eta).abs();
    verdict(
        "criterion 07 throughput-optimal pilot fraction",
        (eta - 0.018).abs() <= 0.001 && gap <= 0.05,
        &format!("η*_rate = {eta:.4} (expect 0.018 ±0.001), high-SNR asymptote vs bisection gap {gap:.4} ≤ 0.05"),
    );
}

#[test]
fn criterion_08_cusum_detection() {
    let start = Instant::now();
    let (model, grid, _) = reference();
    let band = BandStats::from_coefficients(&model.band_average_coefficients(&grid).unwrap());
    let config = CusumConfig::new(5.0, band, 3.0, 1.0, 1e-3).unwrap();

    let add20 = add_wald(20.0, &config).unwrap();
    let add50 = add_wald(50.0, &config).unwrap();
    let rows = cusum_delay_experiment(&[15.0, 20.0, 50.0], &config, 5000, RngSpec::new(7, 0)).unwrap();
    let at = |r: f64| rows.iter().find(|d| (d.rain_rate - r).abs() < 1e-9).unwrap();
    let ratio20 = at(20.0).ratio;
    let ratio50 = at(50.0).ratio;
    let pd20_10 = at(20.0).pd_10min;
    let pd15_30 = at(15.0).pd_30min;
    let elapsed = start.elapsed().as_secs_f64();

    let ok = add20 < 8.0
        && add50 < 3.0
        && (1.0..=1.3).contains(&ratio20)
        && (1.0..=1.3).contains(&ratio50)
        && pd20_10 > 0.9
        && pd15_30 > 0.9
        && elapsed < 60.0;
    verdict(
        "criterion 08 CUSUM onset detection",
        ok,
        &format!(
            "ADD(20) {add20:.2} < 8 min, ADD(50) {add50:.2} < 3 min, MC/Wald {{20: {ratio20:.3}, 50: {ratio50:.3}}} ∈ [1.0, 1.3], P_d(20, 10 min) {pd20_10:.3} > 0.9, P_d(15, 30 min) {pd15_30:.3} > 0.9, runtime {elapsed:.1} s < 60 s"
        ),
    );
}

#[test]
fn criterion_09_estimator_efficiency() {
    let (model, grid, geom) = reference();
    let link = LinkConfig::reference();
    let prior = RainPrior::reference();

    // Noiseless recovery across six decades of rain intensity.
    let clear = attenuation_vector(&model, &grid, &AtmosphericState::rain_only(0.0), &geom).unwrap();
    let mut exact = true;
    for r in [0.5, 2.0, 5.0, 20.0, 50.0, 100.0] {
        let a = attenuation_vector(&model, &grid, &AtmosphericState::rain_only(r), &geom).unwrap();
        let rep = mle_newton(&a, &model, &grid, &geom, &clear, 1.0).unwrap();
        if (rep.estimate - r).abs() / r > 1e-6 {
            exact = false;
        }
        let rep_map = map_newton(&a, &model, &grid, &geom, &clear, 1e-3, &prior).unwrap();
        if (rep_map.estimate - r).abs() / r > 1e-3 {
            exact = false;
        }
    }

    let rows = estimator_efficiency_experiment(
        &model,
        &grid,
        &link,
        &prior,
        &[2.0, 20.0],
        10_000,
        NoiseMode::DbGaussian,
        RngSpec::new(31, 0),
    )
    .unwrap();
    let at2 = rows.iter().find(|r| r.rain_rate == 2.0).unwrap();
    let at20 = rows.iter().find(|r| r.rain_rate == 20.0).unwrap();

    let ok = exact
        && (at20.mle_ratio - 1.0).abs() <= 0.10
        && at2.map_rmse < at2.mle_rmse
        && at20.mle_median_iterations <= 5;
    verdict(
        "criterion 09 estimator efficiency",
        ok,
        &format!(
            "noiseless recovery ≤ 1e-6: {exact}, MLE RMSE@20 {:.3} vs √CRB {:.3} (ratio {:.3} within 10%), MAP {:.3} < MLE {:.3} at R = 2, median Newton iterations {}",
            at20.mle_rmse, at20.crb_rmse, at20.mle_ratio, at2.map_rmse, at2.mle_rmse, at20.mle_median_iterations
        ),
    );
}

#[test]
fn criterion_10_property_suites() {
    let full = AttenuationModel::per_subcarrier();
    let grid = FrequencyGrid::ku_default();
    let geom = PathGeometry::reference();

    // Analytic gradients against central finite differences.
    let mut fd_ok = true;
    for r in [1.0, 5.0, 20.0, 50.0] {
        let state = AtmosphericState::new(r, 7.5, 0.4, 0.0).unwrap();
        let g = sensitivity_matrix(&full, &state, &grid, &geom, ParamSet::all()).unwrap();
        let h = 1e-4;
        for col in 0..4 {
            let mut sp = state;
            let mut sm = state;
            match col {
                0 => {
                    sp.rain_rate += h;
                    sm.rain_rate -= h;
                }
                1 => {
                    sp.water_vapor += h;
                    sm.water_vapor -= h;
                }
                2 => {
                    sp.cloud_lwc += h;
                    sm.cloud_lwc -= h;
                }
                _ => {
                    sp.offset_db += h;
                    sm.offset_db -= h;
                }
            }
            let ap = attenuation_vector(&full, &grid, &sp, &geom).unwrap();
            let am = attenuation_vector(&full, &grid, &sm, &geom).unwrap();
            for k in 0..grid.len() {
                let fd = (ap[k] - am[k]) / (2.0 * h);
                if (g[(k, col)] - fd).abs() / g[(k, col)].abs().max(1e-9) >= 1e-5 {
                    fd_ok = false;
                }
            }
        }
    }

    // Schur complement never undercuts the rain-only CRB: 100 random states.
    let mut seed = 0xD1B54A32D192ED03u64;
    let mut uniform = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut schur_ok = true;
    for _ in 0..100 {
        let state = AtmosphericState::new(
            0.5 + 100.0 * uniform(),
            15.0 * uniform(),
            1.5 * uniform(),
            2.0 * uniform() - 1.0,
        )
        .unwrap();
        let rain_only = crb_rain_only(&full, &state, &grid, &geom, 1.0).unwrap();
        let set = ParamSet { rain: true, water_vapor: uniform() > 0.5, cloud: uniform() > 0.5, offset: true };
        let g = sensitivity_matrix(&full, &state, &grid, &geom, set).unwrap();
        match crb_joint_schur(&fim(&g, 1.0).unwrap()) {
            Ok(joint) => {
                if joint < rain_only * (1.0 - 1e-10) {
                    schur_ok = false;
                }
            }
            Err(rainbound::Error::Unidentifiable(_)) => {}
            Err(_) => schur_ok = false,
        }
    }

    // Identifiability hierarchy: ordering plus κ > 1e4 beyond two unknowns.
    let state20 = AtmosphericState::new(20.0, 7.5, 0.4, 0.0).unwrap();
    let wide = FrequencyGrid::ku(20);
    let rows = sideinfo_hierarchy(&full, &state20, &wide, &geom, 1.0).unwrap();
    let ordering_ok = rows.windows(2).all(|w| {
        w[1].kappa > w[0].kappa
            && (w[1].rel_crb_excess_percent >= w[0].rel_crb_excess_percent
                || w[1].rel_crb_excess_percent.is_infinite())
    });
    let kappa_ok = rows.iter().filter(|r| r.params.len() >= 3).all(|r| r.kappa > 1e4);

    // Spectral coherence of the rain and water-vapor gradients.
    let set_rw = ParamSet { rain: true, water_vapor: true, cloud: false, offset: false };
    let g_ku = sensitivity_matrix(&full, &state20, &grid, &geom, set_rw).unwrap();
    let mu_ku = gradient_coherence(&g_ku.column(0), &g_ku.column(1)).unwrap();
    let kuka = FrequencyGrid::ku_plus_ka(5, 3);
    let g_kuka = sensitivity_matrix(&full, &state20, &kuka, &geom, set_rw).unwrap();
    let mu_kuka = gradient_coherence(&g_kuka.column(0), &g_kuka.column(1)).unwrap();
    let coherence_ok = (mu_ku - 0.97).abs() <= 0.05 && mu_kuka < mu_ku;

    // Temporal bound gain for strong correlation.
    let band = AttenuationModel::band_average();
    let jd20 = rain_information(&band, &AtmosphericState::rain_only(20.0), &grid, &geom, 1.0).unwrap();
    let jp = prior_fisher_info(&RainPrior::reference());
    let mut temporal_ok = true;
    for rho in [0.86, 0.90, 0.95, 0.99] {
        let ratio = bcrb(jd20, jp, temporal_gain(rho, 30), 1).unwrap().variance * jd20;
        if ratio >= 0.5 {
            temporal_ok = false;
        }
    }

    // Bit-identical reruns under a fixed seed.
    let link = LinkConfig::reference();
    let prior = RainPrior::reference();
    let run = || {
        estimator_efficiency_experiment(
            &band,
            &grid,
            &link,
            &prior,
            &[20.0],
            500,
            NoiseMode::DbGaussian,
            RngSpec::new(99, 1),
        )
        .unwrap()
    };
    let reproducible = run() == run();

    // Condition-number route against singular values (independent path).
    // The Gram route squares the conditioning, so f64 supports the 1e-8
    // agreement only while κ·ε stays well below it (κ ≲ 1e7); the all-four
    // set at κ ~ 1e9 is validated by ordering above instead.
    let mut eig_vs_svd_ok = true;
    for set in [
        ParamSet { rain: true, water_vapor: false, cloud: false, offset: true },
        ParamSet { rain: true, water_vapor: true, cloud: false, offset: false },
        ParamSet { rain: true, water_vapor: false, cloud: true, offset: false },
        ParamSet { rain: true, water_vapor: true, cloud: true, offset: false },
    ] {
        let g = sensitivity_matrix(&full, &state20, &wide, &geom, set).unwrap();
        let kappa_eig = condition_number(&fim(&g, 1.0).unwrap());
        let sv = rainbound::linalg::singular_values(&g);
        let kappa_sv = (sv[0] / sv[sv.len() - 1]).powi(2);
        if kappa_eig < 1e7 && (kappa_eig / kappa_sv - 1.0).abs() >= 1e-8 {
            eig_vs_svd_ok = false;
        }
    }

    let ok = fd_ok && schur_ok && ordering_ok && kappa_ok && coherence_ok && temporal_ok && reproducible && eig_vs_svd_ok;
    verdict(
        "criterion 10 property suites",
        ok,
        &format!(
            "gradients-vs-FD {fd_ok}, Schur ≥ rain-only (100 states) {schur_ok}, hierarchy ordering {ordering_ok}, κ > 1e4 for ≥3 unknowns {kappa_ok}, coherence Ku {mu_ku:.3} (0.97 ±0.05) > Ku+Ka {mu_kuka:.3}, temporal ratio < 0.5 {temporal_ok}, bit-identical reruns {reproducible}, eig-vs-SVD κ {eig_vs_svd_ok}"
        ),
    );
}
