//! Rain-rate point estimation.
//!
//! The MLE minimizes `Σ_k (Â_k − k_k R^{α_k} L_eff − c_k)²` over `R > 0`
//! with known nuisance terms `c_k`; the MAP adds the log-normal prior
//! penalty `(ln R − μ_ln)²/(2σ_ln²) + ln R`. Both run Newton iterations in
//! `x = ln R` (positivity for free, symmetric prior penalty) with a
//! Gauss–Newton Hessian and a halving line search, initialized by the
//! closed-form single-frequency inversion at the band center.

use crate::bounds::RainPrior;
use crate::itu::{AttenuationModel, FrequencyGrid, P838Coefficients, PathGeometry};
use crate::{Error, Result};

const MAX_ITERATIONS: u32 = 25;
const MAX_HALVINGS: u32 = 20;
const STEP_TOLERANCE: f64 = 1e-6;
const LN_R_MIN: f64 = -9.210_340_371_976_184; // ln 1e-4
const LN_R_MAX: f64 = 9.210_340_371_976_184; // ln 1e4
const INIT_FLOOR: f64 = 0.1;

/// Outcome of a Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorReport {
    /// Point estimate, mm/h.
    pub estimate: f64,
    pub iterations: u32,
    /// Final relative step below tolerance.
    pub converged: bool,
    /// Final objective value (dB² for the MLE; penalized units for the MAP).
    pub objective_value: f64,
    /// Closed-form initializer, mm/h.
    pub initializer: f64,
    /// The initializer fell back to the drizzle floor.
    pub initializer_floored: bool,
}

/// Closed-form single-frequency initializer
/// `R⁽⁰⁾ = (Ā/(k_c L_eff))^{1/α_c}` from the mean rain-attributable
/// attenuation. Falls back to 0.1 mm/h (flagged) when `Ā ≤ 0`.
pub fn mle_init(
    a_hat: &[f64],
    nuisance: &[f64],
    center: &P838Coefficients,
    l_eff_km: f64,
) -> Result<(f64, bool)> {
    if a_hat.is_empty() || a_hat.len() != nuisance.len() {
        return Err(Error::Domain("observation and nuisance vectors must match".into()));
    }
    let mean_excess =
        a_hat.iter().zip(nuisance).map(|(a, c)| a - c).sum::<f64>() / a_hat.len() as f64;
    if mean_excess <= 0.0 {
        return Ok((INIT_FLOOR, true));
    }
    Ok(((mean_excess / (center.k_coef * l_eff_km)).powf(1.0 / center.alpha), false))
}

struct Residuals {
    /// `Â_k − c_k`, the rain-attributable observations.
    excess: Vec<f64>,
    /// `k_k · L_eff` per subcarrier.
    gain: Vec<f64>,
    alpha: Vec<f64>,
}

impl Residuals {
    fn build(
        model: &AttenuationModel,
        grid: &FrequencyGrid,
        geom: &PathGeometry,
        a_hat: &[f64],
        nuisance: &[f64],
    ) -> Result<Self> {
        if a_hat.len() != grid.len() || nuisance.len() != grid.len() {
            return Err(Error::Domain(format!(
                "expected {} observations and nuisance terms, got {} and {}",
                grid.len(),
                a_hat.len(),
                nuisance.len()
            )));
        }
        let coeffs = model.coefficients(grid)?;
        let l_eff = geom.anchored_rain_path_km()?;
        Ok(Residuals {
            excess: a_hat.iter().zip(nuisance).map(|(a, c)| a - c).collect(),
            gain: coeffs.iter().map(|c| c.k_coef * l_eff).collect(),
            alpha: coeffs.iter().map(|c| c.alpha).collect(),
        })
    }

    /// Sum of squared residuals and its Gauss–Newton derivatives in
    /// `x = ln R`: `(Q, dQ/dx, H_GN)`.
    fn quadratic(&self, x: f64) -> (f64, f64, f64) {
        let mut q = 0.0;
        let mut grad = 0.0;
        let mut hess = 0.0;
        for i in 0..self.excess.len() {
            let pred = self.gain[i] * (self.alpha[i] * x).exp();
            let r = self.excess[i] - pred;
            let jac = self.alpha[i] * pred; // d pred / dx
            q += r * r;
            grad += -2.0 * r * jac;
            hess += 2.0 * jac * jac;
        }
        (q, grad, hess)
    }

    fn center_coefficients(&self) -> P838Coefficients {
        let mid = self.excess.len() / 2;
        P838Coefficients { k_coef: self.gain[mid], alpha: self.alpha[mid] }
    }
}

fn newton_solve<F>(objective: F, x0: f64) -> (f64, u32, bool, f64)
where
    F: Fn(f64) -> (f64, f64, f64),
{
    let mut x = x0.clamp(LN_R_MIN, LN_R_MAX);
    let (mut fx, mut grad, mut hess) = objective(x);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let step = if hess > 0.0 { -grad / hess } else { -grad.signum() };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let candidate = (x + scale * step).clamp(LN_R_MIN, LN_R_MAX);
            let (fc, gc, hc) = objective(candidate);
            if fc <= fx {
                let applied = candidate - x;
                x = candidate;
                fx = fc;
                grad = gc;
                hess = hc;
                accepted = true;
                if applied.abs() < STEP_TOLERANCE {
                    converged = true;
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // Line search exhausted: the iterate is at a numerical minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }
    (x, iterations, converged, fx)
}

/// Maximum-likelihood estimate of the rain rate.
pub fn mle_newton(
    a_hat: &[f64],
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    geom: &PathGeometry,
    nuisance: &[f64],
    _sigma_db: f64,
) -> Result<EstimatorReport> {
    let res = Residuals::build(model, grid, geom, a_hat, nuisance)?;
    let center = res.center_coefficients();
    let (r0, floored) = mle_init(a_hat, nuisance, &center, 1.0)?;
    let (x, iterations, converged, objective) = newton_solve(|x| res.quadratic(x), r0.ln());
    Ok(EstimatorReport {
        estimate: x.exp(),
        iterations,
        converged,
        objective_value: objective,
        initializer: r0,
        initializer_floored: floored,
    })
}

/// MAP estimate of the rain rate under the log-normal prior.
pub fn map_newton(
    a_hat: &[f64],
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    geom: &PathGeometry,
    nuisance: &[f64],
    sigma_db: f64,
    prior: &RainPrior,
) -> Result<EstimatorReport> {
    if !(sigma_db > 0.0) {
        return Err(Error::Domain("noise std must be positive".into()));
    }
    let res = Residuals::build(model, grid, geom, a_hat, nuisance)?;
    let inv_two_sigma2 = 1.0 / (2.0 * sigma_db * sigma_db);
    let s2 = prior.sigma_ln * prior.sigma_ln;
    let mu = prior.mu_ln;
    let objective = |x: f64| {
        let (q, gq, hq) = res.quadratic(x);
        let f = q * inv_two_sigma2 + (x - mu) * (x - mu) / (2.0 * s2) + x;
        let g = gq * inv_two_sigma2 + (x - mu) / s2 + 1.0;
        let h = hq * inv_two_sigma2 + 1.0 / s2;
        (f, g, h)
    };
    let center = res.center_coefficients();
    let (r0, floored) = mle_init(a_hat, nuisance, &center, 1.0)?;
    // Prior-mode start when the data carries no rain signal.
    let x0 = if floored { mu - s2 } else { r0.ln() };
    let (x, iterations, converged, objective_value) = newton_solve(objective, x0);
    Ok(EstimatorReport {
        estimate: x.exp(),
        iterations,
        converged,
        objective_value,
        initializer: r0,
        initializer_floored: floored,
    })
}

/// Joint rain-plus-offset report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOffsetReport {
    pub rain: EstimatorReport,
    /// Estimated dB offset `G`.
    pub offset_db: f64,
}

/// Joint (R, G) estimate: the offset enters linearly, so each Newton
/// iterate profiles it out in closed form (`Ĝ(x) = mean residual`) and the
/// rain search runs on the centered objective.
pub fn mle_newton_joint_offset(
    a_hat: &[f64],
    model: &AttenuationModel,
    grid: &FrequencyGrid,
    geom: &PathGeometry,
    nuisance: &[f64],
    _sigma_db: f64,
) -> Result<JointOffsetReport> {
    let res = Residuals::build(model, grid, geom, a_hat, nuisance)?;
    if res.excess.len() < 2 {
        return Err(Error::Domain("joint (R, G) estimation needs at least two subcarriers".into()));
    }
    // Identical coefficients at every subcarrier make the rain gradient
    // collinear with the offset column.
    let spread = res
        .alpha
        .iter()
        .zip(res.gain.iter())
        .any(|(a, g)| (a - res.alpha[0]).abs() > 1e-12 || (g - res.gain[0]).abs() > 1e-12 * res.gain[0]);
    if !spread {
        return Err(Error::Unidentifiable(
            "joint (R, G) needs spectral contrast; band-averaged coefficients are flat".into(),
        ));
    }
    let k = res.excess.len() as f64;
    let centered = |x: f64| {
        let mut resid = Vec::with_capacity(res.excess.len());
        let mut jac = Vec::with_capacity(res.excess.len());
        for i in 0..res.excess.len() {
            let pred = res.gain[i] * (res.alpha[i] * x).exp();
            resid.push(res.excess[i] - pred);
            jac.push(res.alpha[i] * pred);
        }
        let r_mean = resid.iter().sum::<f64>() / k;
        let j_mean = jac.iter().sum::<f64>() / k;
        let mut q = 0.0;
        let mut grad = 0.0;
        let mut hess = 0.0;
        for i in 0..resid.len() {
            let rc = resid[i] - r_mean;
            let jc = jac[i] - j_mean;
            q += rc * rc;
            grad += -2.0 * rc * jc;
            hess += 2.0 * jc * jc;
        }
        (q, grad, hess, r_mean)
    };
    let center = res.center_coefficients();
    let (r0, floored) = mle_init(a_hat, nuisance, &center, 1.0)?;
    let (x, iterations, converged, objective) =
        newton_solve(|x| { let (q, g, h, _) = centered(x); (q, g, h) }, r0.ln());
    let offset = centered(x).3;
    Ok(JointOffsetReport {
        rain: EstimatorReport {
            estimate: x.exp(),
            iterations,
            converged,
            objective_value: objective,
            initializer: r0,
            initializer_floored: floored,
        },
        offset_db: offset,
    })
}

/// FIM-weighted fusion `Σ J_n R̂_n / Σ J_n` of per-link estimates.
pub fn fuse_estimates(estimates: &[f64], informations: &[f64]) -> Result<f64> {
    if estimates.len() != informations.len() || estimates.is_empty() {
        return Err(Error::Domain("estimates and weights must be non-empty and equal length".into()));
    }
    if informations.iter().any(|j| !(*j >= 0.0)) {
        return Err(Error::Domain("information weights must be non-negative".into()));
    }
    let total: f64 = informations.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("all fusion weights are zero".into()));
    }
    Ok(estimates.iter().zip(informations).map(|(r, j)| r * j).sum::<f64>() / total)
}
