//! Exact f-divergences between 1-D mixtures and the best single-Gaussian fit.

use crate::density::MixtureDensity;
use crate::divergence::DivergenceSpec;
use crate::error::DensityError;
use crate::math::{exp, ln};
use crate::nelder_mead::{minimize, NelderMeadConfig};
use crate::quadrature::{integrate, QuadratureConfig};

/// Half-width, in standard deviations, of the automatic integration support.
pub const SUPPORT_SIGMAS: f64 = 12.0;

/// Union of `mean ± 12 std` for both densities.
pub fn default_support(p: &MixtureDensity, q: &MixtureDensity) -> (f64, f64) {
    let (mp, sp) = (p.mean(), p.std());
    let (mq, sq) = (q.mean(), q.std());
    (
        (mp - SUPPORT_SIGMAS * sp).min(mq - SUPPORT_SIGMAS * sq),
        (mp + SUPPORT_SIGMAS * sp).max(mq + SUPPORT_SIGMAS * sq),
    )
}

/// Integrand `q f(p/q)` at `x`, evaluated from log densities.
pub fn integrand(spec: &DivergenceSpec, p: &MixtureDensity, q: &MixtureDensity, x: f64) -> f64 {
    spec.perspective_ln(p.ln_pdf(x), q.ln_pdf(x))
}

/// `D_f(P‖Q) = ∫ q f(p/q) dx` over the configured (or automatic) support.
pub fn exact_divergence(
    spec: &DivergenceSpec,
    p: &MixtureDensity,
    q: &MixtureDensity,
    cfg: &QuadratureConfig,
) -> Result<f64, DensityError> {
    let (lo, hi) = cfg.support.unwrap_or_else(|| default_support(p, q));
    integrate(|x| integrand(spec, p, q, x), lo, hi, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestFit {
    pub mean: f64,
    pub std: f64,
    pub value: f64,
    pub evals: usize,
}

/// Minimize `D_f(P‖N(μ, σ²))` over `(μ, σ)`.
///
/// Nelder–Mead runs in `(μ, ln σ)` from the moments of `p`, then restarts once
/// from the first optimum with a fresh simplex.
pub fn best_fit(spec: &DivergenceSpec, p: &MixtureDensity, cfg: &QuadratureConfig) -> Result<BestFit, DensityError> {
    if p.std() <= 0.0 {
        return Err(DensityError::BadVariance(p.variance()));
    }
    let objective = |x: &[f64]| {
        let sigma = exp(x[1]);
        match MixtureDensity::gaussian(x[0], sigma) {
            Ok(q) => exact_divergence(spec, p, &q, cfg).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };
    let nm = NelderMeadConfig {
        step: 0.25,
        x_tol: 1e-7,
        f_tol: 1e-13,
        max_evals: 3000,
    };
    let first = minimize(objective, &[p.mean(), ln(p.std())], &nm);
    let restart = NelderMeadConfig { step: 0.05, ..nm };
    let second = minimize(objective, &first.x, &restart);
    let total = first.evals + second.evals;
    let best = if second.value <= first.value { second } else { first };
    if !best.converged || !best.value.is_finite() {
        return Err(DensityError::NoConvergence(total));
    }
    Ok(BestFit {
        mean: best.x[0],
        std: exp(best.x[1]),
        value: best.value,
        evals: total,
    })
}
