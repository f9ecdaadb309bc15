//! Threshold exposure of a single release into an empty reservoir.
//!
//! A release `q` decays as `q e^{-rho t}`. Its exposure is the time integral of
//! the positive part of the growth pressure along that path. The closed form
//! is exactly zero on `[0, delta_c]` and strictly convex above it with
//! quadratic onset.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Result};
use crate::model::ModelParams;
use crate::quadrature::adaptive_simpson;

/// Exposure of one release together with the length of its active window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureValue {
    pub value: f64,
    /// Time spent above threshold, `ln(q / delta_c) / rho`; zero when subthreshold.
    pub active_duration: f64,
}

impl ExposureValue {
    const ZERO: ExposureValue = ExposureValue {
        value: 0.0,
        active_duration: 0.0,
    };
}

/// Relative overshoot below which `ln(q / delta_c)` goes through `ln_1p`.
const LOG1P_SWITCH: f64 = 1e-4;
/// Overshoot below which `eps - ln(1 + eps)` is summed as a series.
const SERIES_SWITCH: f64 = 1e-2;

/// `ln(q / delta_c)` for `q > delta_c`, guarding cancellation near the threshold.
fn log_ratio(q: f64, delta_c: f64) -> f64 {
    let overshoot = (q - delta_c) / delta_c;
    if overshoot < LOG1P_SWITCH {
        overshoot.ln_1p()
    } else {
        q.ln() - delta_c.ln()
    }
}

/// `eps - ln(1 + eps)` accurate down to tiny `eps`.
pub(crate) fn excess_over_log(eps: f64) -> f64 {
    if eps < SERIES_SWITCH {
        // eps^2/2 - eps^3/3 + eps^4/4 - ...; 14 terms leave a remainder below 1e-28 eps^2.
        let mut term = eps;
        let mut sum = 0.0;
        for j in 2..16 {
            term *= -eps;
            sum -= term / j as f64;
        }
        sum
    } else {
        eps - eps.ln_1p()
    }
}

/// Closed-form single-release exposure `E(q)`.
pub fn exposure_closed_form(q: f64, params: &ModelParams) -> Result<ExposureValue> {
    require_nonnegative("q", q)?;
    if params.is_subthreshold(q) {
        return Ok(ExposureValue::ZERO);
    }
    let d = params.derive();
    let eps = (q - d.delta_c) / d.delta_c;
    // q - dc - dc ln(q/dc) = dc (eps - ln(1 + eps))
    let value = d.alpha / params.rho() * d.delta_c * excess_over_log(eps);
    Ok(ExposureValue {
        value,
        active_duration: log_ratio(q, d.delta_c) / params.rho(),
    })
}

/// `E(q)` as a plain number.
pub fn exposure(q: f64, params: &ModelParams) -> Result<f64> {
    exposure_closed_form(q, params).map(|e| e.value)
}

/// Exposure by adaptive Simpson quadrature of `g(q e^{-rho t})` over the
/// analytically known active window `[0, t_q]`.
///
/// Independent of the closed form; used as its oracle.
pub fn exposure_quadrature(q: f64, params: &ModelParams, tol: f64) -> Result<f64> {
    require_nonnegative("q", q)?;
    require_positive("tol", tol)?;
    let delta_c = params.delta_c();
    if q <= delta_c {
        return Ok(0.0);
    }
    let rho = params.rho();
    let t_q = (q / delta_c).ln() / rho;
    adaptive_simpson(
        |t| params.growth_pressure(q * (-rho * t).exp()).max(0.0),
        0.0,
        t_q,
        tol,
    )
}

/// Exposure written through the normalised growth factor,
/// `mu * integral of [R(q e^{-rho t}) - 1]_+`.
pub fn exposure_spectral_form(q: f64, params: &ModelParams, tol: f64) -> Result<f64> {
    require_nonnegative("q", q)?;
    require_positive("tol", tol)?;
    let delta_c = params.delta_c();
    if q <= delta_c {
        return Ok(0.0);
    }
    let rho = params.rho();
    let mu = params.mu();
    let t_q = (q / delta_c).ln() / rho;
    adaptive_simpson(
        |t| mu * (params.normalized_factor(q * (-rho * t).exp()) - 1.0).max(0.0),
        0.0,
        t_q,
        tol,
    )
}

/// `E'(q)`: zero on the plateau, `(delta - beta)/rho (1 - delta_c/q)` above it.
pub fn exposure_derivative(q: f64, params: &ModelParams) -> Result<f64> {
    require_nonnegative("q", q)?;
    if params.is_subthreshold(q) {
        return Ok(0.0);
    }
    let d = params.derive();
    Ok(d.alpha / params.rho() * (1.0 - d.delta_c / q))
}

/// `E''(q)` on the strictly convex branch; zero on the plateau.
pub fn exposure_second_derivative(q: f64, params: &ModelParams) -> Result<f64> {
    require_nonnegative("q", q)?;
    if params.is_subthreshold(q) {
        return Ok(0.0);
    }
    let d = params.derive();
    Ok(d.alpha / params.rho() * d.delta_c / (q * q))
}

/// Leading-order exposure just above threshold, `(delta - beta) delta_c eps^2 / (2 rho)`
/// for a release `delta_c (1 + eps)`.
///
/// An approximation: the error against [`exposure_closed_form`] is `O(eps^3)`.
pub fn exposure_near_threshold(eps: f64, params: &ModelParams) -> Result<f64> {
    require_nonnegative("epsilon", eps)?;
    let d = params.derive();
    Ok(d.alpha * d.delta_c / (2.0 * params.rho()) * eps * eps)
}

/// Large-release expansion `(delta-beta) q / rho - (mu-beta)/rho ln(q/delta_c) - (mu-beta)/rho`.
///
/// Algebraically identical to the closed form for `q > delta_c`.
pub fn exposure_large_release(q: f64, params: &ModelParams) -> Result<f64> {
    require_nonnegative("q", q)?;
    let d = params.derive();
    let rho = params.rho();
    Ok(d.alpha * q / rho - d.gamma / rho * log_ratio(q, d.delta_c) - d.gamma / rho)
}
