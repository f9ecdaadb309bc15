//! Model parameters, derived constants and the threshold geometry.
//!
//! The reduced two-variable system has four positive rates: transmission
//! `beta`, baseline recovery `mu`, reservoir-driven conversion `delta` and
//! reservoir decay `rho`. All quantities are dimensionless; rates are per unit
//! time with the time unit left implicit.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, Error, Result};

/// Default absolute tolerance used when comparing a level against the threshold.
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-12;

/// Validated rates in the shock-sensitive regime `0 < beta < mu < delta`, `rho > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    beta: f64,
    mu: f64,
    delta: f64,
    rho: f64,
    threshold_tol: f64,
}

/// Constants derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `delta - beta`, slope of the growth pressure.
    pub alpha: f64,
    /// `mu - beta`, magnitude of the baseline stability margin.
    pub gamma: f64,
    /// Critical reservoir level `gamma / alpha`, in `(0, 1)`.
    pub delta_c: f64,
}

impl ModelParams {
    pub fn new(beta: f64, mu: f64, delta: f64, rho: f64) -> Result<Self> {
        let bad = |constraint| Error::InvalidParams {
            constraint,
            beta,
            mu,
            delta,
            rho,
        };
        if ![beta, mu, delta, rho].iter().all(|v| v.is_finite()) {
            return Err(bad("all rates must be finite"));
        }
        if beta <= 0.0 {
            return Err(bad("beta > 0"));
        }
        if rho <= 0.0 {
            return Err(bad("rho > 0"));
        }
        if beta >= mu {
            return Err(bad("shock-sensitive ordering requires beta < mu"));
        }
        if mu >= delta {
            return Err(bad("shock-sensitive ordering requires mu < delta"));
        }
        Ok(Self {
            beta,
            mu,
            delta,
            rho,
            threshold_tol: DEFAULT_THRESHOLD_TOL,
        })
    }

    /// Replaces the absolute tolerance used for threshold classification.
    pub fn with_threshold_tol(mut self, tol: f64) -> Result<Self> {
        require_nonnegative("threshold_tol", tol)?;
        self.threshold_tol = tol;
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn threshold_tol(&self) -> f64 {
        self.threshold_tol
    }

    pub fn derive(&self) -> DerivedConstants {
        let alpha = self.delta - self.beta;
        let gamma = self.mu - self.beta;
        DerivedConstants {
            alpha,
            gamma,
            delta_c: gamma / alpha,
        }
    }

    pub fn delta_c(&self) -> f64 {
        self.derive().delta_c
    }

    /// Near-baseline growth pressure `g(A) = (beta - mu) + (delta - beta) A`.
    ///
    /// Affine for every finite `A`, including levels above one.
    pub fn growth_pressure(&self, level: f64) -> f64 {
        (self.beta - self.mu) + (self.delta - self.beta) * level
    }

    /// Normalised linear growth factor `R(A) = ((1 - A) beta + delta A) / mu`.
    ///
    /// Satisfies `g(A) = mu (R(A) - 1)` and `R(delta_c) = 1`.
    pub fn normalized_factor(&self, level: f64) -> f64 {
        ((1.0 - level) * self.beta + self.delta * level) / self.mu
    }

    /// A level counts as safe when it does not exceed the threshold by more
    /// than the configured tolerance.
    pub fn is_subthreshold(&self, level: f64) -> bool {
        level <= self.delta_c() + self.threshold_tol
    }

    /// One-shock exposure scale `(mu - beta) / rho`.
    pub fn exposure_scale(&self) -> f64 {
        (self.mu - self.beta) / self.rho
    }

    /// Maps physical load, horizon and per-release overhead to `(r, h, k)`.
    pub fn dimensionless(
        &self,
        load: f64,
        horizon: f64,
        overhead: f64,
    ) -> Result<DimensionlessPoint> {
        require_nonnegative("load", load)?;
        require_nonnegative("horizon", horizon)?;
        require_nonnegative("overhead", overhead)?;
        Ok(DimensionlessPoint {
            r: load / self.delta_c(),
            h: self.rho * horizon,
            k: overhead / self.exposure_scale(),
        })
    }
}

/// Load, recovery budget and overhead in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessPoint {
    /// Load in threshold units, `Q / delta_c`.
    pub r: f64,
    /// Recovery budget `rho T`.
    pub h: f64,
    /// Overhead in one-shock exposure units, `K rho / (mu - beta)`.
    pub k: f64,
}

/// Ceiling that absorbs relative round-off just above an integer.
///
/// `Q / delta_c` for `Q = 3 delta_c` may evaluate to `3.0000000000000004`;
/// this returns 3 there while still returning 4 for `3 + 1e-10`.
pub fn guarded_ceil(x: f64) -> u64 {
    let guard = 1e-12 * x.abs().max(1.0);
    let c = (x - guard).ceil();
    if c <= 0.0 {
        0
    } else {
        c as u64
    }
}
