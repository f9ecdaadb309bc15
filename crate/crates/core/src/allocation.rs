//! Complete-relaxation splitting and the fixed-overhead stage count.
//!
//! When the reservoir empties between releases the exposures add up
//! independently, so by convexity the equal split is optimal. A per-release
//! overhead then trades stage count against residual exposure; the frontier
//! where the threshold-safe count stops being cost-optimal is `k_safe(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::exposure::{excess_over_log, exposure};
use crate::model::{guarded_ceil, ModelParams};

/// Split a total load into `n` fully separated releases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitProblem {
    pub total_load: f64,
    pub n: usize,
    pub params: ModelParams,
}

impl SplitProblem {
    pub fn new(total_load: f64, n: usize, params: ModelParams) -> Result<Self> {
        require_positive("load", total_load)?;
        if n == 0 {
            return Err(Error::arg("n", "release count must be >= 1"));
        }
        Ok(Self {
            total_load,
            n,
            params,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub releases: Vec<f64>,
    pub total_exposure: f64,
    pub is_safe: bool,
    /// False when other splits reach the same (zero) exposure.
    pub unique_minimizer: bool,
}

/// Minimum-exposure split of `problem.total_load` into `problem.n` releases.
///
/// Above `n delta_c` the equal split is the unique minimiser. Below it every
/// split with all releases at most `delta_c` is optimal; the canonical one
/// fills releases left to right at `delta_c`, then the remainder, then zeros.
pub fn optimal_split(problem: &SplitProblem) -> Result<AllocationResult> {
    let SplitProblem {
        total_load: load,
        n,
        params,
    } = *problem;
    let delta_c = params.delta_c();
    let capacity = n as f64 * delta_c;
    let tol = params.threshold_tol();

    if load > capacity + tol {
        let q = load / n as f64;
        let e = exposure(q, &params)?;
        return Ok(AllocationResult {
            releases: vec![q; n],
            total_exposure: n as f64 * e,
            is_safe: false,
            unique_minimizer: true,
        });
    }
    if load >= capacity - tol {
        // Q = n delta_c: zero exposure forces every release to delta_c.
        return Ok(AllocationResult {
            releases: vec![load / n as f64; n],
            total_exposure: 0.0,
            is_safe: true,
            unique_minimizer: true,
        });
    }

    let mut releases = Vec::with_capacity(n);
    let mut remaining = load;
    for _ in 0..n {
        let q = remaining.min(delta_c);
        releases.push(q);
        remaining = (remaining - q).max(0.0);
    }
    Ok(AllocationResult {
        releases,
        total_exposure: 0.0,
        is_safe: true,
        unique_minimizer: n == 1,
    })
}

/// `L_n(Q) = n E(Q / n)`, the least cumulative exposure with `n` releases.
pub fn min_exposure(load: f64, n: usize, params: &ModelParams) -> Result<f64> {
    require_positive("load", load)?;
    if n == 0 {
        return Err(Error::arg("n", "release count must be >= 1"));
    }
    let capacity = n as f64 * params.delta_c();
    if load <= capacity + params.threshold_tol() {
        return Ok(0.0);
    }
    Ok(n as f64 * exposure(load / n as f64, params)?)
}

/// Smallest `n` with `n delta_c >= Q`.
pub fn minimal_safe_count(load: f64, params: &ModelParams) -> Result<u64> {
    require_positive("load", load)?;
    Ok(guarded_ceil(load / params.delta_c()).max(1))
}

/// Dimensionless exposure `L_n(r) = r - n - n ln(r/n)` for `r > n`, else zero.
pub fn scaled_exposure(r: f64, n: u64) -> f64 {
    let n = n as f64;
    if r <= n {
        return 0.0;
    }
    let eps = (r - n) / n;
    // r - n - n ln(r/n) = n (eps - ln(1 + eps))
    n * excess_over_log(eps)
}

/// Dimensionless cost `J_n = n k + L_n(r)`.
pub fn scaled_cost(r: f64, k: f64, n: u64) -> f64 {
    n as f64 * k + scaled_exposure(r, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadResult {
    /// Smallest cost-minimising release count.
    pub n_star: u64,
    pub cost: f64,
    pub residual_exposure: f64,
    pub is_fully_safe: bool,
    /// Every release count whose cost is within `1e-12` (relative) of the minimum.
    pub ties: Vec<u64>,
    /// `ceil(r)`, the threshold-safe count.
    pub n_safe: u64,
}

/// Relative tolerance for reporting co-optimal release counts.
pub const TIE_TOL: f64 = 1e-12;

/// Cost-optimal release count under a per-release overhead.
///
/// Candidates are `1..=ceil(r)`; beyond the safe count only overhead grows.
/// Tied minimisers are all reported and `n_star` is the smallest of them.
pub fn overhead_optimal_count(r: f64, k: f64) -> Result<OverheadResult> {
    require_positive("r", r)?;
    require_nonnegative("k", k)?;
    let n_safe = guarded_ceil(r).max(1);
    let costs: Vec<f64> = (1..=n_safe).map(|n| scaled_cost(r, k, n)).collect();
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = TIE_TOL * best.abs().max(1.0);
    let ties: Vec<u64> = costs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c - best <= slack)
        .map(|(i, _)| i as u64 + 1)
        .collect();
    let n_star = ties[0];
    let residual = if n_star == n_safe {
        0.0
    } else {
        scaled_exposure(r, n_star)
    };
    Ok(OverheadResult {
        n_star,
        cost: costs[n_star as usize - 1],
        residual_exposure: residual,
        is_fully_safe: residual == 0.0,
        ties,
        n_safe,
    })
}

/// Largest overhead at which the threshold-safe count `ceil(r)` stays optimal.
///
/// `+inf` when a single release is already safe.
pub fn k_safe(r: f64) -> Result<f64> {
    require_positive("r", r)?;
    let n_safe = guarded_ceil(r).max(1);
    if n_safe == 1 {
        return Ok(f64::INFINITY);
    }
    Ok((1..n_safe)
        .map(|m| scaled_exposure(r, m) / (n_safe - m) as f64)
        .fold(f64::INFINITY, f64::min))
}

/// Stationary point `r e^{-k}` of the continuously relaxed unsafe objective.
///
/// A diagnostic of the overhead pull, not an integer solution.
pub fn continuous_relaxed_count(r: f64, k: f64) -> Result<f64> {
    require_positive("r", r)?;
    require_nonnegative("k", k)?;
    Ok(r * (-k).exp())
}
