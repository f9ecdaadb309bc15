//! Phase-diagram tables in the dimensionless variables `(r, h, k)`.
//!
//! Panel (a): fixed-horizon capacity curves `B_n(h)` and the frontier `1 + h`.
//! Panel (b): the overhead frontier `k_safe(r)` and the cost-optimal count.
//! Panel (c): uniform versus constant-peak allocation at finite recovery.
//!
//! Rows are independent and evaluated with [`Execution`]; output order always
//! follows the grid index.

use serde::{Deserialize, Serialize};

use crate::allocation::{k_safe, overhead_optimal_count};
use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::model::guarded_ceil;
use crate::par::Execution;
use crate::recovery::{
    horizon_capacity, horizon_feasibility, min_peak_plan, simulate_recurrence, CarryOver,
    HorizonVerdict, RecoveryConfig,
};

/// `count` evenly spaced samples on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Self { min, max, count };
        axis.validate("axis")?;
        Ok(axis)
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        require_nonnegative(name, self.min)?;
        require_nonnegative(name, self.max)?;
        if self.count < 2 {
            return Err(Error::arg(
                name,
                format!("count must be >= 2, got {}", self.count),
            ));
        }
        if self.min >= self.max {
            return Err(Error::arg(
                name,
                format!("min must be < max, got [{}, {}]", self.min, self.max),
            ));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub r: Axis,
    pub h: Axis,
    pub k: Axis,
    /// Release counts drawn as `B_n` overlays.
    pub n_curves: Vec<u64>,
    /// Nudge near-integer `r` samples to both sides of the sawtooth drop.
    pub resolve_integers: bool,
}

impl PhaseGrid {
    pub fn validate(&self) -> Result<()> {
        self.r.validate("r")?;
        self.h.validate("h")?;
        self.k.validate("k")?;
        if self.n_curves.contains(&0) {
            return Err(Error::arg("n_curves", "release counts must be >= 1"));
        }
        Ok(())
    }

    /// `r` samples, with integers split into `m - 1e-6` and `m + 1e-6` when requested.
    pub fn r_samples(&self) -> Vec<f64> {
        let base = self.r.values();
        if !self.resolve_integers {
            return base;
        }
        let mut out = Vec::with_capacity(base.len() + 8);
        for r in base {
            let nearest = r.round();
            if nearest >= 1.0 && (r - nearest).abs() < 1e-9 {
                out.push(nearest - NUDGE);
                out.push(nearest + NUDGE);
            } else {
                out.push(r);
            }
        }
        out
    }
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            r: Axis {
                min: 0.05,
                max: 6.0,
                count: 120,
            },
            h: Axis {
                min: 0.0,
                max: 5.0,
                count: 101,
            },
            k: Axis {
                min: 0.0,
                max: 1.0,
                count: 41,
            },
            n_curves: vec![1, 2, 3, 4, 6, 10],
            resolve_integers: false,
        }
    }
}

const NUDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub h: f64,
    pub n: u64,
    pub b_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub h: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub r: f64,
    pub h: f64,
    pub verdict: HorizonVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityTables {
    pub curves: Vec<CapacityRow>,
    pub frontier: Vec<FrontierRow>,
}

/// `B_n(h)` for every requested `n` over the `h` axis, plus the line `1 + h`.
pub fn feasibility_curves(grid: &PhaseGrid, exec: Execution) -> Result<FeasibilityTables> {
    grid.validate()?;
    let hs = grid.h.values();
    let ns = &grid.n_curves;
    let curves = exec
        .map_range(ns.len() * hs.len(), |idx| {
            let (n, h) = (ns[idx / hs.len()], hs[idx % hs.len()]);
            horizon_capacity(n, h).map(|b_n| CapacityRow { h, n, b_n })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let frontier = hs
        .iter()
        .map(|&h| FrontierRow { h, limit: 1.0 + h })
        .collect();
    Ok(FeasibilityTables { curves, frontier })
}

/// Feasibility verdict at every `(r, h)` grid node, `r` varying fastest.
pub fn regime_map(grid: &PhaseGrid, tol: f64, exec: Execution) -> Result<Vec<RegimeRow>> {
    grid.validate()?;
    let rs = grid.r.values();
    let hs = grid.h.values();
    exec.map_range(rs.len() * hs.len(), |idx| {
        let (r, h) = (rs[idx % rs.len()], hs[idx / rs.len()]);
        horizon_feasibility(r, h, tol).map(|verdict| RegimeRow { r, h, verdict })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub r: f64,
    /// `+inf` when one release is already safe.
    pub k_safe: f64,
    pub n_safe: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostOptimumRow {
    pub r: f64,
    pub k: f64,
    pub n_star: u64,
    pub cost: f64,
    pub fully_safe: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SawtoothTables {
    pub frontier: Vec<FrontierPoint>,
    pub optima: Vec<CostOptimumRow>,
}

/// `k_safe(r)` along the `r` axis and the cost-optimal count on the `(r, k)` grid.
pub fn sawtooth_frontier(grid: &PhaseGrid, exec: Execution) -> Result<SawtoothTables> {
    grid.validate()?;
    let rs = grid.r_samples();
    let ks = grid.k.values();
    let frontier = exec
        .map_slice(&rs, |&r| {
            k_safe(r).map(|k_safe| FrontierPoint {
                r,
                k_safe,
                n_safe: guarded_ceil(r).max(1),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let optima = exec
        .map_range(rs.len() * ks.len(), |idx| {
            let (r, k) = (rs[idx / ks.len()], ks[idx % ks.len()]);
            overhead_optimal_count(r, k).map(|o| CostOptimumRow {
                r,
                k,
                n_star: o.n_star,
                cost: o.cost,
                fully_safe: o.is_fully_safe,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SawtoothTables { frontier, optima })
}

/// Finite-recovery comparison setup, all in threshold units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelCSetup {
    pub r: f64,
    pub n: usize,
    pub h: f64,
    /// Path samples per inter-release interval.
    pub samples_per_interval: usize,
}

impl Default for PanelCSetup {
    fn default() -> Self {
        Self {
            r: 2.1,
            n: 3,
            h: 2.0,
            samples_per_interval: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Uniform,
    FrontLoaded,
}

impl Policy {
    pub fn label(self) -> &'static str {
        match self {
            Policy::Uniform => "uniform",
            Policy::FrontLoaded => "front_loaded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub policy: Policy,
    /// Dimensionless time `rho t`.
    pub t: f64,
    /// Level in threshold units.
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelC {
    pub setup: PanelCSetup,
    pub lambda: f64,
    /// `B_n(h)`, equal to `c_n(lambda)` at the equal spacing.
    pub capacity: f64,
    pub uniform_releases: Vec<f64>,
    pub uniform_levels: Vec<f64>,
    pub front_releases: Vec<f64>,
    pub front_levels: Vec<f64>,
    /// Continuous decay path for both policies, pre/post samples at releases.
    pub path: Vec<PathPoint>,
}

/// Post-release levels of the uniform split and of the constant-peak plan for
/// `n` releases equally spaced over `h`, with `lambda = e^{-h/(n-1)}`.
pub fn panel_c_comparison(setup: PanelCSetup) -> Result<PanelC> {
    require_positive("r", setup.r)?;
    require_positive("h", setup.h)?;
    if setup.n < 2 {
        return Err(Error::arg("n", "panel (c) compares at least two releases"));
    }
    if setup.samples_per_interval == 0 {
        return Err(Error::arg("samples_per_interval", "must be >= 1"));
    }
    let spacing = setup.h / (setup.n - 1) as f64;
    let lambda = CarryOver::new((-spacing).exp())?;
    let config = RecoveryConfig::new(lambda, setup.n, setup.r)?;
    let uniform = simulate_recurrence(&config, &vec![setup.r / setup.n as f64; setup.n])?;
    let front = min_peak_plan(&config)?;

    let mut path = Vec::new();
    for (policy, releases) in [
        (Policy::Uniform, &uniform.releases),
        (Policy::FrontLoaded, &front.releases),
    ] {
        let mut level = 0.0;
        for (k, &q) in releases.iter().enumerate() {
            let t0 = spacing * k as f64;
            path.push(PathPoint {
                policy,
                t: t0,
                level,
            });
            level += q;
            path.push(PathPoint {
                policy,
                t: t0,
                level,
            });
            if k + 1 == releases.len() {
                break;
            }
            let m = setup.samples_per_interval;
            for i in 1..=m {
                let dt = spacing * i as f64 / m as f64;
                let t = if i == m {
                    spacing * (k + 1) as f64
                } else {
                    t0 + dt
                };
                path.push(PathPoint {
                    policy,
                    t,
                    level: level * (-dt).exp(),
                });
            }
            level *= lambda.value();
        }
    }

    Ok(PanelC {
        setup,
        lambda: lambda.value(),
        capacity: horizon_capacity(setup.n as u64, setup.h)?,
        uniform_releases: uniform.releases,
        uniform_levels: uniform.post_levels,
        front_releases: front.releases,
        front_levels: front.post_levels,
        path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTables {
    pub feasibility: Option<FeasibilityTables>,
    pub regimes: Option<Vec<RegimeRow>>,
    pub sawtooth: Option<SawtoothTables>,
    pub panel_c: Option<PanelC>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Panel {
    A,
    B,
    C,
    All,
}

/// Builds the requested panels.
pub fn phase_tables(
    panel: Panel,
    grid: &PhaseGrid,
    panel_c: PanelCSetup,
    tol: f64,
    exec: Execution,
) -> Result<PhaseTables> {
    let want = |p: Panel| panel == p || panel == Panel::All;
    Ok(PhaseTables {
        feasibility: want(Panel::A)
            .then(|| feasibility_curves(grid, exec))
            .transpose()?,
        regimes: want(Panel::A)
            .then(|| regime_map(grid, tol, exec))
            .transpose()?,
        sawtooth: want(Panel::B)
            .then(|| sawtooth_frontier(grid, exec))
            .transpose()?,
        panel_c: want(Panel::C)
            .then(|| panel_c_comparison(panel_c))
            .transpose()?,
    })
}
