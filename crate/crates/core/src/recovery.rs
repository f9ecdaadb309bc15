//! Finite recovery between releases: the post-release recurrence
//! `A_k = lambda A_{k-1} + q_k`, peak-minimising plans, threshold-safe counts
//! and the fixed-horizon capacity frontier.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::model::{guarded_ceil, ModelParams};
use crate::par::Execution;

/// Fraction of the reservoir surviving one inter-release interval.
///
/// `0` is accepted as the complete-relaxation limit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CarryOver(f64);

impl CarryOver {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || !(0.0..1.0).contains(&lambda) {
            return Err(Error::arg(
                "lambda",
                format!("must lie in [0, 1), got {lambda}"),
            ));
        }
        Ok(Self(lambda))
    }

    /// `lambda = e^{-rho tau}` for a fixed spacing `tau > 0`.
    pub fn from_spacing(rho: f64, tau: f64) -> Result<Self> {
        require_positive("rho", rho)?;
        require_positive("tau", tau)?;
        Self::new((-rho * tau).exp())
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - lambda`.
    pub fn dissipated(self) -> f64 {
        1.0 - self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub lambda: CarryOver,
    pub n: usize,
    pub total_load: f64,
    /// Reservoir level just before the first release.
    pub initial_level: f64,
}

impl RecoveryConfig {
    pub fn new(lambda: CarryOver, n: usize, total_load: f64) -> Result<Self> {
        Self::with_initial_level(lambda, n, total_load, 0.0)
    }

    pub fn with_initial_level(
        lambda: CarryOver,
        n: usize,
        total_load: f64,
        initial_level: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("n", "release count must be >= 1"));
        }
        require_nonnegative("load", total_load)?;
        require_nonnegative("a0", initial_level)?;
        Ok(Self {
            lambda,
            n,
            total_load,
            initial_level,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakPlan {
    pub releases: Vec<f64>,
    pub post_levels: Vec<f64>,
    pub peak: f64,
    /// `c_n(lambda)` for the plan's release count.
    pub capacity_multiplier: f64,
    /// `sum(q) - (A_n + (1 - lambda) sum_{k<n} A_k - a0)`; zero up to round-off.
    pub capacity_residual: f64,
    /// Set for the zero-load plan.
    pub degenerate: bool,
}

/// Runs the post-release recurrence from `config.initial_level`.
pub fn simulate_recurrence(config: &RecoveryConfig, releases: &[f64]) -> Result<PeakPlan> {
    if releases.len() != config.n {
        return Err(Error::LengthMismatch {
            expected: config.n,
            actual: releases.len(),
        });
    }
    for &q in releases {
        require_nonnegative("release", q)?;
    }
    let lambda = config.lambda.value();
    let mut post_levels = Vec::with_capacity(config.n);
    let mut level = config.initial_level;
    for (k, &q) in releases.iter().enumerate() {
        level = if k == 0 {
            level + q
        } else {
            lambda * level + q
        };
        post_levels.push(level);
    }
    let peak = post_levels
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let n = post_levels.len();
    let carried: f64 = post_levels[..n - 1].iter().sum();
    let identity = post_levels[n - 1] + config.lambda.dissipated() * carried - config.initial_level;
    let total: f64 = releases.iter().sum();
    Ok(PeakPlan {
        releases: releases.to_vec(),
        post_levels,
        peak,
        capacity_multiplier: peak_capacity(config.n, config.lambda),
        capacity_residual: total - identity,
        degenerate: total == 0.0,
    })
}

/// Effective capacity multiplier `c_n(lambda) = 1 + (n - 1)(1 - lambda)`.
pub fn peak_capacity(n: usize, lambda: CarryOver) -> f64 {
    1.0 + n.saturating_sub(1) as f64 * lambda.dissipated()
}

/// Peak-minimising plan from an empty reservoir.
///
/// The optimal post-release levels are all equal to `Q / c_n(lambda)`; the
/// first release fills to that level and each later one replaces the
/// dissipated fraction `(1 - lambda)`.
pub fn min_peak_plan(config: &RecoveryConfig) -> Result<PeakPlan> {
    if config.initial_level != 0.0 {
        return Err(Error::arg(
            "a0",
            "min_peak_plan starts from an empty reservoir; use state_plan for a0 > 0",
        ));
    }
    state_plan(config)
}

/// Optimal peak `H_m(a, Q) = max{a, (a + Q) / c_m(lambda)}` with `m` releases left
/// and current level `a`.
pub fn state_value(m: usize, level: f64, load: f64, lambda: CarryOver) -> Result<f64> {
    if m == 0 {
        return Err(Error::arg("m", "remaining release count must be >= 1"));
    }
    require_nonnegative("a", level)?;
    require_nonnegative("load", load)?;
    Ok(level.max((level + load) / peak_capacity(m, lambda)))
}

/// A release profile attaining [`state_value`] from `config.initial_level`.
///
/// Each release tops the reservoir up to the target peak
/// `max{a, (a + Q) / c_n}` until the load is exhausted. From an empty start
/// this is the unique loading/maintenance profile; with `a0` above the target
/// it is one optimal choice among several.
pub fn state_plan(config: &RecoveryConfig) -> Result<PeakPlan> {
    let lambda = config.lambda.value();
    let a0 = config.initial_level;
    if config.total_load == 0.0 {
        return simulate_recurrence(config, &vec![0.0; config.n]);
    }
    let target = state_value(config.n, a0, config.total_load, config.lambda)?;
    let mut releases = Vec::with_capacity(config.n);
    let mut remaining = config.total_load;
    let mut before = a0;
    for k in 0..config.n {
        let q = if k + 1 == config.n {
            remaining
        } else {
            remaining.min((target - before).max(0.0))
        };
        releases.push(q);
        remaining = (remaining - q).max(0.0);
        before = lambda * (before + q);
    }
    simulate_recurrence(config, &releases)
}

/// Grid resolution for [`bellman_state_value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellmanGrid {
    /// Nodes of the normalised-state grid on `[0, 1]`.
    pub state_points: usize,
    /// Control samples per search round.
    pub control_points: usize,
    /// Zoom rounds around the best control cell after the first sweep.
    pub refinements: usize,
}

impl Default for BellmanGrid {
    fn default() -> Self {
        Self {
            state_points: 4001,
            control_points: 401,
            refinements: 2,
        }
    }
}

/// Numerical solution of the minimax recursion
/// `H_m(a, Q) = min_{0<=q<=Q} max{a + q, H_{m-1}(lambda (a + q), Q - q)}`,
/// `H_1(a, Q) = a + Q`, on a grid.
///
/// The recursion is positively homogeneous, so value tables are kept in the
/// normalised state `theta = a / (a + Q)` and scaled back by `a + Q`. Each
/// level is a piecewise-linear table on `state_points` nodes; the control is
/// searched on a uniform grid and then refined around the best cell. Table
/// rows are independent and evaluated with `exec`.
pub fn bellman_state_value(
    m: usize,
    level: f64,
    load: f64,
    lambda: CarryOver,
    grid: BellmanGrid,
    exec: Execution,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::arg("m", "remaining release count must be >= 1"));
    }
    BellmanSolution::solve(m, lambda, grid, exec)?.value(m, level, load)
}

/// Bellman tables for up to `max_releases` remaining releases, reusable across
/// many `(a, Q)` queries.
#[derive(Debug, Clone, PartialEq)]
pub struct BellmanSolution {
    lambda: CarryOver,
    grid: BellmanGrid,
    tables: Vec<Vec<f64>>,
}

impl BellmanSolution {
    pub fn solve(
        max_releases: usize,
        lambda: CarryOver,
        grid: BellmanGrid,
        exec: Execution,
    ) -> Result<Self> {
        if grid.state_points < 2 || grid.control_points < 3 {
            return Err(Error::arg(
                "grid",
                "need >= 2 state points and >= 3 control points",
            ));
        }
        Ok(Self {
            lambda,
            grid,
            tables: bellman_tables(max_releases.saturating_sub(1), lambda, grid, exec),
        })
    }

    /// Grid approximation of `H_m(a, Q)`; the last step is solved exactly in
    /// the state rather than read off a table.
    pub fn value(&self, m: usize, level: f64, load: f64) -> Result<f64> {
        if m == 0 || m > self.tables.len() + 1 {
            return Err(Error::arg(
                "m",
                format!("must lie in 1..={}, got {m}", self.tables.len() + 1),
            ));
        }
        require_nonnegative("a", level)?;
        require_nonnegative("load", load)?;
        let total = level + load;
        if total == 0.0 {
            return Ok(0.0);
        }
        let prev = m.checked_sub(2).map(|i| self.tables[i].as_slice());
        Ok(total * normalized_step(level / total, self.lambda.value(), prev, self.grid))
    }
}

/// Tables `h_1 .. h_levels` of the normalised value on the state grid.
pub fn bellman_tables(
    levels: usize,
    lambda: CarryOver,
    grid: BellmanGrid,
    exec: Execution,
) -> Vec<Vec<f64>> {
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(levels);
    if levels == 0 {
        return tables;
    }
    let n = grid.state_points;
    tables.push(vec![1.0; n]);
    for _ in 1..levels {
        let prev = tables.last().expect("non-empty");
        let next = exec.map_range(n, |i| {
            let theta = i as f64 / (n - 1) as f64;
            normalized_step(theta, lambda.value(), Some(prev), grid)
        });
        tables.push(next);
    }
    tables
}

/// One Bellman step in normalised coordinates: the state has total mass one,
/// `theta` of it already in the reservoir. `prev = None` means no further
/// releases (value = current level with all remaining load released).
fn normalized_step(theta: f64, lambda: f64, prev: Option<&[f64]>, grid: BellmanGrid) -> f64 {
    let Some(prev) = prev else {
        return 1.0;
    };
    let objective = |x: f64| {
        let after = theta + x;
        let carried = lambda * after;
        let mass = carried + (1.0 - after).max(0.0);
        let tail = if mass > 0.0 {
            mass * interpolate(prev, carried / mass)
        } else {
            0.0
        };
        after.max(tail)
    };
    let span = (1.0 - theta).max(0.0);
    let mut lo = 0.0;
    let mut hi = span;
    let mut best = f64::INFINITY;
    for _ in 0..=grid.refinements {
        let steps = grid.control_points - 1;
        let width = (hi - lo) / steps as f64;
        let mut best_i = 0;
        for i in 0..=steps {
            let v = objective(lo + width * i as f64);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let centre = lo + width * best_i as f64;
        lo = (centre - width).max(0.0);
        hi = (centre + width).min(span);
        if hi <= lo {
            break;
        }
    }
    best
}

fn interpolate(table: &[f64], x: f64) -> f64 {
    let n = table.len();
    let pos = x.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = (pos.floor() as usize).min(n - 2);
    let frac = pos - i as f64;
    table[i] + frac * (table[i + 1] - table[i])
}

/// Minimal release count for threshold safety at fixed carry-over,
/// `1 + ceil((r - 1)_+ / (1 - lambda))` with `r = Q / delta_c`.
pub fn safe_count_fixed_lambda(load: f64, lambda: CarryOver, params: &ModelParams) -> Result<u64> {
    require_positive("load", load)?;
    let r = load / params.delta_c();
    Ok(safe_count_for_ratio(r, lambda))
}

/// [`safe_count_fixed_lambda`] in threshold units.
pub fn safe_count_for_ratio(r: f64, lambda: CarryOver) -> u64 {
    let excess = (r - 1.0).max(0.0);
    1 + guarded_ceil(excess / lambda.dissipated())
}

/// Capacity of `n` equally spaced releases in a dimensionless horizon `h = rho T`,
/// `B_n(h) = 1 + (n - 1)(1 - e^{-h/(n-1)})`, with `B_1 = 1`.
pub fn horizon_capacity(n: u64, h: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("n", "release count must be >= 1"));
    }
    require_nonnegative("h", h)?;
    if n == 1 {
        return Ok(1.0);
    }
    let gaps = (n - 1) as f64;
    Ok(1.0 - gaps * (-h / gaps).exp_m1())
}

/// Safe capacity `1 + sum_j (1 - e^{-rho tau_j})` of a schedule with the given
/// inter-release gaps. Equal spacing maximises it for a fixed total.
pub fn unequal_spacing_capacity(gaps: &[f64], rho: f64) -> Result<f64> {
    require_positive("rho", rho)?;
    let mut cap = 1.0;
    for &tau in gaps {
        require_nonnegative("tau", tau)?;
        cap -= (-rho * tau).exp_m1();
    }
    Ok(cap)
}

/// Threshold-safety verdict for a load `r` (threshold units) within horizon `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "n", rename_all = "snake_case")]
pub enum HorizonVerdict {
    SafeWithOneRelease,
    SafeWithN(u64),
    /// `r = 1 + h`: approached as `n` grows but attained by no finite schedule.
    SupremalBoundary,
    Infeasible,
}

impl HorizonVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            HorizonVerdict::SafeWithOneRelease => "safe_with_one_release",
            HorizonVerdict::SafeWithN(_) => "safe_with_n",
            HorizonVerdict::SupremalBoundary => "supremal_boundary",
            HorizonVerdict::Infeasible => "infeasible",
        }
    }

    /// Finite safe count, if any.
    pub fn safe_count(&self) -> SafeCount {
        match *self {
            HorizonVerdict::SafeWithOneRelease => SafeCount::Finite(1),
            HorizonVerdict::SafeWithN(n) => SafeCount::Finite(n),
            _ => SafeCount::Unbounded,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(
            self,
            HorizonVerdict::SafeWithOneRelease | HorizonVerdict::SafeWithN(_)
        )
    }
}

/// Classifies `(r, h)` and finds the smallest safe equally spaced release count.
///
/// Comparisons against `1` and `1 + h` use the absolute tolerance `tol`.
pub fn horizon_feasibility(r: f64, h: f64, tol: f64) -> Result<HorizonVerdict> {
    require_positive("r", r)?;
    require_nonnegative("h", h)?;
    require_nonnegative("tol", tol)?;
    if r <= 1.0 + tol {
        return Ok(HorizonVerdict::SafeWithOneRelease);
    }
    let frontier = 1.0 + h;
    if (r - frontier).abs() <= tol {
        return Ok(HorizonVerdict::SupremalBoundary);
    }
    if r > frontier {
        return Ok(HorizonVerdict::Infeasible);
    }
    // B_n(h) increases to 1 + h, so bracket by doubling and bisect.
    let safe = |n: u64| horizon_capacity(n, h).map(|b| r <= b + tol);
    let mut lo = 1u64;
    let mut hi = 2u64;
    while !safe(hi)? {
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| {
            Error::arg(
                "r",
                "safe release count exceeds u64 range; load sits on the frontier",
            )
        })?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if safe(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(HorizonVerdict::SafeWithN(hi))
}

/// A release count that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafeCount {
    Finite(u64),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// `c_n(lambda)` at the fixed carry-over.
    pub c_n: f64,
    /// `B_n(rho T)` for the same count spread over the horizon.
    pub b_n: f64,
    /// `delta_c c_n(lambda)`.
    pub q_max_safe: f64,
    /// `delta_c (1 + rho T)`, supremal over all finite schedules in the horizon.
    pub q_sup_safe: f64,
    pub n_safe_lambda: SafeCount,
    pub n_safe_horizon: SafeCount,
}

/// Safe-capacity numbers for a load `Q`, `n` releases, carry-over `lambda` and horizon `T`.
pub fn capacity_report(
    params: &ModelParams,
    load: f64,
    n: usize,
    lambda: CarryOver,
    horizon: f64,
) -> Result<CapacityReport> {
    require_positive("load", load)?;
    require_nonnegative("horizon", horizon)?;
    let delta_c = params.delta_c();
    let h = params.rho() * horizon;
    let c_n = peak_capacity(n, lambda);
    let verdict = horizon_feasibility(load / delta_c, h, params.threshold_tol())?;
    Ok(CapacityReport {
        c_n,
        b_n: horizon_capacity(n as u64, h)?,
        q_max_safe: delta_c * c_n,
        q_sup_safe: delta_c * (1.0 + h),
        n_safe_lambda: SafeCount::Finite(safe_count_fixed_lambda(load, lambda, params)?),
        n_safe_horizon: verdict.safe_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e_inv() -> CarryOver {
        CarryOver::new((-1f64).exp()).unwrap()
    }

    #[test]
    fn carry_over_validation() {
        assert!(CarryOver::new(1.0).is_err());
        assert!(CarryOver::new(-0.1).is_err());
        assert!(CarryOver::new(0.0).is_ok());
        let l = CarryOver::from_spacing(0.5, 2.0).unwrap();
        assert!((l.value() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_releases_stay_empty() {
        let cfg = RecoveryConfig::new(CarryOver::new(0.4).unwrap(), 4, 0.0).unwrap();
        let plan = simulate_recurrence(&cfg, &[0.0; 4]).unwrap();
        assert_eq!(plan.post_levels, vec![0.0; 4]);
        assert!(plan.degenerate);
    }

    #[test]
    fn uniform_panel_c_levels() {
        let r = 2.1;
        let cfg = RecoveryConfig::new(e_inv(), 3, r).unwrap();
        let plan = simulate_recurrence(&cfg, &[r / 3.0; 3]).unwrap();
        let l = plan.post_levels;
        assert!((l[0] - 0.700).abs() < 1e-12);
        assert!((l[1] - 0.958).abs() < 1e-3);
        assert!((l[2] - 1.052).abs() < 1e-3);
        assert!(l[2] > 1.0);
        assert!(plan.capacity_residual.abs() < 1e-12);
    }

    #[test]
    fn recurrence_rejects_bad_input() {
        let cfg = RecoveryConfig::new(e_inv(), 3, 1.0).unwrap();
        assert!(matches!(
            simulate_recurrence(&cfg, &[0.5, 0.5]),
            Err(Error::LengthMismatch {
                expected: 3,
                actual: 2
            })
        ));
        assert!(simulate_recurrence(&cfg, &[0.5, -0.1, 0.6]).is_err());
    }

    #[test]
    fn capacity_multiplier_examples() {
        assert_eq!(peak_capacity(1, e_inv()), 1.0);
        let c3 = peak_capacity(3, e_inv());
        assert!((c3 - (1.0 + 2.0 * (1.0 - (-1f64).exp()))).abs() < 1e-15);
        assert!((c3 - 2.264).abs() < 1e-3);
        assert_eq!(peak_capacity(5, CarryOver::new(0.0).unwrap()), 5.0);
    }

    #[test]
    fn front_loaded_plan() {
        let r = 2.1;
        let cfg = RecoveryConfig::new(e_inv(), 3, r).unwrap();
        let plan = min_peak_plan(&cfg).unwrap();
        assert!((plan.peak - 0.928).abs() < 1e-3, "{}", plan.peak);
        for a in &plan.post_levels {
            assert!((a - plan.peak).abs() < 1e-12);
        }
        let ratio = plan.releases[0] / plan.releases[1];
        assert!((ratio - 1.0 / (1.0 - (-1f64).exp())).abs() < 1e-12);
        let sum: f64 = plan.releases.iter().sum();
        assert!((sum - r).abs() < 1e-12);
    }

    #[test]
    fn complete_relaxation_limit_is_equal_split() {
        let cfg = RecoveryConfig::new(CarryOver::new(0.0).unwrap(), 4, 3.0).unwrap();
        let plan = min_peak_plan(&cfg).unwrap();
        for q in &plan.releases {
            assert!((q - 0.75).abs() < 1e-15);
        }
    }

    #[test]
    fn min_peak_plan_requires_empty_start() {
        let cfg = RecoveryConfig::with_initial_level(e_inv(), 3, 1.0, 0.2).unwrap();
        assert!(min_peak_plan(&cfg).is_err());
    }

    #[test]
    fn zero_load_plan_is_degenerate() {
        let cfg = RecoveryConfig::with_initial_level(e_inv(), 3, 0.0, 0.3).unwrap();
        let plan = state_plan(&cfg).unwrap();
        assert!(plan.degenerate);
        assert_eq!(plan.peak, 0.3);
    }

    #[test]
    fn state_value_examples() {
        let half = CarryOver::new(0.5).unwrap();
        assert_eq!(state_value(1, 0.3, 0.9, half).unwrap(), 0.3 + 0.9);
        assert!((state_value(3, 0.0, 2.0, half).unwrap() - 1.0).abs() < 1e-15);
        assert!((state_value(3, 0.5, 1.0, half).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(state_value(3, 2.0, 0.5, half).unwrap(), 2.0);
    }

    #[test]
    fn state_plan_attains_value_from_high_start() {
        let half = CarryOver::new(0.5).unwrap();
        for (a, q) in [(0.5, 1.0), (2.0, 0.5), (1.0, 1.0)] {
            let cfg = RecoveryConfig::with_initial_level(half, 3, q, a).unwrap();
            let plan = state_plan(&cfg).unwrap();
            let value = state_value(3, a, q, half).unwrap();
            assert!(
                (plan.peak - value).abs() < 1e-12,
                "a={a} Q={q}: {} vs {value}",
                plan.peak
            );
            let sum: f64 = plan.releases.iter().sum();
            assert!((sum - q).abs() < 1e-12);
        }
    }

    #[test]
    fn bellman_grid_matches_closed_form_example() {
        let half = CarryOver::new(0.5).unwrap();
        let grid = BellmanGrid {
            state_points: 10_001,
            control_points: 1_001,
            refinements: 2,
        };
        let v = bellman_state_value(3, 0.5, 1.0, half, grid, Execution::default()).unwrap();
        assert!((v - 0.75).abs() < 1e-4, "{v}");
        assert_eq!(
            bellman_state_value(
                1,
                0.5,
                1.0,
                half,
                BellmanGrid::default(),
                Execution::Sequential
            )
            .unwrap(),
            1.5
        );
    }

    #[test]
    fn safe_count_examples() {
        let p = ModelParams::new(0.6, 1.0, 1.8, 0.5).unwrap();
        let dc = p.delta_c();
        assert_eq!(safe_count_fixed_lambda(0.9 * dc, e_inv(), &p).unwrap(), 1);
        assert_eq!(safe_count_fixed_lambda(2.1 * dc, e_inv(), &p).unwrap(), 3);
        // scan: smallest n with r <= c_n
        let n = (1..).find(|&n| 2.1 <= peak_capacity(n, e_inv())).unwrap();
        assert_eq!(n, 3);
    }

    #[test]
    fn horizon_capacity_examples() {
        assert!((horizon_capacity(3, 2.0).unwrap() - 2.264).abs() < 1e-3);
        assert_eq!(horizon_capacity(1, 5.0).unwrap(), 1.0);
        for n in [1, 2, 10, 1000] {
            assert_eq!(horizon_capacity(n, 0.0).unwrap(), 1.0);
        }
        let b = horizon_capacity(1_000_000, 2.0).unwrap();
        assert!(b < 3.0 && 3.0 - b < 1e-5, "{b}");
    }

    #[test]
    fn horizon_verdicts() {
        let tol = 1e-12;
        assert_eq!(
            horizon_feasibility(2.1, 2.0, tol).unwrap(),
            HorizonVerdict::SafeWithN(3)
        );
        assert_eq!(
            horizon_feasibility(3.5, 2.0, tol).unwrap(),
            HorizonVerdict::Infeasible
        );
        assert_eq!(
            horizon_feasibility(3.0, 2.0, tol).unwrap(),
            HorizonVerdict::SupremalBoundary
        );
        assert_eq!(
            horizon_feasibility(0.7, 2.0, tol).unwrap(),
            HorizonVerdict::SafeWithOneRelease
        );
        // very close to the frontier needs a large but finite count
        match horizon_feasibility(3.0 - 1e-6, 2.0, tol).unwrap() {
            HorizonVerdict::SafeWithN(n) => {
                assert!(horizon_capacity(n, 2.0).unwrap() >= 3.0 - 1e-6 - tol);
                assert!(horizon_capacity(n - 1, 2.0).unwrap() < 3.0 - 1e-6 - tol);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spacing_capacity_examples() {
        let (rho, t) = (0.7, 3.0);
        let eq = unequal_spacing_capacity(&[t / 3.0; 3], rho).unwrap();
        assert!((eq - horizon_capacity(4, rho * t).unwrap()).abs() < 1e-15);
        let single = unequal_spacing_capacity(&[t], rho).unwrap();
        assert!((single - horizon_capacity(2, rho * t).unwrap()).abs() < 1e-15);
        assert!(unequal_spacing_capacity(&[1.0, -0.1], rho).is_err());
    }

    #[test]
    fn capacity_report_panel_c() {
        let p = ModelParams::new(0.6, 1.0, 1.8, 0.5).unwrap();
        let rep = capacity_report(&p, 0.7, 3, e_inv(), 4.0).unwrap();
        assert!((rep.c_n - rep.b_n).abs() < 1e-15);
        assert!((rep.q_sup_safe - 1.0).abs() < 1e-15);
        assert_eq!(rep.n_safe_lambda, SafeCount::Finite(3));
        assert_eq!(rep.n_safe_horizon, SafeCount::Finite(3));
    }
}
