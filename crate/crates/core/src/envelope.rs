//! Impulsive simulation of the scalar envelope and of the full nonlinear
//! two-variable system, with checks of envelope dominance, the balance
//! functional and the logarithmic growth bound.
//!
//! Both simulators share one time grid: every inter-event interval gets its
//! own uniform sub-grid whose step is at most the requested step and divides
//! the interval exactly, so impulses land on grid nodes. At an impulse the
//! pre-jump and post-jump states are both stored at the same time.
//!
//! The full system
//!
//! ```text
//! S' = S [(beta - mu) - beta S + (delta - beta) A]
//! A' = -(rho + delta S) A
//! ```
//!
//! is integrated with classical RK4 in the logarithmic coordinates
//! `u = ln S`, `w = ln A`. Both variables stay nonnegative by construction,
//! `S = 0` (`u = -inf`) is preserved exactly, and `w` decreases by at least
//! `rho` per unit time on every step because the RK4 weights are positive.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::model::ModelParams;
use crate::par::Execution;
use crate::quadrature::positive_pressure_integral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impulse {
    pub time: f64,
    pub size: f64,
}

/// Release times and sizes; times strictly increasing, sizes nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseSchedule {
    events: Vec<Impulse>,
}

impl ImpulseSchedule {
    pub fn new(events: Vec<Impulse>) -> Result<Self> {
        for (i, ev) in events.iter().enumerate() {
            if !ev.time.is_finite() || ev.time < 0.0 {
                return Err(Error::InvalidSchedule(format!(
                    "event {i}: time must be finite and >= 0, got {}",
                    ev.time
                )));
            }
            if !ev.size.is_finite() || ev.size < 0.0 {
                return Err(Error::InvalidSchedule(format!(
                    "event {i}: size must be finite and >= 0, got {}",
                    ev.size
                )));
            }
            if i > 0 && ev.time <= events[i - 1].time {
                return Err(Error::InvalidSchedule(format!(
                    "event {i}: times must be strictly increasing ({} after {})",
                    ev.time,
                    events[i - 1].time
                )));
            }
        }
        Ok(Self { events })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(time, size)| Impulse { time, size })
                .collect(),
        )
    }

    /// `n` releases at spacing `tau` starting at time zero.
    pub fn equally_spaced(sizes: &[f64], tau: f64) -> Result<Self> {
        require_positive("tau", tau)?;
        Self::new(
            sizes
                .iter()
                .enumerate()
                .map(|(k, &size)| Impulse {
                    time: k as f64 * tau,
                    size,
                })
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Self { events: Vec::new() }
    }

    pub fn events(&self) -> &[Impulse] {
        &self.events
    }

    pub fn total(&self) -> f64 {
        self.events.iter().map(|e| e.size).sum()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.events.last().map(|e| e.time)
    }
}

/// Simulation horizon and maximal step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    pub horizon: f64,
    pub step: f64,
}

impl SimGrid {
    pub fn new(horizon: f64, step: f64) -> Result<Self> {
        require_nonnegative("horizon", horizon)?;
        require_positive("step", step)?;
        Ok(Self { horizon, step })
    }

    fn check(&self, schedule: &ImpulseSchedule) -> Result<()> {
        if let Some(last) = schedule.last_time() {
            if last > self.horizon {
                return Err(Error::InvalidSchedule(format!(
                    "last event at t={last} lies beyond the horizon T={}",
                    self.horizon
                )));
            }
        }
        Ok(())
    }
}

/// Index of a post-jump sample and the scheduled size applied there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpMarker {
    pub index: usize,
    pub size: f64,
}

/// Sampled piecewise path. `intensity` is present only for the full system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub reservoir: Vec<f64>,
    pub intensity: Option<Vec<f64>>,
    /// Post-jump sample indices; the pre-jump sample sits at `index - 1`.
    pub jumps: Vec<JumpMarker>,
    /// Samples that had to be pulled back to zero or a finite value.
    pub clamp_count: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Final `(S, A)`; `S` is `None` for an envelope path.
    pub fn terminal(&self) -> (Option<f64>, f64) {
        let last = self.len() - 1;
        (
            self.intensity.as_ref().map(|s| s[last]),
            self.reservoir[last],
        )
    }
}

/// Visits the shared time grid. `on_jump(t, size)` fires at each impulse after
/// the pre-jump state has been recorded; `advance(dt)` moves the state by
/// one sub-step.
fn walk_grid(
    schedule: &ImpulseSchedule,
    grid: SimGrid,
    mut record: impl FnMut(f64, bool, f64),
    mut on_jump: impl FnMut(f64, f64),
    mut advance: impl FnMut(f64),
) {
    let events = schedule.events();
    let mut next_event = 0;
    let mut breakpoints: Vec<f64> = events.iter().map(|e| e.time).collect();
    if breakpoints.first().is_none_or(|&t| t > 0.0) {
        breakpoints.insert(0, 0.0);
    }
    if breakpoints.last().is_none_or(|&t| t < grid.horizon) {
        breakpoints.push(grid.horizon);
    }

    record(0.0, false, 0.0);
    for (seg, &start) in breakpoints.iter().enumerate() {
        if next_event < events.len() && events[next_event].time == start {
            let size = events[next_event].size;
            on_jump(start, size);
            record(start, true, size);
            next_event += 1;
        }
        let Some(&end) = breakpoints.get(seg + 1) else {
            break;
        };
        let len = end - start;
        let substeps = ((len / grid.step).ceil() as usize).max(1);
        let dt = len / substeps as f64;
        for i in 1..=substeps {
            advance(dt);
            let t = if i == substeps {
                end
            } else {
                start + dt * i as f64
            };
            record(t, false, 0.0);
        }
    }
}

/// Scalar envelope `A' = -rho A` with jumps, using the exact exponential
/// between events.
pub fn simulate_envelope(
    schedule: &ImpulseSchedule,
    params: &ModelParams,
    initial_level: f64,
    grid: SimGrid,
) -> Result<Trajectory> {
    grid.check(schedule)?;
    require_nonnegative("a0", initial_level)?;
    let rho = params.rho();
    let mut times = Vec::new();
    let mut reservoir = Vec::new();
    let mut jumps = Vec::new();
    // Level and time at the start of the current exponential piece.
    let anchor = std::cell::Cell::new((initial_level, 0.0f64));
    let level_at = |t: f64| {
        let (a, t0) = anchor.get();
        if t == t0 {
            a
        } else {
            a * (-rho * (t - t0)).exp()
        }
    };
    walk_grid(
        schedule,
        grid,
        |t, jumped, size| {
            times.push(t);
            reservoir.push(level_at(t));
            if jumped {
                jumps.push(JumpMarker {
                    index: times.len() - 1,
                    size,
                });
            }
        },
        |t, size| anchor.set((level_at(t) + size, t)),
        |_| {},
    );
    Ok(Trajectory {
        times,
        reservoir,
        intensity: None,
        jumps,
        clamp_count: 0,
    })
}

/// Full nonlinear system with impulses on `A`, integrated by RK4 in log coordinates.
pub fn simulate_full(
    schedule: &ImpulseSchedule,
    params: &ModelParams,
    initial_intensity: f64,
    initial_level: f64,
    grid: SimGrid,
) -> Result<Trajectory> {
    grid.check(schedule)?;
    require_nonnegative("s0", initial_intensity)?;
    require_nonnegative("a0", initial_level)?;
    let (beta, mu, delta, rho) = (params.beta(), params.mu(), params.delta(), params.rho());
    let alpha = delta - beta;
    let rhs = |u: f64, w: f64| {
        let s = u.exp();
        let a = w.exp();
        ((beta - mu) + alpha * a - beta * s, -rho - delta * s)
    };

    let state = std::cell::Cell::new((initial_intensity.ln(), initial_level.ln()));
    // Reservoir value right after a jump, stored exactly rather than via exp(ln(.)).
    let pending = std::cell::Cell::new(None::<f64>);
    let mut times = Vec::new();
    let mut reservoir = Vec::new();
    let mut intensity = Vec::new();
    let mut jumps = Vec::new();
    let mut clamp_count = 0;

    walk_grid(
        schedule,
        grid,
        |t, jumped, size| {
            let (u, w) = state.get();
            let mut s = u.exp();
            let mut a = pending.take().unwrap_or_else(|| w.exp());
            if !s.is_finite() || s < 0.0 {
                s = if s.is_nan() { 0.0 } else { s.max(0.0) };
                clamp_count += 1;
            }
            if !a.is_finite() || a < 0.0 {
                a = if a.is_nan() { 0.0 } else { a.max(0.0) };
                clamp_count += 1;
            }
            times.push(t);
            intensity.push(s);
            reservoir.push(a);
            if jumped {
                jumps.push(JumpMarker {
                    index: times.len() - 1,
                    size,
                });
            }
        },
        |_, size| {
            let (u, w) = state.get();
            let post = w.exp() + size;
            pending.set(Some(post));
            state.set((u, post.ln()));
        },
        |dt| {
            let (u, w) = state.get();
            let k1 = rhs(u, w);
            let k2 = rhs(u + 0.5 * dt * k1.0, w + 0.5 * dt * k1.1);
            let k3 = rhs(u + 0.5 * dt * k2.0, w + 0.5 * dt * k2.1);
            let k4 = rhs(u + dt * k3.0, w + dt * k3.1);
            let du = dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            let dw = dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            state.set((u + du, w + dw));
        },
    );
    Ok(Trajectory {
        times,
        reservoir,
        intensity: Some(intensity),
        jumps,
        clamp_count,
    })
}

/// One envelope-vs-full comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCase {
    pub schedule: ImpulseSchedule,
    pub params: ModelParams,
    pub initial_intensity: f64,
    pub initial_level: f64,
    pub grid: SimGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    /// Largest `A_full - A_red` over the samples (nonpositive when dominated).
    pub max_violation: f64,
    /// Tolerance the violation was compared against.
    pub tolerance: f64,
    pub exposure_full: f64,
    pub exposure_red: f64,
    /// `ln(S(T)/S(0))`; `None` when `S(0) = 0`.
    pub log_growth: Option<f64>,
    /// Integral of `[g(A_full)]_+`.
    pub log_bound: f64,
    pub clamp_count: usize,
}

impl EnvelopeCheck {
    pub fn dominated(&self) -> bool {
        self.max_violation <= self.tolerance
            && self.exposure_full <= self.exposure_red + EXPOSURE_SLACK
    }
}

/// Base dominance tolerance before the integrator allowance.
pub const DOMINANCE_TOL: f64 = 1e-9;
/// Round-off allowance when comparing the two sampled exposures.
const EXPOSURE_SLACK: f64 = 1e-12;

/// Simulates both systems on the same grid and compares them sample by sample.
///
/// The allowance added to [`DOMINANCE_TOL`] is `step^4` scaled by the largest
/// envelope level.
pub fn verify_envelope_dominance(case: &DominanceCase) -> Result<EnvelopeCheck> {
    let red = simulate_envelope(&case.schedule, &case.params, case.initial_level, case.grid)?;
    let full = simulate_full(
        &case.schedule,
        &case.params,
        case.initial_intensity,
        case.initial_level,
        case.grid,
    )?;
    let max_violation = full
        .reservoir
        .iter()
        .zip(&red.reservoir)
        .map(|(f, r)| f - r)
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = red.reservoir.iter().copied().fold(1.0, f64::max);
    let d = case.params.derive();
    let exposure_red = positive_pressure_integral(&red.times, &red.reservoir, d.alpha, d.delta_c);
    let exposure_full =
        positive_pressure_integral(&full.times, &full.reservoir, d.alpha, d.delta_c);
    let log_growth = if case.initial_intensity > 0.0 {
        Some(log_growth(&full))
    } else {
        None
    };
    Ok(EnvelopeCheck {
        max_violation,
        tolerance: DOMINANCE_TOL + case.grid.step.powi(4) * scale,
        exposure_full,
        exposure_red,
        log_growth,
        log_bound: exposure_full,
        clamp_count: full.clamp_count,
    })
}

/// [`verify_envelope_dominance`] over many independent cases.
pub fn verify_dominance_batch(
    cases: &[DominanceCase],
    exec: Execution,
) -> Vec<Result<EnvelopeCheck>> {
    exec.map_slice(cases, verify_envelope_dominance)
}

fn log_growth(full: &Trajectory) -> f64 {
    let s = full.intensity.as_ref().expect("full trajectory");
    s[s.len() - 1].ln() - s[0].ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceCheck {
    /// Largest `|dPhi - (alpha/delta) q| / max(q, 1)` over impulses.
    pub max_jump_residual: f64,
    /// Largest mismatch between the central difference of `Phi` and
    /// `-gamma S - beta S^2 - (alpha rho / delta) A` at interior nodes.
    pub max_interior_residual: f64,
    pub jumps_checked: usize,
    pub interior_checked: usize,
}

/// Checks the balance functional `Phi = S + (alpha/delta) A` along a full trajectory.
pub fn verify_balance_identity(traj: &Trajectory, params: &ModelParams) -> Result<BalanceCheck> {
    let s = traj
        .intensity
        .as_ref()
        .ok_or_else(|| Error::arg("trajectory", "balance check needs a full-system trajectory"))?;
    let a = &traj.reservoir;
    let t = &traj.times;
    let d = params.derive();
    let weight = d.alpha / params.delta();
    let phi = |i: usize| s[i] + weight * a[i];

    let mut max_jump: f64 = 0.0;
    for jump in &traj.jumps {
        let i = jump.index;
        let step = phi(i) - phi(i - 1);
        let residual = (step - weight * jump.size).abs() / jump.size.max(1.0);
        max_jump = max_jump.max(residual);
    }

    let mut max_interior: f64 = 0.0;
    let mut interior = 0;
    for i in 1..t.len().saturating_sub(1) {
        let (h_left, h_right) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        if h_left <= 0.0 || h_right <= 0.0 || (h_left - h_right).abs() > 1e-9 * h_left.max(h_right)
        {
            continue;
        }
        let slope = (phi(i + 1) - phi(i - 1)) / (t[i + 1] - t[i - 1]);
        let expected = -d.gamma * s[i]
            - params.beta() * s[i] * s[i]
            - d.alpha * params.rho() / params.delta() * a[i];
        max_interior = max_interior.max((slope - expected).abs());
        interior += 1;
    }
    Ok(BalanceCheck {
        max_jump_residual: max_jump,
        max_interior_residual: max_interior,
        jumps_checked: traj.jumps.len(),
        interior_checked: interior,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrowthCheck {
    pub log_growth: f64,
    pub log_bound: f64,
}

impl LogGrowthCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.log_growth <= self.log_bound + tol
    }
}

/// Both sides of `ln(S(T)/S(0)) <= integral of [g(A)]_+` along a full trajectory.
pub fn verify_log_growth_bound(traj: &Trajectory, params: &ModelParams) -> Result<LogGrowthCheck> {
    let s = traj.intensity.as_ref().ok_or_else(|| {
        Error::arg(
            "trajectory",
            "log-growth check needs a full-system trajectory",
        )
    })?;
    if s[0] <= 0.0 {
        return Err(Error::arg("s0", "log-growth bound needs S(0) > 0"));
    }
    let d = params.derive();
    Ok(LogGrowthCheck {
        log_growth: log_growth(traj),
        log_bound: positive_pressure_integral(&traj.times, &traj.reservoir, d.alpha, d.delta_c),
    })
}

/// The reference envelope run: rates (0.6, 1, 1.8, 0.5), `S(0) = 0.08`,
/// releases 0.46 then four of 0.24 at `t = 0, 2, 4, 6, 8`.
pub fn reference_case(horizon: f64, step: f64) -> Result<DominanceCase> {
    Ok(DominanceCase {
        schedule: ImpulseSchedule::from_pairs(&[
            (0.0, 0.46),
            (2.0, 0.24),
            (4.0, 0.24),
            (6.0, 0.24),
            (8.0, 0.24),
        ])?,
        params: ModelParams::new(0.6, 1.0, 1.8, 0.5)?,
        initial_intensity: 0.08,
        initial_level: 0.0,
        grid: SimGrid::new(horizon, step)?,
    })
}
