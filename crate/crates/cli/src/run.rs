//! Dispatch from a resolved configuration to the solver.

use leaky_staging::allocation::{
    continuous_relaxed_count, k_safe, minimal_safe_count, optimal_split, overhead_optimal_count,
    SplitProblem,
};
use leaky_staging::envelope::{
    simulate_envelope, simulate_full, verify_balance_identity, verify_envelope_dominance,
    verify_log_growth_bound, DominanceCase, ImpulseSchedule, SimGrid,
};
use leaky_staging::exposure::{
    exposure_closed_form, exposure_derivative, exposure_quadrature, exposure_second_derivative,
};
use leaky_staging::phase::{phase_tables, PhaseTables};
use leaky_staging::recovery::{
    horizon_capacity, horizon_feasibility, safe_count_fixed_lambda, simulate_recurrence,
    state_plan, state_value, CarryOver, HorizonVerdict, RecoveryConfig, SafeCount,
};
use leaky_staging::{Execution, ModelParams};
use serde_json::{json, Map, Value};

use crate::config::{
    CommandBlock, ExposureBlock, HorizonBlock, OverheadBlock, PeakBlock, PeakPolicy, PhaseBlock,
    RunConfig, SimulateBlock, SplitBlock,
};
use crate::error::{config_err, Result};
use crate::output::{Cell, Dimensionless, Table};

const QUADRATURE_TOL: f64 = 1e-12;

/// Command result before it is wrapped in the output envelope.
#[derive(Debug, Clone)]
pub struct Report {
    pub payload: Value,
    pub table: Table,
    pub warnings: Vec<String>,
    pub dimensionless: Option<Dimensionless>,
    /// Verdict-type outcome that scripts should see as exit status 2.
    pub signal: bool,
}

impl Report {
    fn new(payload: Value, table: Table) -> Self {
        Self {
            payload,
            table,
            warnings: Vec::new(),
            dimensionless: None,
            signal: false,
        }
    }
}

pub fn run(config: &RunConfig, exec: Execution) -> Result<Report> {
    match &config.command {
        CommandBlock::Exposure(b) => exposure(config, b),
        CommandBlock::Split(b) => split(config, b),
        CommandBlock::Overhead(b) => overhead(config, b),
        CommandBlock::Peak(b) => peak(config, b),
        CommandBlock::Horizon(b) => horizon(config, b),
        CommandBlock::Simulate(b) => simulate(config, b),
        CommandBlock::Phase(b) => phase(config, b, exec),
    }
}

fn ratio_only(r: f64) -> Option<Dimensionless> {
    Some(Dimensionless {
        r: Some(r),
        h: None,
        k: None,
    })
}

/// Finite number, or the string `"unbounded"`.
fn bound(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("unbounded")
    }
}

fn safe_count_value(c: SafeCount) -> Value {
    match c {
        SafeCount::Finite(n) => json!(n),
        SafeCount::Unbounded => json!("unbounded"),
    }
}

fn safe_count_cell(c: SafeCount) -> Cell {
    match c {
        SafeCount::Finite(n) => Cell::Int(n),
        SafeCount::Unbounded => "unbounded".into(),
    }
}

/// Row objects keyed by the table header; empty cells are omitted.
fn table_rows(table: &Table) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, cell) in table.header.iter().zip(row) {
                let v = match cell {
                    Cell::Num(x) => bound(*x),
                    Cell::Int(n) => json!(n),
                    Cell::Bool(b) => json!(b),
                    Cell::Text(s) => json!(s),
                    Cell::Empty => continue,
                };
                obj.insert((*name).to_string(), v);
            }
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

fn exposure(config: &RunConfig, block: &ExposureBlock) -> Result<Report> {
    let p = config.require_model()?;
    if block.q.is_empty() {
        return Err(config_err(
            "[exposure] `q` must list at least one release size",
        ));
    }
    let dc = p.delta_c();
    let mut table = Table::new(&[
        "q",
        "r",
        "exposure",
        "active_duration",
        "derivative",
        "second_derivative",
        "quadrature",
    ]);
    for &q in &block.q {
        let v = exposure_closed_form(q, &p)?;
        table.push(vec![
            q.into(),
            (q / dc).into(),
            v.value.into(),
            v.active_duration.into(),
            exposure_derivative(q, &p)?.into(),
            exposure_second_derivative(q, &p)?.into(),
            exposure_quadrature(q, &p, QUADRATURE_TOL)?.into(),
        ]);
    }
    let payload = json!({ "rows": table_rows(&table) });
    let mut report = Report::new(payload, table);
    if let [q] = block.q[..] {
        report.dimensionless = ratio_only(q / dc);
    }
    Ok(report)
}

fn split(config: &RunConfig, block: &SplitBlock) -> Result<Report> {
    let p = config.require_model()?;
    let res = optimal_split(&SplitProblem::new(block.load, block.n, p)?)?;
    let n_safe = minimal_safe_count(block.load, &p)?;
    let per_release: Vec<f64> = res
        .releases
        .iter()
        .map(|&q| exposure_closed_form(q, &p).map(|v| v.value))
        .collect::<leaky_staging::Result<_>>()?;
    let payload = json!({
        "load": block.load,
        "n": block.n,
        "releases": res.releases,
        "release_exposure": per_release,
        "total_exposure": res.total_exposure,
        "is_safe": res.is_safe,
        "unique_minimizer": res.unique_minimizer,
        "minimal_safe_count": n_safe,
    });
    let mut table = Table::records();
    table
        .scalar("load", block.load)
        .scalar("n", block.n)
        .series("release", &res.releases)
        .series("release_exposure", &per_release)
        .scalar("total_exposure", res.total_exposure)
        .scalar("is_safe", res.is_safe)
        .scalar("unique_minimizer", res.unique_minimizer)
        .scalar("minimal_safe_count", n_safe);
    let mut report = Report::new(payload, table);
    report.dimensionless = ratio_only(block.load / p.delta_c());
    if !res.unique_minimizer {
        report.warnings.push(
            "zero-exposure split is not unique; reporting the canonical fill at delta_c from the first release".into(),
        );
    }
    Ok(report)
}

fn overhead(config: &RunConfig, block: &OverheadBlock) -> Result<Report> {
    let (r, k) = match (block.r, block.k, block.load, block.overhead) {
        (Some(r), Some(k), None, None) => (r, k),
        (None, None, Some(load), Some(cost)) => {
            let p = config.require_model()?;
            (load / p.delta_c(), cost / p.exposure_scale())
        }
        _ => {
            return Err(config_err(
                "[overhead] give either `r` and `k`, or `load` and `overhead` (with [params])",
            ))
        }
    };
    let res = overhead_optimal_count(r, k)?;
    let ks = k_safe(r)?;
    let n_cont = continuous_relaxed_count(r, k)?;
    let payload = json!({
        "r": r,
        "k": k,
        "n_star": res.n_star,
        "cost": res.cost,
        "residual_exposure": res.residual_exposure,
        "is_fully_safe": res.is_fully_safe,
        "ties": res.ties,
        "n_safe": res.n_safe,
        "k_safe": bound(ks),
        "continuous_count": n_cont,
    });
    let mut table = Table::records();
    table
        .scalar("r", r)
        .scalar("k", k)
        .scalar("n_star", res.n_star)
        .scalar("cost", res.cost)
        .scalar("residual_exposure", res.residual_exposure)
        .scalar("is_fully_safe", res.is_fully_safe)
        .series("tie", &res.ties)
        .scalar("n_safe", res.n_safe)
        .scalar("k_safe", ks)
        .scalar("continuous_count", n_cont);
    let mut report = Report::new(payload, table);
    report.dimensionless = Some(Dimensionless {
        r: Some(r),
        h: None,
        k: Some(k),
    });
    if res.ties.len() > 1 {
        report.warnings.push(format!(
            "co-optimal release counts {:?}; reporting the smallest",
            res.ties
        ));
    }
    Ok(report)
}

fn carry_over(p: &ModelParams, block: &PeakBlock) -> Result<CarryOver> {
    match (block.lambda, block.spacing) {
        (Some(l), None) => Ok(CarryOver::new(l)?),
        (None, Some(tau)) => Ok(CarryOver::from_spacing(p.rho(), tau)?),
        _ => Err(config_err(
            "[peak] give exactly one of `lambda` or `spacing`",
        )),
    }
}

fn peak(config: &RunConfig, block: &PeakBlock) -> Result<Report> {
    let p = config.require_model()?;
    let dc = p.delta_c();
    let lambda = carry_over(&p, block)?;
    let rc = RecoveryConfig::with_initial_level(lambda, block.n, block.load, block.initial_level)?;
    let plan = match block.policy {
        PeakPolicy::Optimal => state_plan(&rc)?,
        PeakPolicy::Uniform => {
            simulate_recurrence(&rc, &vec![block.load / block.n as f64; block.n])?
        }
    };
    let optimum = state_value(block.n, block.initial_level, block.load, lambda)?;
    let levels: Vec<f64> = plan.post_levels.iter().map(|a| a / dc).collect();
    let safe = p.is_subthreshold(plan.peak);
    let n_safe = if block.load > 0.0 {
        Some(safe_count_fixed_lambda(block.load, lambda, &p)?)
    } else {
        None
    };
    let payload = json!({
        "policy": block.policy,
        "lambda": lambda.value(),
        "releases": plan.releases,
        "post_levels": plan.post_levels,
        "levels_over_delta_c": levels,
        "peak": plan.peak,
        "peak_over_delta_c": plan.peak / dc,
        "optimal_peak": optimum,
        "capacity_multiplier": plan.capacity_multiplier,
        "max_safe_load": dc * plan.capacity_multiplier,
        "threshold_safe": safe,
        "safe_count": n_safe,
        "degenerate": plan.degenerate,
    });
    let mut table = Table::records();
    table
        .scalar("lambda", lambda.value())
        .series("release", &plan.releases)
        .series("post_level", &plan.post_levels)
        .series("level_over_delta_c", &levels)
        .scalar("peak", plan.peak)
        .scalar("peak_over_delta_c", plan.peak / dc)
        .scalar("optimal_peak", optimum)
        .scalar("capacity_multiplier", plan.capacity_multiplier)
        .scalar("max_safe_load", dc * plan.capacity_multiplier)
        .scalar("threshold_safe", safe)
        .scalar("safe_count", n_safe)
        .scalar("degenerate", plan.degenerate);
    let mut report = Report::new(payload, table);
    report.dimensionless = Some(Dimensionless {
        r: Some(block.load / dc),
        h: block
            .spacing
            .map(|tau| p.rho() * tau * (block.n.max(1) - 1) as f64),
        k: None,
    });
    if plan.degenerate {
        report
            .warnings
            .push("zero load: all releases are zero".into());
    }
    if block.policy == PeakPolicy::Optimal && block.initial_level > 0.0 {
        report.warnings.push(
            "initial level > 0: the reported profile is one optimal choice among several".into(),
        );
    }
    Ok(report)
}

fn horizon(config: &RunConfig, block: &HorizonBlock) -> Result<Report> {
    let model = config.model()?;
    let need = |what: &str| {
        model.ok_or_else(|| {
            config_err(format!(
                "[horizon] `{what}` in physical units needs [params]"
            ))
        })
    };
    let r = match (block.r, block.load) {
        (Some(r), None) => r,
        (None, Some(load)) => load / need("load")?.delta_c(),
        _ => return Err(config_err("[horizon] give exactly one of `r` or `load`")),
    };
    let h = match (block.h, block.horizon) {
        (Some(h), None) => h,
        (None, Some(t)) => need("horizon")?.rho() * t,
        _ => return Err(config_err("[horizon] give exactly one of `h` or `horizon`")),
    };
    let tol = config.tolerance();
    let verdict = horizon_feasibility(r, h, tol)?;
    let capacities: Vec<(u64, f64)> = block
        .n
        .iter()
        .map(|&n| horizon_capacity(n, h).map(|b| (n, b)))
        .collect::<leaky_staging::Result<_>>()?;

    let cap_json: Vec<Value> = capacities
        .iter()
        .map(|&(n, b)| json!({ "n": n, "b_n": b, "safe": r <= b + tol }))
        .collect();
    let mut payload = json!({
        "r": r,
        "h": h,
        "verdict": verdict.label(),
        "safe_count": safe_count_value(verdict.safe_count()),
        "frontier": 1.0 + h,
        "capacities": cap_json,
    });
    let mut table = Table::records();
    table
        .scalar("r", r)
        .scalar("h", h)
        .scalar("verdict", verdict.label())
        .scalar("safe_count", safe_count_cell(verdict.safe_count()))
        .scalar("frontier", 1.0 + h);
    for &(n, b) in &capacities {
        table.push(vec!["b_n".into(), n.into(), b.into()]);
    }
    if let Some(p) = model {
        let sup = p.delta_c() * (1.0 + h);
        payload["supremal_safe_load"] = json!(sup);
        table.scalar("supremal_safe_load", sup);
    }
    let mut report = Report::new(payload, table);
    report.dimensionless = Some(Dimensionless {
        r: Some(r),
        h: Some(h),
        k: None,
    });
    match verdict {
        HorizonVerdict::SupremalBoundary => {
            report.signal = true;
            report.warnings.push(
                "load sits on the supremal boundary r = 1 + h; no finite schedule attains it"
                    .into(),
            );
        }
        HorizonVerdict::Infeasible => {
            report.signal = true;
            report.warnings.push(
                "load exceeds the horizon capacity 1 + h; no schedule is threshold-safe".into(),
            );
        }
        _ => {}
    }
    Ok(report)
}

fn simulate(config: &RunConfig, block: &SimulateBlock) -> Result<Report> {
    let p = config.require_model()?;
    let schedule = ImpulseSchedule::from_pairs(&block.schedule)?;
    let grid = SimGrid::new(block.horizon, block.step)?;
    let red = simulate_envelope(&schedule, &p, block.a0, grid)?;
    let full = simulate_full(&schedule, &p, block.s0, block.a0, grid)?;
    let check = verify_envelope_dominance(&DominanceCase {
        schedule: schedule.clone(),
        params: p,
        initial_intensity: block.s0,
        initial_level: block.a0,
        grid,
    })?;
    let balance = verify_balance_identity(&full, &p)?;
    let log_growth = if block.s0 > 0.0 {
        Some(verify_log_growth_bound(&full, &p)?)
    } else {
        None
    };

    let s_full = full
        .intensity
        .as_ref()
        .expect("full trajectory has intensity");
    let mut table = Table::new(&["t", "A_red", "S_full", "A_full", "g_full", "g_red"]);
    let mut columns: [Vec<f64>; 6] = Default::default();
    for (((&t, &a_red), &s), &a_full) in red
        .times
        .iter()
        .zip(&red.reservoir)
        .zip(s_full)
        .zip(&full.reservoir)
    {
        let row = [
            t,
            a_red,
            s,
            a_full,
            p.growth_pressure(a_full),
            p.growth_pressure(a_red),
        ];
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
        table.push(row.iter().map(|&v| v.into()).collect());
    }
    let [t, a_red, s, a_full, g_full, g_red] = columns;
    let payload = json!({
        "summary": {
            "dominated": check.dominated(),
            "max_violation": check.max_violation,
            "tolerance": check.tolerance,
            "exposure_full": check.exposure_full,
            "exposure_red": check.exposure_red,
            "log_growth": log_growth.map(|c| c.log_growth),
            "log_bound": check.log_bound,
            "balance_jump_residual": balance.max_jump_residual,
            "balance_interior_residual": balance.max_interior_residual,
            "clamp_count": check.clamp_count,
            "samples": red.len(),
        },
        "rows": { "t": t, "A_red": a_red, "S_full": s, "A_full": a_full, "g_full": g_full, "g_red": g_red },
    });
    let mut report = Report::new(payload, table);
    report.dimensionless = Some(Dimensionless {
        r: Some(schedule.total() / p.delta_c()),
        h: Some(p.rho() * block.horizon),
        k: None,
    });
    if !check.dominated() {
        report.warnings.push(format!(
            "full reservoir exceeds the envelope by {:e} (tolerance {:e})",
            check.max_violation, check.tolerance
        ));
    }
    if check.clamp_count > 0 {
        report.warnings.push(format!(
            "{} samples were clamped to stay nonnegative",
            check.clamp_count
        ));
    }
    Ok(report)
}

const PHASE_HEADER: [&str; 9] = [
    "panel", "quantity", "index", "r", "h", "k", "t", "value", "label",
];

struct PhaseRow {
    panel: &'static str,
    quantity: &'static str,
    index: Option<u64>,
    r: Option<f64>,
    h: Option<f64>,
    k: Option<f64>,
    t: Option<f64>,
    value: Option<f64>,
    label: Option<&'static str>,
}

impl PhaseRow {
    fn new(panel: &'static str, quantity: &'static str) -> Self {
        Self {
            panel,
            quantity,
            index: None,
            r: None,
            h: None,
            k: None,
            t: None,
            value: None,
            label: None,
        }
    }

    fn cells(self) -> Vec<Cell> {
        vec![
            self.panel.into(),
            self.quantity.into(),
            self.index.into(),
            self.r.into(),
            self.h.into(),
            self.k.into(),
            self.t.into(),
            self.value.into(),
            self.label.into(),
        ]
    }
}

fn phase_table(tables: &PhaseTables) -> Table {
    let mut table = Table::new(&PHASE_HEADER);
    let mut push = |row: PhaseRow| table.push(row.cells());
    if let Some(f) = &tables.feasibility {
        for c in &f.curves {
            push(PhaseRow {
                index: Some(c.n),
                h: Some(c.h),
                value: Some(c.b_n),
                ..PhaseRow::new("a", "b_n")
            });
        }
        for fr in &f.frontier {
            push(PhaseRow {
                h: Some(fr.h),
                value: Some(fr.limit),
                ..PhaseRow::new("a", "frontier")
            });
        }
    }
    if let Some(regimes) = &tables.regimes {
        for row in regimes {
            let index = match row.verdict.safe_count() {
                SafeCount::Finite(n) => Some(n),
                SafeCount::Unbounded => None,
            };
            push(PhaseRow {
                index,
                r: Some(row.r),
                h: Some(row.h),
                label: Some(row.verdict.label()),
                ..PhaseRow::new("a", "regime")
            });
        }
    }
    if let Some(s) = &tables.sawtooth {
        for f in &s.frontier {
            let finite = f.k_safe.is_finite();
            push(PhaseRow {
                index: Some(f.n_safe),
                r: Some(f.r),
                value: finite.then_some(f.k_safe),
                label: (!finite).then_some("unbounded"),
                ..PhaseRow::new("b", "k_safe")
            });
        }
        for o in &s.optima {
            push(PhaseRow {
                index: Some(o.n_star),
                r: Some(o.r),
                k: Some(o.k),
                value: Some(o.cost),
                label: Some(if o.fully_safe { "safe" } else { "unsafe" }),
                ..PhaseRow::new("b", "n_star")
            });
        }
    }
    if let Some(c) = &tables.panel_c {
        let r = Some(c.setup.r);
        let h = Some(c.setup.h);
        push(PhaseRow {
            r,
            h,
            value: Some(c.lambda),
            ..PhaseRow::new("c", "lambda")
        });
        push(PhaseRow {
            r,
            h,
            index: Some(c.setup.n as u64),
            value: Some(c.capacity),
            ..PhaseRow::new("c", "capacity")
        });
        let series: [(&'static str, &[f64]); 4] = [
            ("uniform_release", &c.uniform_releases),
            ("uniform_level", &c.uniform_levels),
            ("front_loaded_release", &c.front_releases),
            ("front_loaded_level", &c.front_levels),
        ];
        for (quantity, values) in series {
            for (i, &v) in values.iter().enumerate() {
                push(PhaseRow {
                    index: Some(i as u64),
                    r,
                    h,
                    value: Some(v),
                    ..PhaseRow::new("c", quantity)
                });
            }
        }
        for (i, pt) in c.path.iter().enumerate() {
            push(PhaseRow {
                index: Some(i as u64),
                t: Some(pt.t),
                value: Some(pt.level),
                label: Some(pt.policy.label()),
                ..PhaseRow::new("c", "path")
            });
        }
    }
    table
}

fn phase(config: &RunConfig, block: &PhaseBlock, exec: Execution) -> Result<Report> {
    let tables = phase_tables(
        block.panel,
        &block.grid(),
        block.panel_c,
        config.tolerance(),
        exec,
    )?;
    let table = phase_table(&tables);
    let payload = json!({ "rows": table_rows(&table) });
    Ok(Report::new(payload, table))
}
