mod common;

use common::{fig, random_params, rng};
use leaky_staging::envelope::{
    reference_case, simulate_envelope, simulate_full, verify_balance_identity,
    verify_dominance_batch, verify_envelope_dominance, verify_log_growth_bound, DominanceCase,
    Impulse, ImpulseSchedule, SimGrid,
};
use leaky_staging::recovery::{simulate_recurrence, CarryOver, RecoveryConfig};
use leaky_staging::{Execution, ModelParams};
use rand::Rng;

fn random_case(rng: &mut impl Rng) -> DominanceCase {
    let params = random_params(rng);
    let dc = params.delta_c();
    let count = rng.random_range(1..=6);
    let mut times: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..10.0)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let events = times
        .into_iter()
        .map(|time| Impulse {
            time,
            size: dc * rng.random_range(0.0..3.0),
        })
        .collect();
    DominanceCase {
        schedule: ImpulseSchedule::new(events).unwrap(),
        params,
        initial_intensity: rng.random_range(0.0..1.0),
        initial_level: dc * rng.random_range(0.0..2.0),
        grid: SimGrid::new(12.0, 1e-2).unwrap(),
    }
}

#[test]
fn random_cases_are_dominated() {
    let mut rng = rng(51);
    let cases: Vec<_> = (0..100).map(|_| random_case(&mut rng)).collect();
    for (case, check) in cases
        .iter()
        .zip(verify_dominance_batch(&cases, Execution::default()))
    {
        let check = check.unwrap();
        assert!(check.dominated(), "{case:?}\n{check:?}");
        assert_eq!(check.clamp_count, 0);
        if let Some(growth) = check.log_growth {
            assert!(growth <= check.log_bound + 1e-9, "{check:?}");
        }
    }
}

#[test]
fn batch_modes_agree() {
    let mut rng = rng(52);
    let cases: Vec<_> = (0..16).map(|_| random_case(&mut rng)).collect();
    let seq = verify_dominance_batch(&cases, Execution::Sequential);
    let par = verify_dominance_batch(&cases, Execution::Parallel);
    for (a, b) in seq.into_iter().zip(par) {
        assert_eq!(a.unwrap(), b.unwrap());
    }
}

#[test]
fn reference_run_is_dominated_with_slack() {
    let case = reference_case(10.0, 1e-3).unwrap();
    let check = verify_envelope_dominance(&case).unwrap();
    assert!(check.dominated());
    let growth = check.log_growth.unwrap();
    assert!(growth < check.log_bound);
}

#[test]
fn envelope_reproduces_recurrence_at_events() {
    let mut rng = rng(53);
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let n = rng.random_range(1..8usize);
        let tau = rng.random_range(0.1..3.0);
        let sizes: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let schedule = ImpulseSchedule::equally_spaced(&sizes, tau).unwrap();
        let grid = SimGrid::new(tau * (n - 1) as f64, 0.05).unwrap();
        let traj = simulate_envelope(&schedule, &p, 0.0, grid).unwrap();
        let lambda = CarryOver::from_spacing(p.rho(), tau).unwrap();
        let config = RecoveryConfig::new(lambda, n, sizes.iter().sum()).unwrap();
        let rec = simulate_recurrence(&config, &sizes).unwrap();
        assert_eq!(traj.jumps.len(), n);
        for (jump, level) in traj.jumps.iter().zip(&rec.post_levels) {
            let a = traj.reservoir[jump.index];
            assert!(
                (a - level).abs() <= 1e-14 * level.max(1.0),
                "{a} vs {level}"
            );
        }
    }
}

#[test]
fn jump_increments_are_exact() {
    let mut rng = rng(54);
    for _ in 0..50 {
        let case = random_case(&mut rng);
        for traj in [
            simulate_envelope(&case.schedule, &case.params, case.initial_level, case.grid).unwrap(),
            simulate_full(
                &case.schedule,
                &case.params,
                case.initial_intensity,
                case.initial_level,
                case.grid,
            )
            .unwrap(),
        ] {
            for jump in &traj.jumps {
                let i = jump.index;
                assert_eq!(traj.times[i], traj.times[i - 1]);
                let step = traj.reservoir[i] - traj.reservoir[i - 1];
                assert!((step - jump.size).abs() <= 1e-12 * jump.size.max(1.0));
            }
            assert!(traj.times.windows(2).all(|w| w[0] <= w[1]));
            assert!(traj.reservoir.iter().all(|&a| a >= 0.0));
            if let Some(s) = &traj.intensity {
                assert!(s.iter().all(|&x| x >= 0.0));
            }
        }
    }
}

#[test]
fn zero_intensity_is_invariant_and_matches_envelope() {
    let case = reference_case(10.0, 1e-2).unwrap();
    let full = simulate_full(&case.schedule, &case.params, 0.0, 0.0, case.grid).unwrap();
    let red = simulate_envelope(&case.schedule, &case.params, 0.0, case.grid).unwrap();
    assert!(full.intensity.as_ref().unwrap().iter().all(|&s| s == 0.0));
    for (a, b) in full.reservoir.iter().zip(&red.reservoir) {
        assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }
}

fn terminal_intensity(step: f64) -> f64 {
    let p = fig();
    let schedule = ImpulseSchedule::from_pairs(&[(0.0, 0.9)]).unwrap();
    let traj = simulate_full(&schedule, &p, 0.2, 0.0, SimGrid::new(6.0, step).unwrap()).unwrap();
    traj.terminal().0.unwrap()
}

#[test]
fn rk4_converges_at_fourth_order() {
    let (a, b, c) = (
        terminal_intensity(0.2),
        terminal_intensity(0.1),
        terminal_intensity(0.05),
    );
    let order = ((a - b) / (b - c)).abs().log2();
    assert!(order >= 3.5, "observed order {order}");
}

#[test]
fn balance_identity_holds() {
    let mut residuals = Vec::new();
    for step in [0.04, 0.02, 0.01] {
        let case = reference_case(10.0, step).unwrap();
        let traj = simulate_full(&case.schedule, &case.params, 0.08, 0.0, case.grid).unwrap();
        let check = verify_balance_identity(&traj, &case.params).unwrap();
        assert_eq!(check.jumps_checked, 5);
        assert!(check.max_jump_residual <= 1e-12);
        residuals.push(check.max_interior_residual);
    }
    for w in residuals.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "observed order {order} from {residuals:?}");
    }
}

#[test]
fn log_growth_bound_on_random_runs() {
    let mut rng = rng(55);
    for _ in 0..100 {
        let mut case = random_case(&mut rng);
        case.initial_intensity = rng.random_range(1e-6..1.0);
        let traj = simulate_full(
            &case.schedule,
            &case.params,
            case.initial_intensity,
            case.initial_level,
            case.grid,
        )
        .unwrap();
        let check = verify_log_growth_bound(&traj, &case.params).unwrap();
        assert!(check.holds(1e-9), "{check:?}");
    }
}

#[test]
fn quiet_reservoir_gives_decay() {
    let p = fig();
    let traj = simulate_full(
        &ImpulseSchedule::empty(),
        &p,
        0.3,
        0.0,
        SimGrid::new(5.0, 1e-2).unwrap(),
    )
    .unwrap();
    let check = verify_log_growth_bound(&traj, &p).unwrap();
    assert!(check.log_growth <= 0.0);
    assert_eq!(check.log_bound, 0.0);
}

#[test]
fn bound_sharpens_as_intensity_vanishes() {
    let case = reference_case(10.0, 1e-3).unwrap();
    let gap = |s0: f64| {
        let traj = simulate_full(&case.schedule, &case.params, s0, 0.0, case.grid).unwrap();
        let c = verify_log_growth_bound(&traj, &case.params).unwrap();
        // Relative to the bound; S0 small keeps the reservoir on the envelope.
        (c.log_bound - c.log_growth) / c.log_bound.max(1e-300)
    };
    let (coarse, fine) = (gap(1e-3), gap(1e-6));
    assert!(fine >= 0.0);
    assert!(fine < coarse, "{fine} vs {coarse}");
}

#[test]
fn subthreshold_envelope_implies_nonpositive_pressure() {
    let mut rng = rng(56);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let dc = p.delta_c();
        let sizes: Vec<f64> = (0..4).map(|_| dc * rng.random_range(0.0..0.5)).collect();
        let schedule = ImpulseSchedule::equally_spaced(&sizes, 2.0).unwrap();
        let grid = SimGrid::new(8.0, 1e-2).unwrap();
        let red = simulate_envelope(&schedule, &p, 0.0, grid).unwrap();
        if red.reservoir.iter().any(|&a| a > dc) {
            continue;
        }
        let full = simulate_full(&schedule, &p, rng.random_range(0.0..1.0), 0.0, grid).unwrap();
        assert!(full.reservoir.iter().all(|&a| p.growth_pressure(a) <= 0.0));
    }
}

#[test]
fn schedule_beyond_horizon_is_rejected() {
    let p = ModelParams::new(0.6, 1.0, 1.8, 0.5).unwrap();
    let schedule = ImpulseSchedule::from_pairs(&[(0.0, 0.1), (5.0, 0.1)]).unwrap();
    assert!(simulate_envelope(&schedule, &p, 0.0, SimGrid::new(4.0, 0.1).unwrap()).is_err());
}
