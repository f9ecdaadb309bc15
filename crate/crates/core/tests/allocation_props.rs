mod common;

use common::{params_strategy, random_params, rng};
use leaky_staging::allocation::{
    continuous_relaxed_count, k_safe, min_exposure, minimal_safe_count, optimal_split,
    overhead_optimal_count, scaled_cost, SplitProblem,
};
use leaky_staging::exposure::exposure;
use leaky_staging::model::guarded_ceil;
use proptest::prelude::*;
use rand::Rng;

fn total_exposure(releases: &[f64], p: &leaky_staging::ModelParams) -> f64 {
    releases.iter().map(|&q| exposure(q, p).unwrap()).sum()
}

#[test]
fn grid_search_never_beats_equal_split() {
    let mut rng = rng(31);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let load = p.delta_c() * rng.random_range(0.2..8.0);
        for n in [2usize, 3] {
            let best = optimal_split(&SplitProblem::new(load, n, p).unwrap())
                .unwrap()
                .total_exposure;
            let m = 120;
            for i in 0..=m {
                for j in 0..=(if n == 3 { m - i } else { 0 }) {
                    let q1 = load * i as f64 / m as f64;
                    let split = if n == 2 {
                        vec![q1, (load - q1).max(0.0)]
                    } else {
                        let q2 = load * j as f64 / m as f64;
                        vec![q1, q2, (load - q1 - q2).max(0.0)]
                    };
                    assert!(total_exposure(&split, &p) >= best - 1e-6);
                }
            }
        }
    }
}

#[test]
fn safety_equivalence() {
    let mut rng = rng(32);
    for _ in 0..2000 {
        let p = random_params(&mut rng);
        let n = rng.random_range(1..8usize);
        let load = p.delta_c() * rng.random_range(0.01..10.0);
        let res = optimal_split(&SplitProblem::new(load, n, p).unwrap()).unwrap();
        assert_eq!(
            res.is_safe,
            load <= n as f64 * p.delta_c() + p.threshold_tol()
        );
        assert_eq!(res.is_safe, res.total_exposure == 0.0);
        let sum: f64 = res.releases.iter().sum();
        assert!((sum - load).abs() <= 1e-12 * load);
        assert!(
            (res.total_exposure - total_exposure(&res.releases, &p)).abs()
                <= 1e-12 * res.total_exposure.max(1.0)
        );
    }
}

#[test]
fn equal_split_is_strict_minimum_above_capacity() {
    let mut rng = rng(33);
    for _ in 0..300 {
        let p = random_params(&mut rng);
        let n = rng.random_range(2..6usize);
        let load = n as f64 * p.delta_c() * rng.random_range(1.05..5.0);
        let base = min_exposure(load, n, &p).unwrap();
        for _ in 0..20 {
            // Zero-sum perturbation with max-norm 1e-3 Q.
            let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = d.iter().sum::<f64>() / n as f64;
            d.iter_mut().for_each(|x| *x -= mean);
            let norm = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let split: Vec<f64> = d
                .iter()
                .map(|x| load / n as f64 + 1e-3 * load * x / norm)
                .collect();
            assert!(total_exposure(&split, &p) > base);
        }
    }
}

#[test]
fn enumeration_agrees_on_random_ratios() {
    let mut rng = rng(34);
    for _ in 0..10_000 {
        let r = rng.random_range(1e-3..20.0);
        let k = rng.random_range(0.0..5.0);
        let res = overhead_optimal_count(r, k).unwrap();
        let top = guarded_ceil(r).max(1);
        let (mut best_n, mut best) = (1, f64::INFINITY);
        for n in 1..=top {
            let c = scaled_cost(r, k, n);
            if c < best {
                best = c;
                best_n = n;
            }
        }
        assert!(
            (res.cost - best).abs() <= 1e-12 * best.max(1.0),
            "r={r} k={k}"
        );
        assert!(res.ties.contains(&best_n), "r={r} k={k}");
        assert_eq!(res.n_star, res.ties[0]);
        assert_eq!(res.n_safe, top);
    }
}

#[test]
fn sawtooth_shape() {
    for m in 1..8u64 {
        let m_f = m as f64;
        // Continuous inside (m, m+1]: small steps give small changes.
        let mut prev = k_safe(m_f + 1e-3).unwrap();
        for i in 2..=1000 {
            let r = m_f + i as f64 * 1e-3;
            let cur = k_safe(r).unwrap();
            assert!((cur - prev).abs() < 5e-3, "r={r}");
            prev = cur;
        }
        // Drop to ~0 just past the integer.
        let before = k_safe(m_f + 1.0).unwrap();
        let after = k_safe(m_f + 1.0 + 1e-9).unwrap();
        assert!(before > 0.05 && after < 1e-8, "m={m}: {before} -> {after}");
    }
}

#[test]
fn frontier_flip_at_k_safe() {
    let mut rng = rng(35);
    for _ in 0..2000 {
        let r: f64 = rng.random_range(1.01..20.0);
        if (r - r.round()).abs() < 1e-3 {
            continue;
        }
        let ks = k_safe(r).unwrap();
        let below = overhead_optimal_count(r, (ks - 1e-9).max(0.0)).unwrap();
        let above = overhead_optimal_count(r, ks + 1e-9).unwrap();
        assert!(below.is_fully_safe, "r={r} ks={ks}");
        assert!(!above.is_fully_safe, "r={r} ks={ks}");
    }
}

proptest! {
    #[test]
    fn minimal_safe_count_is_minimal(p in params_strategy(), x in 0.01..50.0f64) {
        let load = x * p.delta_c();
        let n = minimal_safe_count(load, &p).unwrap();
        prop_assert!(min_exposure(load, n as usize, &p).unwrap() == 0.0);
        if n > 1 {
            prop_assert!(min_exposure(load, n as usize - 1, &p).unwrap() > 0.0);
        }
    }

    #[test]
    fn continuous_count_is_stationary(r in 0.5..50.0f64, k in 0.0..3.0f64) {
        let n = continuous_relaxed_count(r, k).unwrap();
        // d/dn [n k + r - n - n ln(r/n)] = k - ln(r/n)
        let f = |n: f64| n * k + r - n - n * (r / n).ln();
        let h = 1e-5 * n;
        prop_assert!(((f(n + h) - f(n - h)) / (2.0 * h)).abs() < 1e-6);
    }
}
