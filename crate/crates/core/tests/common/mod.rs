#![allow(dead_code)]

use leaky_staging::ModelParams;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fig() -> ModelParams {
    ModelParams::new(0.6, 1.0, 1.8, 0.5).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Valid rates with every gap at least 0.05.
pub fn random_params(rng: &mut impl Rng) -> ModelParams {
    let beta = rng.random_range(0.05..2.0);
    let mu = beta + rng.random_range(0.05..2.0);
    let delta = mu + rng.random_range(0.05..3.0);
    let rho = rng.random_range(0.05..3.0);
    ModelParams::new(beta, mu, delta, rho).unwrap()
}

pub fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (0.05..2.0f64, 0.05..2.0f64, 0.05..3.0f64, 0.05..3.0f64)
        .prop_map(|(b, gm, gd, rho)| ModelParams::new(b, b + gm, b + gm + gd, rho).unwrap())
}

/// Uniform point on the simplex `{x >= 0, sum x = 1}` in `n` dimensions.
pub fn dirichlet(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}
