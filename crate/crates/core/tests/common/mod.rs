//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use phrobust::oracle::{derived_rng, random_passive_model, RandomPassive};
use phrobust::Model;
use rand::Rng;

pub const CORPUS_SEED: u64 = 2024;

pub fn m1() -> Model {
    Model::scalar(-1.0, 1.0, 1.0, 1.0)
}

pub fn m1u() -> Model {
    Model::scalar(1.0, 1.0, 1.0, 1.0)
}

/// `count` strictly passive models with `n <= 6`, `m <= 3` generated from random pH data.
pub fn corpus(count: usize) -> Vec<RandomPassive<f64>> {
    let mut rng = derived_rng(CORPUS_SEED, 0);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=6);
            let m = rng.random_range(1..=3);
            random_passive_model(&mut rng, n, m)
        })
        .collect()
}
