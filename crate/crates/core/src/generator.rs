//! Seeded Erdős–Rényi `G(n, p)` graphs.
//!
//! Pairs `(u, v)` with `u < v` are visited in lexicographic order and each
//! draws one uniform value in `[0, 1)` from a ChaCha8 stream; the edge is
//! kept iff the value is `< p_link`. `p_link = 1.0` is therefore always the
//! complete graph and `p_link = 0.0` always edgeless.
//!
//! Suites derive one seed per graph with [`derive_seed`]:
//! `mix(mix(index) ^ base)`, where `mix` is the SplitMix64 finalizer. `mix`
//! is a bijection on `u64`, so for a fixed base distinct indices always get
//! distinct seeds, and graphs can be generated in any order or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("p_link must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    n: usize,
    p_link: f64,
    seed: u64,
}

impl GeneratorParams {
    pub fn new(n: usize, p_link: f64, seed: u64) -> Result<Self, GeneratorError> {
        if !(0.0..=1.0).contains(&p_link) {
            return Err(GeneratorError::InvalidProbability(p_link));
        }
        Ok(GeneratorParams { n, p_link, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_link(&self) -> f64 {
        self.p_link
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub fn erdos_renyi(params: &GeneratorParams) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < params.p_link {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).expect("generated pairs are in range and loop-free")
}

/// SplitMix64 finalizer; a bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed `index` of `base`; injective in `index` for a fixed `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix64(mix64(index) ^ base)
}

/// `count` graphs; graph `k` is generated from `derive_seed(seed, k)`.
pub fn suite(n: usize, p_link: f64, count: usize, seed: u64) -> Result<Vec<Graph>, GeneratorError> {
    GeneratorParams::new(n, p_link, seed)?;
    Ok((0..count)
        .into_par_iter()
        .map(|k| {
            let params = GeneratorParams {
                n,
                p_link,
                seed: derive_seed(seed, k as u64),
            };
            erdos_renyi(&params)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn er(n: usize, p: f64, seed: u64) -> Graph {
        erdos_renyi(&GeneratorParams::new(n, p, seed).unwrap())
    }

    #[test]
    fn extreme_probabilities() {
        for seed in [0, 1, 42, u64::MAX] {
            assert_eq!(er(10, 0.0, seed).edge_count(), 0);
            assert_eq!(er(10, 1.0, seed), Graph::complete(10));
        }
    }

    #[test]
    fn rejects_bad_probability() {
        for p in [-0.1, 1.5, f64::NAN] {
            assert!(GeneratorParams::new(10, p, 0).is_err());
        }
    }

    #[test]
    fn same_seed_same_graph() {
        assert_eq!(er(12, 0.4, 7), er(12, 0.4, 7));
        assert_ne!(er(12, 0.4, 7), er(12, 0.4, 8));
    }

    #[test]
    fn mean_edge_count_matches_binomial() {
        // Binomial(45, 0.5): mean 22.5, sd sqrt(11.25); the mean of 1000 draws
        // has standard error 0.106. The 99% interval is +-2.576 standard errors.
        let total: usize = (0..1000).map(|s| er(10, 0.5, s).edge_count()).sum();
        let mean = total as f64 / 1000.0;
        let standard_error = (45.0 * 0.25f64).sqrt() / 1000f64.sqrt();
        assert!((mean - 22.5).abs() <= 2.576 * standard_error, "mean {mean}");
    }

    #[test]
    fn suites_are_deterministic() {
        assert!(suite(10, 0.5, 0, 3).unwrap().is_empty());
        let a = suite(10, 0.5, 3, 3).unwrap();
        assert_eq!(a, suite(10, 0.5, 3, 3).unwrap());
        assert_eq!(a.len(), 3);
        assert_eq!(a[1], er(10, 0.5, derive_seed(3, 1)));
        for g in suite(10, 1.0, 5, 3).unwrap() {
            assert_eq!(g, Graph::complete(10));
        }
    }

    #[test]
    fn derived_seeds_do_not_collide() {
        let seeds: HashSet<u64> = (0..100_000).map(|k| derive_seed(12345, k)).collect();
        assert_eq!(seeds.len(), 100_000);
    }
}
