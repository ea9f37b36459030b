#![allow(dead_code)]

use gibbsgap_core::models::{Coupling, FreeProduct, IsingGeneral, ModelSpec, PottsAf};
use rand::Rng;

/// Ising chain or star on `n` sites with independent couplings in `[−b, b]`.
pub fn random_ising(rng: &mut impl Rng, n: usize, b: f64, star: bool) -> ModelSpec {
    let couplings = (1..n)
        .map(|k| {
            let j = rng.random_range(-b..=b);
            if star {
                Coupling::pair(0, k, j)
            } else {
                Coupling::pair(k - 1, k, j)
            }
        })
        .collect();
    ModelSpec::Ising(IsingGeneral::new(n, couplings))
}

pub fn random_potts_chain(rng: &mut impl Rng, n: usize, colors: usize, j_max: f64) -> ModelSpec {
    ModelSpec::Potts(PottsAf::chain(n, colors, rng.random_range(0.05..j_max)))
}

pub fn random_free(rng: &mut impl Rng, n: usize, q: usize) -> ModelSpec {
    let marginals = (0..n).map(|_| random_simplex(rng, q, 0.05)).collect();
    ModelSpec::Free(FreeProduct { marginals, values: None })
}

/// Strictly positive probability vector with entries bounded below by `floor/len`.
pub fn random_simplex(rng: &mut impl Rng, len: usize, floor: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| floor + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub fn random_function(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}
