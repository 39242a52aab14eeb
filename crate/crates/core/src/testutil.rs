//! Oracles and fixtures shared by unit tests.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{haar_unitary, ComplexMatrix};
use crate::rng::rng_from_seed;

pub fn random_complex_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng_from_seed(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Leading block of a Haar unitary: operator norm and entries bounded by 1.
pub fn random_contraction(n: usize, seed: u64) -> ComplexMatrix {
    haar_unitary(n + 2, seed).unwrap().matrix().leading(n)
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `Σ_σ Π_i a_{i,σ(i)}` over all `n!` permutations.
pub fn naive_permanent(a: &ComplexMatrix) -> Complex64 {
    permutations(a.rows())
        .iter()
        .map(|s| (0..a.rows()).map(|i| a.get(i, s[i])).product::<Complex64>())
        .sum()
}
