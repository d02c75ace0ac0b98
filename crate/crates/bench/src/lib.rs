//! Fixed inputs shared by the benchmarks.

use fairrecov::graphs::grid;
use fairrecov::model::{generate, Instance, Observation};
use fairrecov::spectral::SymMatrix;

/// Deterministic dense symmetric matrix with a spread spectrum.
pub fn symmetric_fixture(n: usize) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| {
        let v = ((i * 31 + j * 17) % 13) as f64 - 6.0;
        v / 7.0 + if i == j { i as f64 / n as f64 } else { 0.0 }
    })
}

/// Noisy grid instance with two fair attributes.
pub fn grid_instance(rows: usize, cols: usize, p: f64, seed: u64) -> (Instance, Observation) {
    generate(grid(rows, cols).expect("valid grid"), 2, p, p, seed).expect("valid instance")
}
