//! Shared fixtures for the criterion benchmarks.

use wgt_core::mixing::{doubly_stochastic, metropolis, MixingMatrix};
use wgt_core::sim::{generate_problem, QuadraticProblem};
use wgt_core::topology::static_exponential;
use wgt_core::weights::{preset_a, WeightVector};
use wgt_core::Graph;

pub struct Fixture {
    pub graph: Graph,
    pub weights: WeightVector,
    pub w_row: MixingMatrix,
    pub w_ds: MixingMatrix,
    pub problem: QuadraticProblem,
}

pub fn benchmark_fixture() -> Fixture {
    let graph = static_exponential(16).unwrap();
    let weights = preset_a();
    let w_row = metropolis(&graph, &weights, 0.3).unwrap();
    let w_ds = doubly_stochastic(&graph, 0.3).unwrap();
    let problem = generate_problem(16, 10, (5.5, 12.5), 3.0, 0.01, 1.0, 7).unwrap();
    Fixture {
        graph,
        weights,
        w_row,
        w_ds,
        problem,
    }
}

/// Scaled-up weights for larger spectral benchmarks: the 16 presets tiled.
pub fn tiled_weights(n: usize) -> WeightVector {
    let base = preset_a();
    let raw: Vec<f64> = (0..n).map(|i| base.get(i % 16)).collect();
    WeightVector::new(&raw).unwrap()
}
