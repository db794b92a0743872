//! Lazy Metropolis–Hastings mixing matrices with prescribed stationary weights.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::weights::WeightVector;

/// Structural class of a constructed mixing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatrixKind {
    /// Row stochastic with stationary distribution `λ/n`.
    RowStochasticLambda,
    /// Symmetric, rows and columns both sum to 1 (the uniform-weight case).
    DoublyStochastic,
}

/// Row-stochastic mixing matrix over a graph, with its declared stationary
/// weight vector and laziness floor. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    entries: DMatrix<f64>,
    stationary: WeightVector,
    laziness: f64,
    kind: MatrixKind,
}

impl MixingMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn stationary(&self) -> &WeightVector {
        &self.stationary
    }

    pub fn laziness(&self) -> f64 {
        self.laziness
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// CSV dump: n rows of n comma-separated reals at 17 significant digits
    /// (round-trip exact for 64-bit floats).
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| format!("{:.16e}", self.entries[(i, j)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Test-only: reinterprets the matrix with a different declared
    /// stationary vector (used to exercise detailed-balance rejection).
    #[cfg(test)]
    pub(crate) fn with_claimed_stationary(mut self, stationary: WeightVector) -> Self {
        self.stationary = stationary;
        self.kind = MatrixKind::RowStochasticLambda;
        self
    }

    /// Measures every structural invariant; `pass` iff all residuals ≤ 1e-10.
    pub fn validate(&self) -> ValidationReport {
        validate_against(&self.entries, &self.stationary, self.laziness, self.kind)
    }
}

/// Residuals of each mixing-matrix invariant.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub row_sum_residual: f64,
    pub stationarity_residual: f64,
    pub detailed_balance_residual: f64,
    pub diagonal_floor_violation: f64,
    pub negative_entry: f64,
    pub column_sum_residual: Option<f64>,
    pub pass: bool,
}

const VALIDATE_TOL: f64 = 1e-10;

fn validate_against(
    w: &DMatrix<f64>,
    stationary: &WeightVector,
    laziness: f64,
    kind: MatrixKind,
) -> ValidationReport {
    let n = w.nrows();
    let lam = stationary.values();

    let mut row_sum_residual = 0.0f64;
    let mut negative_entry = 0.0f64;
    let mut diagonal_floor_violation = 0.0f64;
    let mut detailed_balance_residual = 0.0f64;
    for i in 0..n {
        let sum: f64 = (0..n).map(|j| w[(i, j)]).sum();
        row_sum_residual = row_sum_residual.max((sum - 1.0).abs());
        diagonal_floor_violation = diagonal_floor_violation.max(laziness - w[(i, i)]);
        for j in 0..n {
            negative_entry = negative_entry.max(-w[(i, j)]);
            if j > i {
                detailed_balance_residual =
                    detailed_balance_residual.max((lam[i] * w[(i, j)] - lam[j] * w[(j, i)]).abs());
            }
        }
    }
    diagonal_floor_violation = diagonal_floor_violation.max(0.0);

    // stationarity: || λᵀW/n − λᵀ/n ||_∞
    let nf = n as f64;
    let mut stationarity_residual = 0.0f64;
    for j in 0..n {
        let lhs: f64 = (0..n).map(|i| lam[i] * w[(i, j)]).sum::<f64>() / nf;
        stationarity_residual = stationarity_residual.max((lhs - lam[j] / nf).abs());
    }

    let column_sum_residual = match kind {
        MatrixKind::DoublyStochastic => {
            let mut r = 0.0f64;
            for j in 0..n {
                let sum: f64 = (0..n).map(|i| w[(i, j)]).sum();
                r = r.max((sum - 1.0).abs());
            }
            Some(r)
        }
        MatrixKind::RowStochasticLambda => None,
    };

    let pass = row_sum_residual <= VALIDATE_TOL
        && stationarity_residual <= VALIDATE_TOL
        && detailed_balance_residual <= VALIDATE_TOL
        && diagonal_floor_violation <= VALIDATE_TOL
        && negative_entry <= VALIDATE_TOL
        && column_sum_residual.is_none_or(|r| r <= VALIDATE_TOL);

    ValidationReport {
        row_sum_residual,
        stationarity_residual,
        detailed_balance_residual,
        diagonal_floor_violation,
        negative_entry,
        column_sum_residual,
        pass,
    }
}

/// Lazy Metropolis–Hastings matrix with stationary distribution `λ/n`.
///
/// Off-diagonal neighbor entries are `(1-ε)/d_i · min(1, λ_j d_i / (λ_i d_j))`;
/// the diagonal absorbs the remainder and never drops below `ε`.
pub fn metropolis(g: &Graph, weights: &WeightVector, epsilon: f64) -> Result<MixingMatrix> {
    build(g, weights.clone(), epsilon, MatrixKind::RowStochasticLambda)
}

/// The uniform-weight specialization: symmetric and doubly stochastic.
pub fn doubly_stochastic(g: &Graph, epsilon: f64) -> Result<MixingMatrix> {
    build(
        g,
        WeightVector::uniform(g.n()),
        epsilon,
        MatrixKind::DoublyStochastic,
    )
}

fn build(g: &Graph, weights: WeightVector, epsilon: f64, kind: MatrixKind) -> Result<MixingMatrix> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadLaziness(epsilon));
    }
    if g.n() != weights.n() {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: weights.n(),
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let lam = weights.values();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let di = g.degree(i) as f64;
        let mut off_sum = 0.0;
        for &j in g.neighbors(i) {
            let dj = g.degree(j) as f64;
            let ratio = (lam[j] * di) / (lam[i] * dj);
            let entry = (1.0 - epsilon) / di * ratio.min(1.0);
            w[(i, j)] = entry;
            off_sum += entry;
        }
        w[(i, i)] = 1.0 - off_sum;
    }
    Ok(MixingMatrix {
        entries: w,
        stationary: weights,
        laziness: epsilon,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::topology::{erdos_renyi, ring, static_exponential};

    #[test]
    fn ring_uniform_entries() {
        let g = ring(6).unwrap();
        let w = metropolis(&g, &WeightVector::uniform(6), 0.3).unwrap();
        for i in 0..6 {
            assert!((w.entries()[(i, i)] - 0.30).abs() < 1e-15);
            for &j in g.neighbors(i) {
                assert!((w.entries()[(i, j)] - 0.35).abs() < 1e-15);
            }
        }
        assert!(w.validate().pass);
    }

    #[test]
    fn two_node_path_matches_hand_computation() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let lam = WeightVector::new(&[1.5, 0.5]).unwrap();
        let w = metropolis(&g, &lam, 0.3).unwrap();
        let e = w.entries();
        assert!((e[(0, 0)] - (1.0 - 0.7 / 3.0)).abs() < 1e-12);
        assert!((e[(0, 1)] - 0.7 / 3.0).abs() < 1e-12);
        assert!((e[(1, 0)] - 0.7).abs() < 1e-12);
        assert!((e[(1, 1)] - 0.3).abs() < 1e-12);
        // detailed balance: 1.5 * W01 = 0.5 * W10
        assert!((1.5 * e[(0, 1)] - 0.5 * e[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_reduce_to_doubly_stochastic() {
        let g = static_exponential(16).unwrap();
        let a = metropolis(&g, &WeightVector::uniform(16), 0.3).unwrap();
        let b = doubly_stochastic(&g, 0.3).unwrap();
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn star_doubly_stochastic_entries() {
        // hub 0 with three leaves
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let w = doubly_stochastic(&g, 0.3).unwrap();
        let e = w.entries();
        for leaf in 1..4 {
            assert!((e[(0, leaf)] - 0.7 / 3.0).abs() < 1e-15);
            assert!((e[(leaf, 0)] - 0.7 / 3.0).abs() < 1e-15);
        }
        assert!(w.validate().pass);
        assert_eq!(w.kind(), MatrixKind::DoublyStochastic);
    }

    #[test]
    fn column_sums_for_doubly_stochastic() {
        let g = erdos_renyi(10, 0.5, 42).unwrap();
        assert!(g.is_connected());
        let w = doubly_stochastic(&g, 0.3).unwrap();
        for j in 0..10 {
            let s: f64 = (0..10).map(|i| w.entries()[(i, j)]).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_matrix_fails_validation() {
        let g = ring(5).unwrap();
        let mut w = metropolis(&g, &WeightVector::uniform(5), 0.3).unwrap();
        w.entries[(2, 3)] += 1e-3;
        let report = w.validate();
        assert!(!report.pass);
        assert!((report.row_sum_residual - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = ring(4).unwrap();
        assert!(matches!(
            metropolis(&g, &WeightVector::uniform(4), 0.0),
            Err(Error::BadLaziness(_))
        ));
        assert!(matches!(
            metropolis(&g, &WeightVector::uniform(4), 1.0),
            Err(Error::BadLaziness(_))
        ));
        let disconnected = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            metropolis(&disconnected, &WeightVector::uniform(4), 0.3),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn rows_sum_to_one_and_ones_is_fixed() {
        let g = erdos_renyi(12, 0.4, 7).unwrap();
        assert!(g.is_connected());
        let mut rng = SeededRng::from_seed(5);
        let raw: Vec<f64> = (0..12).map(|_| 0.1 + rng.next_f64() * 2.0).collect();
        let lam = WeightVector::new(&raw).unwrap();
        let w = metropolis(&g, &lam, 0.3).unwrap();
        let ones = nalgebra::DVector::from_element(12, 1.0);
        let fixed = w.entries() * &ones;
        for i in 0..12 {
            assert!((fixed[i] - 1.0).abs() < 1e-12);
        }
        assert!(w.validate().pass);
    }

    #[test]
    fn scale_invariance_of_construction() {
        let g = static_exponential(8).unwrap();
        let raw = [0.3, 0.8, 1.0, 0.9, 0.7, 1.0, 2.0, 2.2];
        let scaled: Vec<f64> = raw.iter().map(|v| v * 3.7).collect();
        let a = metropolis(&g, &WeightVector::new(&raw).unwrap(), 0.3).unwrap();
        let b = metropolis(&g, &WeightVector::new(&scaled).unwrap(), 0.3).unwrap();
        let diff = (a.entries() - b.entries()).abs().max();
        assert!(diff < 1e-14);
    }

    #[test]
    fn csv_roundtrip_exact() {
        let g = ring(4).unwrap();
        let w = metropolis(&g, &WeightVector::new(&[0.4, 1.3, 0.9, 1.4]).unwrap(), 0.3).unwrap();
        let csv = w.to_csv();
        for (i, line) in csv.lines().enumerate() {
            for (j, field) in line.split(',').enumerate() {
                let parsed: f64 = field.parse().unwrap();
                assert_eq!(parsed.to_bits(), w.entries()[(i, j)].to_bits());
            }
        }
    }
}
