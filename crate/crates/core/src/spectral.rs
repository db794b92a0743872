//! Weighted-space spectral analysis: similarity transforms, eigenvalue
//! extraction, weighted spectral norms, and the gap-comparison conditions.
//!
//! Every eigensolve of a row-stochastic matrix routes through its symmetric
//! similarity transform `D_λ^{1/2} W D_λ^{-1/2}`, which detailed balance
//! guarantees to be symmetric; nonsymmetric solvers are only used as small-n
//! test oracles.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mixing::{metropolis, MatrixKind, MixingMatrix};
use crate::weights::WeightVector;

/// Fixed slack constant in the penalty factor `R`.
pub const ETA: f64 = 1.8e-3;

const DETAILED_BALANCE_LIMIT: f64 = 1e-8;

/// Eigenvalue summary of a mixing matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// All eigenvalues, sorted descending; the largest is 1.
    pub eigenvalues: Vec<f64>,
    /// Second-largest eigenvalue magnitude `max(|σ₂|, |σ_n|)`.
    pub rho: f64,
    /// Spectral gap `1 − rho`.
    pub gap: f64,
    /// Metric distortion `κ_λ` of the declared stationary weights.
    pub kappa: f64,
}

/// `⟨X, Y⟩_λ = Σ_i λ_i ⟨x_i, y_i⟩` over the rows of `X` and `Y`.
pub fn weighted_inner(x: &DMatrix<f64>, y: &DMatrix<f64>, weights: &WeightVector) -> Result<f64> {
    if x.nrows() != weights.n() || y.nrows() != weights.n() || x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            left: x.nrows().max(y.nrows()),
            right: weights.n(),
        });
    }
    let lam = weights.values();
    let mut acc = 0.0;
    for i in 0..x.nrows() {
        let mut dot = 0.0;
        for j in 0..x.ncols() {
            dot += x[(i, j)] * y[(i, j)];
        }
        acc += lam[i] * dot;
    }
    Ok(acc)
}

/// Weighted Frobenius norm `(Σ_i λ_i ‖x_i‖²)^{1/2}`.
pub fn weighted_frobenius_norm(x: &DMatrix<f64>, weights: &WeightVector) -> Result<f64> {
    weighted_inner(x, x, weights).map(f64::sqrt)
}

/// `D_λ^{1/2} W D_λ^{-1/2}`, symmetric whenever `W` satisfies detailed
/// balance with respect to its stationary weights.
pub fn similarity_transform(w: &MixingMatrix) -> Result<DMatrix<f64>> {
    let residual = w.validate().detailed_balance_residual;
    if residual > DETAILED_BALANCE_LIMIT {
        return Err(Error::DetailedBalanceViolation {
            residual,
            limit: DETAILED_BALANCE_LIMIT,
        });
    }
    Ok(similarity_of(w.entries(), w.stationary()))
}

fn similarity_of(w: &DMatrix<f64>, weights: &WeightVector) -> DMatrix<f64> {
    let n = w.nrows();
    let lam = weights.values();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = (lam[i] / lam[j]).sqrt() * w[(i, j)];
        }
    }
    s
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(symmetrized(m), f64::EPSILON, 0)
        .ok_or(Error::EigensolverFailure)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("real eigenvalues"));
    Ok(vals)
}

/// Full spectrum of a mixing matrix via its symmetric form.
pub fn spectrum(w: &MixingMatrix) -> Result<SpectralReport> {
    let symmetric = match w.kind() {
        MatrixKind::RowStochasticLambda => similarity_transform(w)?,
        MatrixKind::DoublyStochastic => w.entries().clone(),
    };
    let eigenvalues = symmetric_eigenvalues(&symmetric)?;
    let n = eigenvalues.len();
    let rho = if n > 1 {
        eigenvalues[1].abs().max(eigenvalues[n - 1].abs())
    } else {
        0.0
    };
    Ok(SpectralReport {
        rho,
        gap: 1.0 - rho,
        kappa: w.stationary().kappa(),
        eigenvalues,
    })
}

/// Largest singular value of `D_λ^{1/2} M D_λ^{-1/2}`, i.e. the operator norm
/// of `M` in the λ-weighted geometry.
pub fn weighted_spectral_norm(m: &DMatrix<f64>, weights: &WeightVector) -> f64 {
    similarity_of(m, weights)
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Projector `M⋆ = 𝟙 λᵀ / n` onto the stationary direction (equals `J` for
/// uniform weights).
pub fn stationary_projector(weights: &WeightVector) -> DMatrix<f64> {
    let n = weights.n();
    let nf = n as f64;
    let lam = weights.values();
    DMatrix::from_fn(n, n, |_, j| lam[j] / nf)
}

/// Closed-form squared weighted norm of the t-th power of the error-recursion
/// block matrix: `(t² + 2 + t√(t²+4))/2 · κ · ρ^{2t}`.
///
/// The κ multiplier is 1 when the mixing matrix is self-adjoint in the
/// weighted geometry (exact equality) and `κ_λ` otherwise (upper bound).
pub fn block_power_norm_closed_form(t: u32, rho: f64, kappa: f64) -> f64 {
    debug_assert!(t >= 1);
    let tf = t as f64;
    let coefficient = (tf * tf + 2.0 + tf * (tf * tf + 4.0).sqrt()) / 2.0;
    coefficient * kappa * rho.powi(2 * t as i32)
}

/// The t-th power of the block matrix `[[W⋆, −W⋆], [0, W⋆]]`, laid out
/// directly as `[[W⋆ᵗ, −t·W⋆ᵗ], [0, W⋆ᵗ]]`.
pub fn assemble_block_power(w_star: &DMatrix<f64>, t: u32) -> DMatrix<f64> {
    let n = w_star.nrows();
    let mut power = DMatrix::identity(n, n);
    for _ in 0..t {
        power = &power * w_star;
    }
    let tf = t as f64;
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            block[(i, j)] = power[(i, j)];
            block[(i, n + j)] = -tf * power[(i, j)];
            block[(n + i, n + j)] = power[(i, j)];
        }
    }
    block
}

/// Penalty factor `R = max{(1+η) κ_λ^{-1/3}, λ_max^{-1/2}}` with `η` fixed.
///
/// Strictly below 1 for sufficiently heterogeneous weights; at uniform
/// weights the formula degenerates to `1 + η > 1`.
pub fn penalty_factor_r(weights: &WeightVector) -> f64 {
    let kappa = weights.kappa();
    let branch_kappa = (1.0 + ETA) * kappa.powf(-1.0 / 3.0);
    let branch_lambda = weights.lambda_max().powf(-0.5);
    branch_kappa.max(branch_lambda)
}

/// Gap comparison `1 − ρ_Λ ≥ R (1 − ρ_J)`: when true, the weighted-mixing
/// strategy converges strictly faster despite any spectral-gap deficit.
pub fn gap_condition_holds(gap_lambda: f64, gap_j: f64, weights: &WeightVector) -> bool {
    gap_lambda >= penalty_factor_r(weights) * gap_j
}

/// Pairwise degree/weight compatibility
/// `R·min(d_i/d_j, 1) ≤ sqrt(λ_i/λ_j) ≤ R⁻¹·max(d_i/d_j, 1)` over every
/// ordered pair; a sufficient condition for [`gap_condition_holds`].
pub fn degree_weight_compatible(g: &Graph, weights: &WeightVector) -> Result<bool> {
    if g.n() != weights.n() {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: weights.n(),
        });
    }
    let r = penalty_factor_r(weights);
    let lam = weights.values();
    let deg = g.degrees();
    for i in 0..g.n() {
        for j in 0..g.n() {
            if i == j {
                continue;
            }
            let ratio = (lam[i] / lam[j]).sqrt();
            let dd = deg[i] as f64 / deg[j] as f64;
            if ratio < r * dd.min(1.0) || ratio > dd.max(1.0) / r {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Normalized Laplacian `ℒ(λ) = I − D_λ^{1/2} W D_λ^{-1/2}` of the lazy
/// weighted walk; positive semidefinite with null vector `D_λ^{1/2} 𝟙`.
pub fn weighted_laplacian(g: &Graph, weights: &WeightVector, epsilon: f64) -> Result<DMatrix<f64>> {
    let w = metropolis(g, weights, epsilon)?;
    let s = similarity_transform(&w)?;
    Ok(DMatrix::identity(g.n(), g.n()) - s)
}

/// Null vector `D_λ^{1/2} 𝟙` of [`weighted_laplacian`].
pub fn laplacian_null_vector(weights: &WeightVector) -> DVector<f64> {
    DVector::from_iterator(weights.n(), weights.values().iter().map(|l| l.sqrt()))
}

/// Graph Laplacian over the transformed edge weights
/// `w̃_ij = (1−ε)·min((1/d_i)√(λ_i/λ_j), (1/d_j)√(λ_j/λ_i))`, with the
/// diagonal equal to the off-diagonal row sum.
///
/// Its quadratic form is the plain edge sum
/// `zᵀLz = ½ Σ_{(i,j)∈E} w̃_ij (z_i − z_j)²`, which is what makes the pairwise
/// degree/weight condition translate into a Loewner comparison edge by edge.
/// It differs from [`weighted_laplacian`] only in the diagonal: that one
/// keeps the walk's spectrum (`σ(ℒ) = 1 − σ(W)`), this one keeps the
/// edge-difference quadratic form. The two coincide for uniform weights.
pub fn transformed_edge_laplacian(
    g: &Graph,
    weights: &WeightVector,
    epsilon: f64,
) -> Result<DMatrix<f64>> {
    let w = metropolis(g, weights, epsilon)?;
    let s = similarity_of(w.entries(), weights);
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                l[(i, j)] = -s[(i, j)];
                row_sum += s[(i, j)];
            }
        }
        l[(i, i)] = row_sum;
    }
    Ok(l)
}

/// Second-smallest eigenvalue of a symmetric PSD matrix with a known
/// one-dimensional null space.
pub fn second_smallest_eigenvalue(l: &DMatrix<f64>, null_vector: &DVector<f64>) -> Result<f64> {
    debug_assert!(
        (l * null_vector).norm() <= 1e-8 * null_vector.norm().max(1.0),
        "claimed null vector is not in the kernel"
    );
    let vals = symmetric_eigenvalues(l)?;
    Ok(vals[vals.len() - 2])
}
