//! Decentralized stochastic gradient tracking on a synthetic least-squares
//! problem with heterogeneous local optima and seeded gradient noise.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::MixingMatrix;
use crate::rng::{composite_seed, init_seed, SeededRng};
use crate::weights::WeightVector;

/// How the node weights enter the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Weights folded into the local losses; symmetric doubly stochastic
    /// mixing and a diagonal weight matrix on the tracker increment.
    #[serde(rename = "I")]
    WeightedLoss,
    /// Original losses; row-stochastic mixing whose stationary distribution
    /// carries the weights, identity on the tracker increment.
    #[serde(rename = "II")]
    WeightedMixing,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::WeightedLoss => "I",
            Strategy::WeightedMixing => "II",
        }
    }
}

/// Per-node quadratic `F_i(θ) = ζ_i/2 ‖θ − c_i‖² + reg/2 ‖θ‖²` with optional
/// Gaussian gradient noise of standard deviation `noise_sigma`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    n: usize,
    d: usize,
    zeta: Vec<f64>,
    centers: DMatrix<f64>,
    reg: f64,
    noise_sigma: f64,
    mu0: f64,
    base_seed: u64,
}

/// Samples a problem instance: curvatures `ζ_i ~ U[lo, hi]`, a shared
/// standard-normal base center, and per-node centers offset from it by
/// `mu0` along independent random unit directions.
pub fn generate_problem(
    n: usize,
    d: usize,
    zeta_range: (f64, f64),
    mu0: f64,
    reg: f64,
    sigma: f64,
    seed: u64,
) -> Result<QuadraticProblem> {
    if n < 2 {
        return Err(Error::TooFewNodes { n, required: 2 });
    }
    if d < 1 {
        return Err(Error::BadRange("dimension must be at least 1".into()));
    }
    let (lo, hi) = zeta_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::BadRange(format!("bad curvature range [{lo}, {hi}]")));
    }
    if mu0 < 0.0 || reg < 0.0 || sigma < 0.0 {
        return Err(Error::BadRange(
            "mu0, reg, and sigma must be nonnegative".into(),
        ));
    }
    let mut rng = SeededRng::from_seed(seed);
    let zeta: Vec<f64> = (0..n).map(|_| rng.uniform_in(lo, hi)).collect();
    let mut base = vec![0.0; d];
    rng.fill_standard_normal(&mut base);
    let mut centers = DMatrix::zeros(n, d);
    let mut direction = vec![0.0; d];
    for i in 0..n {
        rng.fill_standard_normal(&mut direction);
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        for j in 0..d {
            centers[(i, j)] = base[j] + mu0 * direction[j] / norm;
        }
    }
    Ok(QuadraticProblem {
        n,
        d,
        zeta,
        centers,
        reg,
        noise_sigma: sigma,
        mu0,
        base_seed: seed,
    })
}

impl QuadraticProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn reg(&self) -> f64 {
        self.reg
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn center(&self, i: usize) -> DVector<f64> {
        self.centers.row(i).transpose()
    }

    /// Smoothness constant of the local losses: `max_i ζ_i + reg`.
    pub fn beta(&self) -> f64 {
        self.zeta.iter().cloned().fold(0.0, f64::max) + self.reg
    }

    /// Gradient-noise variance `υ² = σ² d` (iid normal per coordinate).
    pub fn upsilon2(&self) -> f64 {
        self.noise_sigma * self.noise_sigma * self.d as f64
    }

    pub fn local_loss(&self, i: usize, theta: &DVector<f64>) -> f64 {
        let diff = theta - self.center(i);
        0.5 * self.zeta[i] * diff.norm_squared() + 0.5 * self.reg * theta.norm_squared()
    }

    /// Exact gradient `ζ_i (θ − c_i) + reg·θ`.
    pub fn local_gradient(&self, i: usize, theta: &DVector<f64>) -> DVector<f64> {
        let mut g = theta - self.center(i);
        g *= self.zeta[i];
        g += theta * self.reg;
        g
    }

    /// Exact gradient plus `σ ξ`, with `ξ` drawn from a generator freshly
    /// seeded by the composite seed `s0 + 1000 i + 10 t`.
    pub fn stochastic_gradient(
        &self,
        i: usize,
        t: usize,
        theta: &DVector<f64>,
        s0: u64,
    ) -> DVector<f64> {
        let mut g = self.local_gradient(i, theta);
        if self.noise_sigma > 0.0 {
            let mut rng = SeededRng::from_seed(composite_seed(s0, i, t));
            let mut noise = vec![0.0; self.d];
            rng.fill_standard_normal(&mut noise);
            for j in 0..self.d {
                g[j] += self.noise_sigma * noise[j];
            }
        }
        g
    }

    /// Weighted global loss `F(θ) = (1/n) Σ λ_i F_i(θ)`.
    pub fn weighted_loss(&self, weights: &WeightVector, theta: &DVector<f64>) -> f64 {
        let nf = self.n as f64;
        (0..self.n)
            .map(|i| weights.get(i) * self.local_loss(i, theta))
            .sum::<f64>()
            / nf
    }

    /// Weighted global gradient `∇F(θ) = (1/n) Σ λ_i ∇F_i(θ)`.
    pub fn weighted_gradient(&self, weights: &WeightVector, theta: &DVector<f64>) -> DVector<f64> {
        let mut acc = DVector::zeros(self.d);
        for i in 0..self.n {
            acc += self.local_gradient(i, theta) * weights.get(i);
        }
        acc / self.n as f64
    }

    /// Minimizer of the weighted global loss:
    /// `θ* = (Σ λ_i ζ_i + n·reg)⁻¹ Σ λ_i ζ_i c_i` (scalar curvatures make the
    /// system diagonal). The regularizer enters once per node, hence the `n`.
    pub fn closed_form_optimum(&self, weights: &WeightVector) -> Result<DVector<f64>> {
        let denom: f64 = (0..self.n)
            .map(|i| weights.get(i) * self.zeta[i])
            .sum::<f64>()
            + self.n as f64 * self.reg;
        if denom <= f64::EPSILON {
            return Err(Error::SingularSystem);
        }
        let mut acc = DVector::zeros(self.d);
        for i in 0..self.n {
            acc += self.center(i) * (weights.get(i) * self.zeta[i]);
        }
        Ok(acc / denom)
    }
}

/// Strategy-matched mean: plain average of the rows for the weighted-loss
/// strategy, λ-weighted average for the weighted-mixing strategy.
pub fn weighted_mean_iterate(
    theta: &DMatrix<f64>,
    weights: &WeightVector,
    strategy: Strategy,
) -> DVector<f64> {
    let n = theta.nrows();
    let d = theta.ncols();
    let nf = n as f64;
    let mut mean = DVector::zeros(d);
    for i in 0..n {
        let w = match strategy {
            Strategy::WeightedLoss => 1.0,
            Strategy::WeightedMixing => weights.get(i),
        };
        for j in 0..d {
            mean[j] += w * theta[(i, j)];
        }
    }
    mean / nf
}

/// One recorded metrics row.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryRow {
    pub t: usize,
    /// `‖(1/n) Σ λ_i ∇F_i(θ_i)‖` with exact gradients at the local iterates.
    pub weighted_grad_norm: f64,
    /// `‖(I − M⋆)Θ‖²_{F,λ}` with the strategy-matched projector.
    pub consensus_param: f64,
    /// `α² ‖(I − M⋆)Y‖²_{F,λ}`.
    pub consensus_tracker: f64,
    /// `‖θ̄⋆ − θ*‖` against the closed-form optimum.
    pub dist_to_opt: f64,
    /// Tracking-identity residual, relative: `‖m(Y) − (1/n)Σλ_i g_i‖ / (1 + ‖Y‖_F)`.
    pub tracking_residual: f64,
    /// `‖∇F(θ̄⋆)‖`, the gradient of the global loss at the strategy mean.
    pub grad_norm_at_mean: f64,
}

/// Whole-run aggregates accumulated at every step (not just recorded ones).
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RunSummary {
    /// `Σ_{t<T} ‖E^{(t)}‖²_{F,λ}` (parameter plus scaled tracker deviation).
    pub sum_consensus_sq: f64,
    /// `Σ_{t<T} ‖∇F(θ̄⋆^{(t)})‖²`.
    pub sum_grad_at_mean_sq: f64,
    pub max_rel_tracking_residual: f64,
    pub max_mean_recursion_residual: f64,
    pub e0_norm2: f64,
    pub f0_gap: f64,
    pub final_dist_to_opt: f64,
    pub final_consensus_param: f64,
    pub final_weighted_grad_norm: f64,
    pub steps: usize,
}

/// Recorded rows plus run-level aggregates.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub summary: RunSummary,
}

impl Trajectory {
    pub const CSV_HEADER: &'static str =
        "t,weighted_grad_norm,consensus_param,consensus_tracker,dist_to_opt,tracking_residual";

    /// CSV with the pinned column set, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.t,
                r.weighted_grad_norm,
                r.consensus_param,
                r.consensus_tracker,
                r.dist_to_opt,
                r.tracking_residual
            ));
        }
        out
    }
}

/// Step size, horizon, seeding, and recording cadence for one run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunParams {
    pub alpha: f64,
    pub t_steps: usize,
    pub s0: u64,
    pub record_every: usize,
    /// All nodes share one initial iterate (the default); disable to give
    /// each node an independent draw.
    pub shared_init: bool,
}

struct StrategyOps<'a> {
    strategy: Strategy,
    weights: &'a WeightVector,
    mixing: &'a DMatrix<f64>,
}

impl StrategyOps<'_> {
    /// Tracker increment scaling: `D_λ` for weighted-loss, identity otherwise.
    fn scale_increment(&self, delta: &mut DMatrix<f64>) {
        if self.strategy == Strategy::WeightedLoss {
            for i in 0..delta.nrows() {
                let w = self.weights.get(i);
                for j in 0..delta.ncols() {
                    delta[(i, j)] *= w;
                }
            }
        }
    }

    fn initial_tracker(&self, g0: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y0 = g0.clone();
        self.scale_increment(&mut y0);
        y0
    }
}

fn weighted_deviation_sq(m: &DMatrix<f64>, mean: &DVector<f64>, weights: &WeightVector) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        let mut row_sq = 0.0;
        for j in 0..m.ncols() {
            let dev = m[(i, j)] - mean[j];
            row_sq += dev * dev;
        }
        acc += weights.get(i) * row_sq;
    }
    acc
}

fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Runs gradient tracking for `t_steps` iterations.
///
/// The weighted-loss strategy consumes `w_ds`; the weighted-mixing strategy
/// consumes `w_row`. Metric rows are recorded every `record_every` steps plus
/// at the final step; the summary fields accumulate over every step.
pub fn run(
    problem: &QuadraticProblem,
    weights: &WeightVector,
    strategy: Strategy,
    w_row: &MixingMatrix,
    w_ds: &MixingMatrix,
    params: &RunParams,
) -> Result<Trajectory> {
    let n = problem.n();
    let d = problem.d();
    if weights.n() != n || w_row.n() != n || w_ds.n() != n {
        return Err(Error::DimensionMismatch {
            left: weights.n(),
            right: n,
        });
    }
    if params.alpha <= 0.0 || params.alpha.is_nan() {
        return Err(Error::BadRange(format!(
            "alpha must be positive, got {}",
            params.alpha
        )));
    }
    let record_every = params.record_every.max(1);
    let ops = StrategyOps {
        strategy,
        weights,
        mixing: match strategy {
            Strategy::WeightedLoss => w_ds.entries(),
            Strategy::WeightedMixing => w_row.entries(),
        },
    };
    let alpha = params.alpha;
    let s0 = params.s0;
    let optimum = problem.closed_form_optimum(weights)?;

    // initial iterates
    let mut init_rng = SeededRng::from_seed(init_seed(s0));
    let mut theta = DMatrix::zeros(n, d);
    if params.shared_init {
        let mut row = vec![0.0; d];
        init_rng.fill_standard_normal(&mut row);
        for i in 0..n {
            for j in 0..d {
                theta[(i, j)] = row[j];
            }
        }
    } else {
        let mut row = vec![0.0; d];
        for i in 0..n {
            init_rng.fill_standard_normal(&mut row);
            for j in 0..d {
                theta[(i, j)] = row[j];
            }
        }
    }

    let gradients_at = |theta: &DMatrix<f64>, t: usize| -> DMatrix<f64> {
        let mut g = DMatrix::zeros(n, d);
        for i in 0..n {
            let row = problem.stochastic_gradient(i, t, &theta.row(i).transpose(), s0);
            for j in 0..d {
                g[(i, j)] = row[j];
            }
        }
        g
    };

    let mut grads = gradients_at(&theta, 0);
    let mut tracker = ops.initial_tracker(&grads);

    let nf = n as f64;
    let lam = weights.values();
    let mut rows: Vec<TrajectoryRow> = Vec::new();
    let mut summary = RunSummary::default();

    let measure = |theta: &DMatrix<f64>,
                   tracker: &DMatrix<f64>,
                   grads: &DMatrix<f64>,
                   t: usize|
     -> TrajectoryRow {
        // exact-gradient metrics
        let mut weighted_avg_grad = DVector::zeros(d);
        for (i, &li) in lam.iter().enumerate() {
            let g = problem.local_gradient(i, &theta.row(i).transpose());
            weighted_avg_grad += g * (li / nf);
        }
        let theta_mean = weighted_mean_iterate(theta, weights, strategy);
        let tracker_mean = weighted_mean_iterate(tracker, weights, strategy);
        let consensus_param = weighted_deviation_sq(theta, &theta_mean, weights);
        let consensus_tracker =
            alpha * alpha * weighted_deviation_sq(tracker, &tracker_mean, weights);

        // tracking identity: strategy mean of Y equals (1/n) Σ λ_i g_i
        let mut weighted_stoch_grad = DVector::zeros(d);
        for i in 0..n {
            for j in 0..d {
                weighted_stoch_grad[j] += lam[i] * grads[(i, j)] / nf;
            }
        }
        let tracking_abs = (&tracker_mean - &weighted_stoch_grad).norm();
        let tracking_residual = tracking_abs / (1.0 + tracker.norm());

        TrajectoryRow {
            t,
            weighted_grad_norm: weighted_avg_grad.norm(),
            consensus_param,
            consensus_tracker,
            dist_to_opt: (&theta_mean - &optimum).norm(),
            tracking_residual,
            grad_norm_at_mean: problem.weighted_gradient(weights, &theta_mean).norm(),
        }
    };

    let row0 = measure(&theta, &tracker, &grads, 0);
    summary.e0_norm2 = row0.consensus_param + row0.consensus_tracker;
    summary.f0_gap = problem
        .weighted_loss(weights, &weighted_mean_iterate(&theta, weights, strategy))
        - problem.weighted_loss(weights, &optimum);
    rows.push(row0);

    let mut prev_mean = weighted_mean_iterate(&theta, weights, strategy);
    for t in 0..params.t_steps {
        let current = if t == 0 {
            rows[0]
        } else {
            measure(&theta, &tracker, &grads, t)
        };
        summary.sum_consensus_sq += current.consensus_param + current.consensus_tracker;
        summary.sum_grad_at_mean_sq += current.grad_norm_at_mean * current.grad_norm_at_mean;
        summary.max_rel_tracking_residual = summary
            .max_rel_tracking_residual
            .max(current.tracking_residual);
        if t > 0 && t % record_every == 0 {
            rows.push(current);
        }

        // descent step through the mixing matrix, then tracker update
        let descended = &theta - &tracker * alpha;
        let next_theta = ops.mixing * descended;
        if !all_finite(&next_theta) {
            return Err(Error::NonFinite { step: t + 1 });
        }
        let next_grads = gradients_at(&next_theta, t + 1);
        let mut delta = &next_grads - &grads;
        ops.scale_increment(&mut delta);
        let next_tracker = ops.mixing * &tracker + delta;
        if !all_finite(&next_tracker) {
            return Err(Error::NonFinite { step: t + 1 });
        }

        // mean-iterate recursion: θ̄⋆ moves by −(α/n) Σ λ_i g_i exactly
        let mut weighted_stoch = DVector::zeros(d);
        for i in 0..n {
            for j in 0..d {
                weighted_stoch[j] += lam[i] * grads[(i, j)] / nf;
            }
        }
        theta = next_theta;
        grads = next_grads;
        tracker = next_tracker;
        let mean = weighted_mean_iterate(&theta, weights, strategy);
        let recursion_residual =
            (&mean - &prev_mean + weighted_stoch * alpha).norm() / (1.0 + mean.norm());
        summary.max_mean_recursion_residual =
            summary.max_mean_recursion_residual.max(recursion_residual);
        prev_mean = mean;
    }

    let final_row = measure(&theta, &tracker, &grads, params.t_steps);
    if rows.last().map(|r| r.t) != Some(final_row.t) {
        rows.push(final_row);
    }
    summary.max_rel_tracking_residual = summary
        .max_rel_tracking_residual
        .max(final_row.tracking_residual);
    summary.final_dist_to_opt = final_row.dist_to_opt;
    summary.final_consensus_param = final_row.consensus_param;
    summary.final_weighted_grad_norm = final_row.weighted_grad_norm;
    summary.steps = params.t_steps;
    Ok(Trajectory { rows, summary })
}

/// Pointwise arithmetic mean of several trajectories recorded on the same
/// grid. Maxima (tracking and recursion residuals) take the worst case.
pub fn average_trajectories(trajectories: &[&Trajectory]) -> Result<Trajectory> {
    let template = trajectories
        .first()
        .ok_or_else(|| Error::BadRange("need at least one trajectory".into()))?;
    let count = trajectories.len() as f64;
    let mut rows = template.rows.clone();
    for row in &mut rows {
        row.weighted_grad_norm = 0.0;
        row.consensus_param = 0.0;
        row.consensus_tracker = 0.0;
        row.dist_to_opt = 0.0;
        row.tracking_residual = 0.0;
        row.grad_norm_at_mean = 0.0;
    }
    let mut summary = RunSummary {
        steps: template.summary.steps,
        ..Default::default()
    };
    for traj in trajectories {
        if traj.rows.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                left: traj.rows.len(),
                right: rows.len(),
            });
        }
        for (acc, row) in rows.iter_mut().zip(&traj.rows) {
            debug_assert_eq!(acc.t, row.t);
            acc.weighted_grad_norm += row.weighted_grad_norm / count;
            acc.consensus_param += row.consensus_param / count;
            acc.consensus_tracker += row.consensus_tracker / count;
            acc.dist_to_opt += row.dist_to_opt / count;
            acc.tracking_residual += row.tracking_residual / count;
            acc.grad_norm_at_mean += row.grad_norm_at_mean / count;
        }
        summary.sum_consensus_sq += traj.summary.sum_consensus_sq / count;
        summary.sum_grad_at_mean_sq += traj.summary.sum_grad_at_mean_sq / count;
        summary.e0_norm2 += traj.summary.e0_norm2 / count;
        summary.f0_gap += traj.summary.f0_gap / count;
        summary.final_dist_to_opt += traj.summary.final_dist_to_opt / count;
        summary.final_consensus_param += traj.summary.final_consensus_param / count;
        summary.final_weighted_grad_norm += traj.summary.final_weighted_grad_norm / count;
        summary.max_rel_tracking_residual = summary
            .max_rel_tracking_residual
            .max(traj.summary.max_rel_tracking_residual);
        summary.max_mean_recursion_residual = summary
            .max_mean_recursion_residual
            .max(traj.summary.max_mean_recursion_residual);
    }
    Ok(Trajectory { rows, summary })
}

/// Runs one trajectory per seed and averages the recorded metrics pointwise.
/// Returns the averaged trajectory plus every per-seed trajectory.
pub fn multi_seed(
    problem: &QuadraticProblem,
    weights: &WeightVector,
    strategy: Strategy,
    w_row: &MixingMatrix,
    w_ds: &MixingMatrix,
    params: &RunParams,
    seeds: &[u64],
) -> Result<(Trajectory, Vec<(u64, Trajectory)>)> {
    if seeds.is_empty() {
        return Err(Error::BadRange("need at least one seed".into()));
    }
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let p = RunParams {
            s0: seed,
            ..*params
        };
        per_seed.push((seed, run(problem, weights, strategy, w_row, w_ds, &p)?));
    }
    let refs: Vec<&Trajectory> = per_seed.iter().map(|(_, t)| t).collect();
    let averaged = average_trajectories(&refs)?;
    Ok((averaged, per_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::{doubly_stochastic, metropolis};
    use crate::topology::{ring, static_exponential};
    use crate::weights::preset_a;

    fn default_problem(sigma: f64, seed: u64) -> QuadraticProblem {
        generate_problem(16, 10, (5.5, 12.5), 3.0, 0.01, sigma, seed).unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let a = default_problem(1.0, 7);
        let b = default_problem(1.0, 7);
        assert_eq!(a.zeta, b.zeta);
        assert_eq!(a.centers, b.centers);
    }

    #[test]
    fn zero_offset_collapses_centers() {
        let p = generate_problem(8, 5, (5.5, 12.5), 0.0, 0.01, 0.0, 3).unwrap();
        let c0 = p.center(0);
        for i in 1..8 {
            assert!((p.center(i) - &c0).norm() < 1e-15);
        }
    }

    #[test]
    fn offsets_have_radius_mu0() {
        // replaying the same seed with mu0 = 0 recovers the shared base center
        let p = default_problem(0.0, 11);
        let base = generate_problem(16, 10, (5.5, 12.5), 0.0, 0.01, 0.0, 11)
            .unwrap()
            .center(0);
        for i in 0..16 {
            let radius = (p.center(i) - &base).norm();
            assert!((radius - p.mu0()).abs() < 1e-12, "radius {radius}");
        }
    }

    #[test]
    fn curvatures_in_range() {
        let p = default_problem(0.0, 5);
        assert!(p.zeta().iter().all(|&z| (5.5..=12.5).contains(&z)));
        assert!(p.beta() <= 12.51);
    }

    #[test]
    fn closed_form_identical_centers() {
        let p = generate_problem(6, 4, (1.0, 2.0), 0.0, 0.0, 0.0, 9).unwrap();
        let opt = p.closed_form_optimum(&WeightVector::uniform(6)).unwrap();
        assert!((opt - p.center(0)).norm() < 1e-12);
    }

    #[test]
    fn closed_form_symmetric_two_node() {
        let mut p = generate_problem(2, 3, (1.0, 1.0), 0.0, 0.0, 0.0, 1).unwrap();
        // force c1 = -c2 = e1
        p.centers = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        p.zeta = vec![1.0, 1.0];
        let opt = p.closed_form_optimum(&WeightVector::uniform(2)).unwrap();
        assert!(opt.norm() < 1e-15);
    }

    #[test]
    fn optimum_zeroes_weighted_gradient() {
        let p = default_problem(0.0, 21);
        let lam = preset_a();
        let opt = p.closed_form_optimum(&lam).unwrap();
        let grad = p.weighted_gradient(&lam, &opt);
        assert!(grad.norm() < 1e-12, "residual {}", grad.norm());
    }

    #[test]
    fn stochastic_gradient_noise_free_cases() {
        let p = generate_problem(4, 6, (2.0, 3.0), 1.0, 0.0, 0.0, 2).unwrap();
        let at_center = p.stochastic_gradient(1, 0, &p.center(1), 99);
        assert!(at_center.norm() < 1e-15);

        let theta = DVector::from_element(6, 0.7);
        let got = p.stochastic_gradient(2, 5, &theta, 99);
        let want = p.local_gradient(2, &theta);
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn stochastic_gradient_is_reproducible() {
        let p = default_problem(1.0, 3);
        let theta = DVector::from_element(10, 0.1);
        let a = p.stochastic_gradient(3, 17, &theta, 1000);
        let b = p.stochastic_gradient(3, 17, &theta, 1000);
        assert_eq!(a, b);
        let c = p.stochastic_gradient(3, 18, &theta, 1000);
        assert!((&a - &c).norm() > 0.0);
    }

    #[test]
    fn noise_variance_matches_upsilon2() {
        let p = generate_problem(4, 10, (5.5, 12.5), 3.0, 0.01, 1.0, 77).unwrap();
        let theta = DVector::from_element(10, 0.3);
        let clean = p.local_gradient(0, &theta);
        let mut acc = 0.0;
        let draws = 100_000;
        for t in 0..draws {
            let g = p.stochastic_gradient(0, t, &theta, 55);
            acc += (g - &clean).norm_squared();
        }
        let measured = acc / draws as f64;
        let expected = p.upsilon2();
        assert!(
            (measured - expected).abs() / expected < 0.03,
            "measured {measured} vs {expected}"
        );
    }

    #[test]
    fn finite_difference_gradient_check() {
        let p = default_problem(0.0, 31);
        let mut rng = SeededRng::from_seed(40);
        let h = 1e-6;
        for _ in 0..100 {
            let i = rng.index(16);
            let theta = DVector::from_fn(10, |_, _| rng.next_f64() * 4.0 - 2.0);
            let grad = p.local_gradient(i, &theta);
            for j in 0..10 {
                let mut plus = theta.clone();
                let mut minus = theta.clone();
                plus[j] += h;
                minus[j] -= h;
                let fd = (p.local_loss(i, &plus) - p.local_loss(i, &minus)) / (2.0 * h);
                assert!((fd - grad[j]).abs() < 1e-5, "fd {fd} vs {}", grad[j]);
            }
        }
    }

    fn setup_run(sigma: f64) -> (QuadraticProblem, WeightVector, MixingMatrix, MixingMatrix) {
        let g = static_exponential(16).unwrap();
        let lam = preset_a();
        let w_row = metropolis(&g, &lam, 0.3).unwrap();
        let w_ds = doubly_stochastic(&g, 0.3).unwrap();
        (default_problem(sigma, 7), lam, w_row, w_ds)
    }

    #[test]
    fn uniform_weights_make_strategies_identical() {
        let g = ring(16).unwrap();
        let lam = WeightVector::uniform(16);
        let w_row = metropolis(&g, &lam, 0.3).unwrap();
        let w_ds = doubly_stochastic(&g, 0.3).unwrap();
        let p = default_problem(1.0, 13);
        let params = RunParams {
            alpha: 0.09,
            t_steps: 120,
            s0: 5,
            record_every: 3,
            shared_init: true,
        };
        let one = run(&p, &lam, Strategy::WeightedLoss, &w_row, &w_ds, &params).unwrap();
        let two = run(&p, &lam, Strategy::WeightedMixing, &w_row, &w_ds, &params).unwrap();
        assert_eq!(one.rows.len(), two.rows.len());
        for (a, b) in one.rows.iter().zip(&two.rows) {
            assert!((a.weighted_grad_norm - b.weighted_grad_norm).abs() <= 1e-12);
            assert!((a.consensus_param - b.consensus_param).abs() <= 1e-12);
            assert!((a.consensus_tracker - b.consensus_tracker).abs() <= 1e-12);
            assert!((a.dist_to_opt - b.dist_to_opt).abs() <= 1e-12);
        }
    }

    #[test]
    fn tracking_identity_and_mean_recursion_hold() {
        let (p, lam, w_row, w_ds) = setup_run(1.0);
        let params = RunParams {
            alpha: 0.12,
            t_steps: 240,
            s0: 3,
            record_every: 3,
            shared_init: true,
        };
        for strategy in [Strategy::WeightedLoss, Strategy::WeightedMixing] {
            let traj = run(&p, &lam, strategy, &w_row, &w_ds, &params).unwrap();
            assert!(
                traj.summary.max_rel_tracking_residual <= 1e-10,
                "tracking residual {}",
                traj.summary.max_rel_tracking_residual
            );
            assert!(
                traj.summary.max_mean_recursion_residual <= 1e-10,
                "recursion residual {}",
                traj.summary.max_mean_recursion_residual
            );
        }
    }

    #[test]
    fn deterministic_run_converges_to_closed_form_optimum() {
        let (p, lam, w_row, w_ds) = setup_run(0.0);
        // generous horizon: the step-size ceiling is conservative enough
        // that 0.5x of it needs several thousand steps to hit 1e-6
        let beta = p.beta();
        let rho = crate::spectral::spectrum(&w_row).unwrap().rho;
        let alpha = 0.5
            * crate::bounds::step_size_max(Strategy::WeightedMixing, beta, rho, lam.lambda_max())
                .unwrap();
        let params = RunParams {
            alpha,
            t_steps: 12_000,
            s0: 41,
            record_every: 1000,
            shared_init: true,
        };
        for strategy in [Strategy::WeightedLoss, Strategy::WeightedMixing] {
            let traj = run(&p, &lam, strategy, &w_row, &w_ds, &params).unwrap();
            assert!(
                traj.summary.final_dist_to_opt <= 1e-6,
                "dist {}",
                traj.summary.final_dist_to_opt
            );
            assert!(
                traj.summary.final_consensus_param <= 1e-10,
                "consensus {}",
                traj.summary.final_consensus_param
            );
        }
    }

    #[test]
    fn diverging_step_size_reports_nonfinite() {
        let (p, lam, w_row, w_ds) = setup_run(0.0);
        let params = RunParams {
            alpha: 10.0,
            t_steps: 500,
            s0: 1,
            record_every: 50,
            shared_init: true,
        };
        let got = run(&p, &lam, Strategy::WeightedMixing, &w_row, &w_ds, &params);
        assert!(matches!(got, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn weighted_mean_iterate_cases() {
        let lam = WeightVector::new(&[0.5, 1.5]).unwrap();
        let consensus = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, 3.0, -1.0]);
        let m1 = weighted_mean_iterate(&consensus, &lam, Strategy::WeightedLoss);
        let m2 = weighted_mean_iterate(&consensus, &lam, Strategy::WeightedMixing);
        assert!((m1 - DVector::from_row_slice(&[3.0, -1.0])).norm() < 1e-15);
        assert!((m2 - DVector::from_row_slice(&[3.0, -1.0])).norm() < 1e-15);

        // one-step hand trace on two nodes, one dimension
        let theta = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let got = weighted_mean_iterate(&theta, &lam, Strategy::WeightedMixing);
        assert!((got[0] - (0.5 * 1.0 + 1.5 * 2.0) / 2.0).abs() < 1e-15);
        let got = weighted_mean_iterate(&theta, &lam, Strategy::WeightedLoss);
        assert!((got[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn multi_seed_averaging() {
        let (p, lam, w_row, w_ds) = setup_run(1.0);
        let params = RunParams {
            alpha: 0.12,
            t_steps: 24,
            s0: 0,
            record_every: 3,
            shared_init: true,
        };
        let (avg_single, per) = multi_seed(
            &p,
            &lam,
            Strategy::WeightedMixing,
            &w_row,
            &w_ds,
            &params,
            &[9],
        )
        .unwrap();
        assert_eq!(per.len(), 1);
        for (a, b) in avg_single.rows.iter().zip(&per[0].1.rows) {
            assert!((a.weighted_grad_norm - b.weighted_grad_norm).abs() < 1e-15);
        }

        let (avg_dup, _) = multi_seed(
            &p,
            &lam,
            Strategy::WeightedMixing,
            &w_row,
            &w_ds,
            &params,
            &[9, 9],
        )
        .unwrap();
        for (a, b) in avg_dup.rows.iter().zip(&avg_single.rows) {
            assert!((a.weighted_grad_norm - b.weighted_grad_norm).abs() < 1e-14);
        }
    }

    #[test]
    fn heterogeneous_init_differs_from_shared() {
        let (p, lam, w_row, w_ds) = setup_run(0.0);
        let shared = RunParams {
            alpha: 0.05,
            t_steps: 5,
            s0: 4,
            record_every: 1,
            shared_init: true,
        };
        let hetero = RunParams {
            shared_init: false,
            ..shared
        };
        let a = run(&p, &lam, Strategy::WeightedMixing, &w_row, &w_ds, &shared).unwrap();
        let b = run(&p, &lam, Strategy::WeightedMixing, &w_row, &w_ds, &hetero).unwrap();
        assert!(a.rows[0].consensus_param < 1e-20);
        assert!(b.rows[0].consensus_param > 1e-6);
    }
}
