//! Closed-form convergence-rate and consensus-error bound evaluators.
//!
//! All expressions are plain arithmetic in the inputs; the two strategies
//! differ by where the `κ_λ` and `λ_max²` penalty factors enter and by which
//! spectral radius (`ρ_Λ` vs `ρ_J`) parameterizes the `A`/`B` constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Strategy;

/// Inputs shared by every bound evaluator.
///
/// `rho` is the spectral-gap complement of the mixing matrix the chosen
/// strategy actually uses; `f0_gap` and `e0_norm2` come from the concrete
/// problem instance (the quadratic model yields them exactly).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundInputs {
    pub beta: f64,
    pub upsilon2: f64,
    pub alpha: f64,
    pub t_steps: usize,
    pub n: usize,
    pub rho: f64,
    pub c_lambda: f64,
    pub kappa: f64,
    pub lambda_max: f64,
    pub f0_gap: f64,
    pub e0_norm2: f64,
}

impl BoundInputs {
    fn check(&self) -> Result<()> {
        if self.beta <= 0.0 || self.beta.is_nan() {
            return Err(Error::BadRange(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.upsilon2 < 0.0 || self.upsilon2.is_nan() {
            return Err(Error::BadRange(format!(
                "upsilon2 must be nonnegative, got {}",
                self.upsilon2
            )));
        }
        if self.alpha <= 0.0 || self.alpha.is_nan() {
            return Err(Error::BadRange(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.t_steps == 0 {
            return Err(Error::BadRange("T must be at least 1".into()));
        }
        if self.f0_gap < 0.0 || self.f0_gap.is_nan() {
            return Err(Error::BadRange(format!(
                "f0_gap must be nonnegative, got {}",
                self.f0_gap
            )));
        }
        check_rho(self.rho)?;
        Ok(())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::RhoOutOfRange(rho));
    }
    Ok(())
}

/// `A(ρ) = (1 + ρ²) / (1 − ρ²)³`, strictly increasing on `[0, 1)`.
pub fn a_of(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let q = 1.0 - rho * rho;
    Ok((1.0 + rho * rho) / (q * q * q))
}

/// `B(ρ) = 2 (1 + 3ρ⁴) / ((1 − ρ²)³ (1 − ρ))`, strictly increasing on `[0, 1)`.
pub fn b_of(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let q = 1.0 - rho * rho;
    Ok(2.0 * (1.0 + 3.0 * rho.powi(4)) / (q * q * q * (1.0 - rho)))
}

fn penalty(strategy: Strategy, lambda_max: f64) -> f64 {
    match strategy {
        Strategy::WeightedLoss => lambda_max,
        Strategy::WeightedMixing => 1.0,
    }
}

/// Step-size ceiling for the rate bound:
/// `(1/(λ_max β)) √(1/(62 B(ρ_J)))` for the weighted-loss strategy,
/// `(1/β) √(1/(62 B(ρ_Λ)))` for the weighted-mixing strategy.
pub fn step_size_max(strategy: Strategy, beta: f64, rho: f64, lambda_max: f64) -> Result<f64> {
    let b = b_of(rho)?;
    Ok((1.0 / (penalty(strategy, lambda_max) * beta)) * (1.0 / (62.0 * b)).sqrt())
}

/// Looser step-size ceiling attached to the accumulated consensus bound:
/// `(1/(2 λ_max β)) √(1/(15 B(ρ)))` (penalty factor 1 for weighted mixing).
pub fn consensus_step_size_max(
    strategy: Strategy,
    beta: f64,
    rho: f64,
    lambda_max: f64,
) -> Result<f64> {
    let b = b_of(rho)?;
    Ok((1.0 / (2.0 * penalty(strategy, lambda_max) * beta)) * (1.0 / (15.0 * b)).sqrt())
}

/// The contraction constants `C₁ = 1 − 60 p² α²β² B(ρ)` and
/// `C₂ = 1 − 2 p² α²β² B(ρ) / C₁`, where `p = λ_max` for the weighted-loss
/// strategy and 1 otherwise. Errors when either is nonpositive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContractionConstants {
    pub c1: f64,
    pub c2: f64,
}

pub fn c_constants(strategy: Strategy, inputs: &BoundInputs) -> Result<ContractionConstants> {
    inputs.check()?;
    let b = b_of(inputs.rho)?;
    let p = penalty(strategy, inputs.lambda_max);
    let common = p * p * inputs.alpha * inputs.alpha * inputs.beta * inputs.beta * b;
    let c1 = 1.0 - 60.0 * common;
    if c1 <= 0.0 {
        return Err(Error::StepTooLarge {
            alpha: inputs.alpha,
            constant: "C1",
            value: c1,
        });
    }
    let c2 = 1.0 - 2.0 * common / c1;
    if c2 <= 0.0 {
        return Err(Error::StepTooLarge {
            alpha: inputs.alpha,
            constant: "C2",
            value: c2,
        });
    }
    Ok(ContractionConstants { c1, c2 })
}

/// Time-averaged squared-gradient bound for the chosen strategy.
pub fn rate_bound(strategy: Strategy, inputs: &BoundInputs) -> Result<f64> {
    let ContractionConstants { c1, c2 } = c_constants(strategy, inputs)?;
    let a = a_of(inputs.rho)?;
    let b = b_of(inputs.rho)?;
    let BoundInputs {
        beta,
        upsilon2,
        alpha,
        t_steps,
        n,
        rho,
        c_lambda,
        kappa,
        lambda_max,
        f0_gap,
        e0_norm2,
    } = *inputs;
    let t = t_steps as f64;
    let nf = n as f64;
    let (kappa_factor, lmax_sq) = match strategy {
        Strategy::WeightedLoss => (kappa, lambda_max * lambda_max),
        Strategy::WeightedMixing => (1.0, 1.0),
    };

    let q = 1.0 - rho * rho;
    let optimality = 2.0 * f0_gap / (alpha * c2 * t);
    let noise = alpha * c_lambda * beta * upsilon2 / c2;
    let init = kappa_factor * 6.0 * (3.0 * q * q + rho * rho) * beta * beta * e0_norm2
        / (q * q * q * nf * t * c1 * c2);
    let higher_order = lmax_sq
        * 18.0
        * alpha
        * alpha
        * beta
        * beta
        * upsilon2
        * (a + 1.5 * c_lambda * alpha * alpha * beta * beta * b)
        / (c1 * c2);
    Ok(optimality + noise + init + higher_order)
}

/// The coarse Euclidean-framework bound for the weighted-loss strategy, with
/// its `λ_max³/n` noise term and `λ_max⁴`/`λ_max⁶` higher-order terms. Equals
/// [`rate_bound`] for that strategy at `λ_max = 1` and dominates it otherwise.
pub fn euclidean_rate_bound(inputs: &BoundInputs) -> Result<f64> {
    let ContractionConstants { c1, c2 } = c_constants(Strategy::WeightedLoss, inputs)?;
    let a = a_of(inputs.rho)?;
    let b = b_of(inputs.rho)?;
    let BoundInputs {
        beta,
        upsilon2,
        alpha,
        t_steps,
        n,
        rho,
        c_lambda,
        lambda_max,
        f0_gap,
        e0_norm2,
        ..
    } = *inputs;
    let t = t_steps as f64;
    let nf = n as f64;
    let lmax2 = lambda_max * lambda_max;

    let q = 1.0 - rho * rho;
    let optimality = 2.0 * f0_gap / (alpha * c2 * t);
    let noise = lambda_max.powi(3) * alpha * beta * upsilon2 / (nf * c2);
    let init = lmax2 * 6.0 * (3.0 * q * q + rho * rho) * beta * beta * e0_norm2
        / (q * q * q * nf * t * c1 * c2);
    let higher_order = lmax2
        * lmax2
        * 18.0
        * alpha
        * alpha
        * beta
        * beta
        * upsilon2
        * (a + lmax2 * 1.5 * c_lambda * alpha * alpha * beta * beta * b)
        / (c1 * c2);
    Ok(optimality + noise + init + higher_order)
}

/// Accumulated consensus-error bound, taking the run's accumulated squared gradient norms
/// `Σ_t ‖∇F(θ̄⋆^{(t)})‖²` as input.
pub fn consensus_bound(
    strategy: Strategy,
    inputs: &BoundInputs,
    sum_grad_norms: f64,
) -> Result<f64> {
    inputs.check()?;
    let a = a_of(inputs.rho)?;
    let b = b_of(inputs.rho)?;
    let BoundInputs {
        beta,
        upsilon2,
        alpha,
        t_steps,
        n,
        rho,
        c_lambda,
        kappa,
        lambda_max,
        e0_norm2,
        ..
    } = *inputs;
    let t = t_steps as f64;
    let nf = n as f64;
    let p = penalty(strategy, lambda_max);
    let c1 = 1.0 - 60.0 * p * p * alpha * alpha * beta * beta * b;
    if c1 <= 0.0 {
        return Err(Error::StepTooLarge {
            alpha,
            constant: "C1",
            value: c1,
        });
    }
    let (kappa_factor, lmax_sq) = match strategy {
        Strategy::WeightedLoss => (kappa, lambda_max * lambda_max),
        Strategy::WeightedMixing => (1.0, 1.0),
    };
    let q = 1.0 - rho * rho;
    let init = kappa_factor / c1 * (18.0 * q * q + 6.0 * rho * rho) / (q * q * q) * e0_norm2;
    let grad = lmax_sq / c1 * 2.0 * nf * alpha * alpha * b * sum_grad_norms;
    let noise = lmax_sq / c1
        * 18.0
        * nf
        * alpha
        * alpha
        * upsilon2
        * t
        * (a + 1.5 * c_lambda * alpha * alpha * beta * beta * b);
    Ok(init + grad + noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn inputs(alpha: f64, rho: f64, kappa: f64, lambda_max: f64) -> BoundInputs {
        BoundInputs {
            beta: 1.0,
            upsilon2: 1.0,
            alpha,
            t_steps: 100,
            n: 16,
            rho,
            c_lambda: 1.0 / 16.0,
            kappa,
            lambda_max,
            f0_gap: 1.0,
            e0_norm2: 1.0,
        }
    }

    #[test]
    fn a_and_b_at_zero_and_half() {
        assert!((a_of(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((b_of(0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((a_of(0.5).unwrap() - 2.962962962962963).abs() < 1e-12);
        assert!((b_of(0.5).unwrap() - 11.25925925925926).abs() < 1e-11);
        assert!(a_of(0.999).unwrap().is_finite());
        assert!(b_of(0.999).unwrap().is_finite());
        assert!(a_of(1.0).is_err());
        assert!(b_of(-0.1).is_err());
    }

    #[test]
    fn a_and_b_increase_in_rho() {
        let mut prev_a = 0.0;
        let mut prev_b = 0.0;
        for k in 0..100 {
            let rho = k as f64 / 100.0;
            let a = a_of(rho).unwrap();
            let b = b_of(rho).unwrap();
            assert!(a > prev_a && b > prev_b);
            prev_a = a;
            prev_b = b;
        }
    }

    #[test]
    fn step_size_examples() {
        let s2 = step_size_max(Strategy::WeightedMixing, 1.0, 0.5, 1.0).unwrap();
        assert!((s2 - (1.0 / (62.0 * b_of(0.5).unwrap())).sqrt()).abs() < 1e-15);
        assert!((s2 - 0.037849).abs() < 1e-5);

        let s1 = step_size_max(Strategy::WeightedLoss, 1.0, 0.5, 1.0).unwrap();
        assert!((s1 - s2).abs() < 1e-15);

        let loose = consensus_step_size_max(Strategy::WeightedMixing, 1.0, 0.5, 1.0).unwrap();
        assert!((loose - 0.5 * (1.0 / (15.0 * b_of(0.5).unwrap())).sqrt()).abs() < 1e-15);
        assert!((loose - 0.038474).abs() < 1e-5);
        assert!(loose > s2);
    }

    #[test]
    fn c_constants_examples() {
        let c = c_constants(Strategy::WeightedMixing, &inputs(0.03, 0.5, 1.0, 1.0)).unwrap();
        assert!((c.c1 - 0.392).abs() < 1e-3);
        assert!((c.c2 - 0.9483).abs() < 1e-4);

        // alpha -> 0 pushes both constants to 1
        let c = c_constants(Strategy::WeightedMixing, &inputs(1e-9, 0.5, 1.0, 1.0)).unwrap();
        assert!((c.c1 - 1.0).abs() < 1e-12 && (c.c2 - 1.0).abs() < 1e-12);

        // doubling lambda_max at the same alpha overflows the budget
        let err = c_constants(Strategy::WeightedLoss, &inputs(0.03, 0.5, 1.0, 2.0));
        assert!(matches!(
            err,
            Err(Error::StepTooLarge { constant: "C1", .. })
        ));
    }

    #[test]
    fn noise_free_bounds_share_the_optimality_term() {
        // with zero noise and zero initial deviation, the Euclidean and
        // weighted bounds for the weighted-loss strategy collapse to the same
        // first term even under heterogeneous weights
        let mut inp = inputs(0.001, 0.5, 2.708, 2.2);
        inp.upsilon2 = 0.0;
        inp.e0_norm2 = 0.0;
        let weighted = rate_bound(Strategy::WeightedLoss, &inp).unwrap();
        let euclid = euclidean_rate_bound(&inp).unwrap();
        assert!((weighted - euclid).abs() <= 1e-15 * weighted);
    }

    #[test]
    fn rate_bound_reduces_to_first_term() {
        let mut inp = inputs(0.01, 0.5, 1.0, 1.0);
        inp.upsilon2 = 0.0;
        inp.e0_norm2 = 0.0;
        let c = c_constants(Strategy::WeightedMixing, &inp).unwrap();
        let bound = rate_bound(Strategy::WeightedMixing, &inp).unwrap();
        let expected = 2.0 * inp.f0_gap / (inp.alpha * c.c2 * inp.t_steps as f64);
        assert!((bound - expected).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_collapse_the_strategies() {
        let inp = inputs(0.01, 0.5, 1.0, 1.0);
        let one = rate_bound(Strategy::WeightedLoss, &inp).unwrap();
        let two = rate_bound(Strategy::WeightedMixing, &inp).unwrap();
        assert!((one - two).abs() < 1e-14);
        let euclid = euclidean_rate_bound(&inp).unwrap();
        assert!((euclid - one).abs() < 1e-14);
    }

    #[test]
    fn heterogeneous_penalties_order_the_bounds() {
        // same rho for both strategies; the penalty factors must dominate
        let inp = inputs(0.005, 0.5, 2.708, 2.2);
        let one = rate_bound(Strategy::WeightedLoss, &inp).unwrap();
        let two = rate_bound(Strategy::WeightedMixing, &inp).unwrap();
        assert!(one > two);
        let euclid = euclidean_rate_bound(&inp).unwrap();
        assert!(euclid >= one);
    }

    #[test]
    fn consensus_bound_zero_cases() {
        let mut inp = inputs(0.005, 0.5, 1.0, 1.0);
        inp.upsilon2 = 0.0;
        inp.e0_norm2 = 0.0;
        let b = consensus_bound(Strategy::WeightedMixing, &inp, 0.0).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn monotonicity_in_noise_and_spectral_radius() {
        let mut rng = SeededRng::from_seed(10);
        for _ in 0..200 {
            let rho_lo = rng.next_f64() * 0.5;
            let rho_hi = rho_lo + rng.next_f64() * (0.95 - rho_lo);
            let kappa = 1.0 + rng.next_f64() * 3.0;
            let lmax = 1.0 + rng.next_f64() * 2.0;
            // stay below the tighter (weighted-loss, high-rho) ceiling so the
            // contraction constants exist everywhere in the sweep
            let cap = step_size_max(Strategy::WeightedLoss, 1.0, rho_hi, lmax).unwrap();
            let alpha = cap * (0.05 + 0.9 * rng.next_f64());

            let lo = inputs(alpha, rho_lo, kappa, lmax);
            let hi = inputs(alpha, rho_hi, kappa, lmax);
            for strategy in [Strategy::WeightedLoss, Strategy::WeightedMixing] {
                let b_lo = rate_bound(strategy, &lo).unwrap();
                let b_hi = rate_bound(strategy, &hi).unwrap();
                assert!(b_hi >= b_lo, "rho monotonicity failed");
                assert!(b_lo.is_finite() && b_lo > 0.0);

                let mut noisier = lo.clone();
                noisier.upsilon2 = 2.0;
                assert!(rate_bound(strategy, &noisier).unwrap() >= b_lo);

                let mut larger_e0 = lo.clone();
                larger_e0.e0_norm2 = 2.0;
                assert!(rate_bound(strategy, &larger_e0).unwrap() >= b_lo);
            }

            let mut bigger_kappa = lo.clone();
            bigger_kappa.kappa += 1.0;
            assert!(
                rate_bound(Strategy::WeightedLoss, &bigger_kappa).unwrap()
                    >= rate_bound(Strategy::WeightedLoss, &lo).unwrap()
            );
        }
    }

    #[test]
    fn step_size_advantage_under_gap_premise() {
        // premise 1 − ρ_Λ ≥ λ_max^{-1/2} (1 − ρ_J) implies the weighted-mixing
        // ceiling is at least the weighted-loss one. Exactly at the premise
        // boundary with both matrices poorly connected the implication has
        // thin counterexample slivers (the factor (1+3ρ⁴)/(1+ρ)³ is not
        // monotone past ρ ≈ 0.602), so the unconditional check carries an 11%
        // margin, which makes it provable for every (ρ_Λ, ρ_J, λ_max).
        let mut rng = SeededRng::from_seed(11);
        let mut checked = 0;
        while checked < 200 {
            let rho_j = rng.next_f64() * 0.98;
            let lmax = 1.0 + rng.next_f64() * 3.0;
            let gap_lambda_min = 1.11 * (1.0 - rho_j) / lmax.sqrt();
            if gap_lambda_min >= 1.0 {
                continue;
            }
            let gap = gap_lambda_min + rng.next_f64() * (1.0 - gap_lambda_min);
            let rho_lambda = 1.0 - gap;
            let two = step_size_max(Strategy::WeightedMixing, 1.3, rho_lambda, lmax).unwrap();
            let one = step_size_max(Strategy::WeightedLoss, 1.3, rho_j, lmax).unwrap();
            assert!(
                two >= one - 1e-12,
                "margined premise held but ceilings inverted: {two} < {one}"
            );
            checked += 1;
        }

        // with both spectral radii below the monotone knee the bare premise
        // suffices
        let mut checked = 0;
        while checked < 200 {
            let rho_j = rng.next_f64() * 0.55;
            let lmax = 1.0 + rng.next_f64() * 3.0;
            let gap_lambda_min = (1.0 - rho_j) / lmax.sqrt();
            let rho_lambda_max = (1.0 - gap_lambda_min).min(0.55);
            if rho_lambda_max <= 0.0 {
                continue;
            }
            let rho_lambda = rng.next_f64() * rho_lambda_max;
            let two = step_size_max(Strategy::WeightedMixing, 1.3, rho_lambda, lmax).unwrap();
            let one = step_size_max(Strategy::WeightedLoss, 1.3, rho_j, lmax).unwrap();
            assert!(two >= one - 1e-12);
            checked += 1;
        }
    }
}
