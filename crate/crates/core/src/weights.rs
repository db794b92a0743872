//! Positive node-weight vectors normalized to sum `n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Strictly positive node weights `λ` with `Σ λ_i = n`.
///
/// Construction rescales the input by `n / Σ raw`, so any positive vector is
/// accepted; the induced geometry is invariant to that rescaling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    /// Normalizes `raw` so its entries sum to `n`.
    pub fn new(raw: &[f64]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::TooFewNodes {
                n: raw.len(),
                required: 2,
            });
        }
        for (index, &value) in raw.iter().enumerate() {
            if value <= 0.0 || !value.is_finite() {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        let sum: f64 = raw.iter().sum();
        let scale = raw.len() as f64 / sum;
        Ok(Self {
            values: raw.iter().map(|v| v * scale).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MIN, f64::max)
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MAX, f64::min)
    }

    /// `c_λ = n⁻² Σ λ_i²`; lies in `[1/n, 1)` with the lower end at uniform weights.
    pub fn c_lambda(&self) -> f64 {
        let n = self.values.len() as f64;
        self.values.iter().map(|v| v * v).sum::<f64>() / (n * n)
    }

    /// Metric distortion `κ_λ = sqrt(λ_max / λ_min) ≥ 1`.
    pub fn kappa(&self) -> f64 {
        (self.lambda_max() / self.lambda_min()).sqrt()
    }

    pub fn is_uniform(&self) -> bool {
        self.values.iter().all(|&v| (v - 1.0).abs() <= 1e-12)
    }

    /// Serializes as one real per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.values {
            out.push_str(&format!("{v:.17e}\n"));
        }
        out
    }

    /// Parses the one-real-per-line format and normalizes.
    pub fn parse_text(s: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for line in s.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::BadRange(format!("bad weight entry {line:?}")))?;
            raw.push(v);
        }
        Self::new(&raw)
    }
}

/// First benchmark weight vector from the 16-node experiments (sums to 16).
pub const WEIGHTS_A: [f64; 16] = [
    0.3, 0.8, 1.0, 0.9, 0.7, 1.0, 2.0, 2.2, 1.2, 1.4, 0.8, 0.5, 1.5, 0.6, 0.6, 0.5,
];

/// Second benchmark weight vector from the 16-node experiments (sums to 16).
pub const WEIGHTS_B: [f64; 16] = [
    0.4, 2.3, 1.2, 0.5, 1.0, 0.6, 1.5, 0.8, 1.1, 0.7, 1.8, 0.9, 1.4, 0.6, 1.2, 1.0,
];

pub fn preset_a() -> WeightVector {
    WeightVector::new(&WEIGHTS_A).expect("preset is valid")
}

pub fn preset_b() -> WeightVector {
    WeightVector::new(&WEIGHTS_B).expect("preset is valid")
}

/// Degree and weight summary for a graph/weight pairing.
#[derive(Debug, Clone, Serialize)]
pub struct GraphStats {
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
    pub c_lambda: f64,
    pub kappa: f64,
}

pub fn graph_stats(g: &Graph, weights: &WeightVector) -> Result<GraphStats> {
    if g.n() != weights.n() {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: weights.n(),
        });
    }
    let degrees = g.degrees();
    Ok(GraphStats {
        min_degree: degrees.iter().copied().min().unwrap_or(0),
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        mean_degree: degrees.iter().sum::<usize>() as f64 / g.n() as f64,
        c_lambda: weights.c_lambda(),
        kappa: weights.kappa(),
    })
}
