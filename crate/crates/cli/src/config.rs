//! Run configuration: a TOML key-value tree with benchmark presets baked in.
//!
//! Every command validates the sections it needs up front and refuses to
//! start computing on a bad value (exit code 2).

use serde::{Deserialize, Serialize};
use std::path::Path;

use wgt_core::topology::{Family, TopologySpec};
use wgt_core::weights::{preset_a, preset_b, WeightVector};

pub const DEFAULT_EPSILON: f64 = 0.3;
pub const DEFAULT_DBAR: f64 = 6.0;
pub const DEFAULT_TRIALS: usize = 50;
pub const RING_ALPHA: f64 = 0.09;
pub const DEFAULT_ALPHA: f64 = 0.12;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub topology: Option<TopologySection>,
    #[serde(default)]
    pub weights: Option<WeightsSection>,
    #[serde(default)]
    pub mixing: Option<MixingSection>,
    #[serde(default)]
    pub problem: Option<ProblemSection>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub gaps: Option<GapsSection>,
    #[serde(default)]
    pub build_graph: Option<BuildGraphSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub family: String,
    #[serde(default = "default_n")]
    pub n: usize,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub periodic: Option<bool>,
    pub p: Option<f64>,
    pub radius: Option<f64>,
    pub dbar: Option<f64>,
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    16
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    /// One of `lambda-a`, `lambda-b`, `uniform`.
    pub preset: Option<String>,
    /// Literal weight list (normalized on load).
    pub values: Option<Vec<f64>>,
    /// Path to a one-real-per-line weight file.
    pub file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingSection {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_zeta_min")]
    pub zeta_min: f64,
    #[serde(default = "default_zeta_max")]
    pub zeta_max: f64,
    #[serde(default = "default_mu0")]
    pub mu0: f64,
    #[serde(default = "default_reg")]
    pub reg: f64,
    #[serde(default = "default_problem_seed")]
    pub seed: u64,
}

fn default_d() -> usize {
    10
}
fn default_zeta_min() -> f64 {
    5.5
}
fn default_zeta_max() -> f64 {
    12.5
}
fn default_mu0() -> f64 {
    3.0
}
fn default_reg() -> f64 {
    0.01
}
fn default_problem_seed() -> u64 {
    7
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            d: default_d(),
            zeta_min: default_zeta_min(),
            zeta_max: default_zeta_max(),
            mu0: default_mu0(),
            reg: default_reg(),
            seed: default_problem_seed(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// `I`, `II`, or `both`.
    #[serde(default = "default_strategy")]
    pub strategy: String,
    /// Step size; defaults to 0.09 on rings and 0.12 elsewhere.
    pub alpha: Option<f64>,
    #[serde(default = "default_t_steps")]
    pub t_steps: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_shared_init")]
    pub shared_init: bool,
}

fn default_strategy() -> String {
    "both".into()
}
fn default_t_steps() -> usize {
    240
}
fn default_sigma() -> f64 {
    1.0
}
fn default_record_every() -> usize {
    3
}
fn default_seeds() -> Vec<u64> {
    (1..=10).collect()
}
fn default_shared_init() -> bool {
    true
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            strategy: default_strategy(),
            alpha: None,
            t_steps: default_t_steps(),
            sigma: default_sigma(),
            record_every: default_record_every(),
            seeds: default_seeds(),
            shared_init: default_shared_init(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapsSection {
    /// Topology tokens: `ring`, `grid`, `grid-periodic`, `exp`, `custom-a`,
    /// `custom-b`, each expanded on the preset 16-node setup.
    #[serde(default = "default_gap_topologies")]
    pub topologies: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

fn default_gap_topologies() -> Vec<String> {
    ["ring", "grid", "exp", "custom-a", "custom-b"]
        .into_iter()
        .map(String::from)
        .collect()
}

impl Default for GapsSection {
    fn default() -> Self {
        Self {
            topologies: default_gap_topologies(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildGraphSection {
    #[serde(default = "default_dbar")]
    pub dbar: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_dbar() -> f64 {
    DEFAULT_DBAR
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}

impl Default for BuildGraphSection {
    fn default() -> Self {
        Self {
            dbar: default_dbar(),
            trials: default_trials(),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| ConfigError(format!("{e}")))
            }
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.mixing.as_ref().map_or(DEFAULT_EPSILON, |m| m.epsilon)
    }

    /// Resolves the weight source; defaults to the first benchmark preset.
    pub fn resolve_weights(&self, n: usize) -> Result<WeightVector, ConfigError> {
        let section = match &self.weights {
            None => return preset_weights("lambda-a", n),
            Some(s) => s,
        };
        let picks = [
            section.preset.is_some(),
            section.values.is_some(),
            section.file.is_some(),
        ];
        if picks.iter().filter(|&&x| x).count() > 1 {
            return Err(ConfigError(
                "weights: give exactly one of preset, values, file".into(),
            ));
        }
        if let Some(name) = &section.preset {
            return preset_weights(name, n);
        }
        if let Some(values) = &section.values {
            return WeightVector::new(values).map_err(|e| ConfigError(e.to_string()));
        }
        if let Some(file) = &section.file {
            let text = std::fs::read_to_string(file)
                .map_err(|e| ConfigError(format!("cannot read {file}: {e}")))?;
            return WeightVector::parse_text(&text).map_err(|e| ConfigError(e.to_string()));
        }
        preset_weights("lambda-a", n)
    }

    /// Resolves the topology section into a buildable spec.
    pub fn resolve_topology(
        &self,
        seed_override: Option<u64>,
    ) -> Result<TopologySpec, ConfigError> {
        let section = self.topology.clone().unwrap_or(TopologySection {
            family: "ring".into(),
            n: 16,
            rows: None,
            cols: None,
            periodic: None,
            p: None,
            radius: None,
            dbar: None,
            trials: None,
            seed: 0,
        });
        let n = section.n;
        if n < 2 {
            return Err(ConfigError(format!(
                "topology.n must be at least 2, got {n}"
            )));
        }
        let family = match section.family.as_str() {
            "ring" => Family::Ring,
            "grid" => {
                let side = (n as f64).sqrt().round() as usize;
                let rows = section.rows.unwrap_or(side);
                let cols = section.cols.unwrap_or(side);
                if rows * cols != n {
                    return Err(ConfigError(format!(
                        "grid {rows}x{cols} does not cover n = {n}"
                    )));
                }
                Family::Grid {
                    rows,
                    cols,
                    periodic: section.periodic.unwrap_or(false),
                }
            }
            "exp" | "static-exponential" => Family::StaticExponential,
            "erdos-renyi" => {
                let p = section
                    .p
                    .ok_or_else(|| ConfigError("erdos-renyi needs p".into()))?;
                if !(p > 0.0 && p < 1.0) {
                    return Err(ConfigError(format!("p must lie in (0,1), got {p}")));
                }
                Family::ErdosRenyi { p }
            }
            "random-geometric" => {
                let radius = section.radius.unwrap_or(0.3);
                if !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
                    return Err(ConfigError(format!(
                        "radius must lie in (0, sqrt(2)], got {radius}"
                    )));
                }
                Family::RandomGeometric { radius }
            }
            "from-weights" => {
                let dbar = section.dbar.unwrap_or(DEFAULT_DBAR);
                if !(dbar >= 1.0 && dbar <= (n - 1) as f64) {
                    return Err(ConfigError(format!(
                        "dbar must lie in [1, {}], got {dbar}",
                        n - 1
                    )));
                }
                Family::FromWeights {
                    dbar,
                    trials: section.trials.unwrap_or(DEFAULT_TRIALS),
                }
            }
            other => {
                return Err(ConfigError(format!(
                    "unknown topology family {other:?} (expected ring, grid, exp, \
                     erdos-renyi, random-geometric, from-weights)"
                )))
            }
        };
        Ok(TopologySpec {
            n,
            family,
            seed: seed_override.unwrap_or(section.seed),
        })
    }

    pub fn problem(&self) -> ProblemSection {
        self.problem.clone().unwrap_or_default()
    }

    pub fn simulate(&self) -> SimulateSection {
        self.simulate.clone().unwrap_or_default()
    }

    /// Step size: explicit value, else the per-topology default.
    pub fn resolve_alpha(&self, spec: &TopologySpec) -> Result<f64, ConfigError> {
        let sim = self.simulate();
        if let Some(alpha) = sim.alpha {
            if alpha <= 0.0 || alpha.is_nan() {
                return Err(ConfigError(format!("alpha must be positive, got {alpha}")));
            }
            return Ok(alpha);
        }
        Ok(match spec.family {
            Family::Ring => RING_ALPHA,
            _ => DEFAULT_ALPHA,
        })
    }

    pub fn validate_simulate(&self) -> Result<(), ConfigError> {
        let sim = self.simulate();
        if sim.t_steps == 0 {
            return Err(ConfigError("t_steps must be at least 1".into()));
        }
        if sim.seeds.is_empty() {
            return Err(ConfigError("seeds must be nonempty".into()));
        }
        if sim.sigma < 0.0 {
            return Err(ConfigError(format!(
                "sigma must be nonnegative, got {}",
                sim.sigma
            )));
        }
        if !["I", "II", "both"].contains(&sim.strategy.as_str()) {
            return Err(ConfigError(format!(
                "strategy must be I, II, or both, got {:?}",
                sim.strategy
            )));
        }
        let p = self.problem();
        if !(p.zeta_min > 0.0 && p.zeta_max >= p.zeta_min) {
            return Err(ConfigError(format!(
                "bad curvature range [{}, {}]",
                p.zeta_min, p.zeta_max
            )));
        }
        if p.d == 0 {
            return Err(ConfigError("problem.d must be at least 1".into()));
        }
        let eps = self.epsilon();
        if !(eps > 0.0 && eps < 1.0) {
            return Err(ConfigError(format!("epsilon must lie in (0,1), got {eps}")));
        }
        Ok(())
    }
}

pub fn preset_weights(name: &str, n: usize) -> Result<WeightVector, ConfigError> {
    match name {
        "lambda-a" | "lambda_a" => {
            if n != 16 {
                return Err(ConfigError(format!(
                    "preset lambda-a is 16-node, got n = {n}"
                )));
            }
            Ok(preset_a())
        }
        "lambda-b" | "lambda_b" => {
            if n != 16 {
                return Err(ConfigError(format!(
                    "preset lambda-b is 16-node, got n = {n}"
                )));
            }
            Ok(preset_b())
        }
        "uniform" => Ok(WeightVector::uniform(n)),
        other => Err(ConfigError(format!(
            "unknown weight preset {other:?} (expected lambda-a, lambda-b, uniform)"
        ))),
    }
}
