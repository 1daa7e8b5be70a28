use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::centrality::DEFAULT_TAU;
use crate::inclexis::CostMode;
use crate::metrics::{DEFAULT_MIN_STASIS, DEFAULT_STABILITY_WINDOW};
use crate::model::Alphabet;
use crate::targetgen::{GenModelConfig, Model, SeedWeighting, DEFAULT_MAX_STALL};

/// Parameters of one experiment. Field names follow the usual notation:
/// `s` initial targets, `n` sources, `k` target length, `b` batch size and
/// `T_s` steady-state target count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub s: usize,
    pub n: usize,
    pub k: usize,
    pub b: usize,
    #[serde(rename = "T_s")]
    pub t_s: usize,
    pub iterations: usize,
    pub runs: usize,
    pub model: Model,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Clean-slate comparison cadence in iterations; 0 disables it.
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub weighting: SeedWeighting,
    #[serde(default)]
    pub cost_mode: CostMode,
    #[serde(default = "default_max_stall")]
    pub max_stall: usize,
    #[serde(default = "default_window")]
    pub stability_window: usize,
    #[serde(default = "default_mu")]
    pub stasis_mu: f64,
    #[serde(default = "default_min_stasis")]
    pub stasis_min_len: usize,
    /// For MRS, also draw an unselected MR batch from the same sub-seed and
    /// report the ratio of mean accepted costs.
    #[serde(default = "default_true")]
    pub paired_cost_ratio: bool,
    /// Iterations at which a DOT snapshot is written.
    #[serde(default)]
    pub dot_at: Vec<usize>,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}
fn default_eval_every() -> usize {
    100
}
fn default_max_stall() -> usize {
    DEFAULT_MAX_STALL
}
fn default_window() -> usize {
    DEFAULT_STABILITY_WINDOW
}
fn default_mu() -> f64 {
    0.1
}
fn default_min_stasis() -> usize {
    DEFAULT_MIN_STASIS
}
fn default_true() -> bool {
    true
}

impl RunConfig {
    /// Small profile that finishes in minutes: 5 initial targets of length
    /// 50 over 20 symbols, batches of 5, 30 live targets, 500 iterations,
    /// 3 replicates.
    pub fn desk(model: Model, beta: f64) -> Self {
        Self {
            s: 5,
            n: 20,
            k: 50,
            b: 5,
            t_s: 30,
            iterations: 500,
            runs: 3,
            model,
            beta,
            tau: DEFAULT_TAU,
            eval_every: 100,
            rng_seed: 0,
            weighting: SeedWeighting::Average,
            cost_mode: CostMode::ParseOnly,
            max_stall: DEFAULT_MAX_STALL,
            stability_window: DEFAULT_STABILITY_WINDOW,
            stasis_mu: 0.1,
            stasis_min_len: DEFAULT_MIN_STASIS,
            paired_cost_ratio: true,
            dot_at: Vec::new(),
        }
    }

    /// The large profile: 10 initial targets of length 200 over 100 symbols,
    /// batches of 10, 100 live targets, 5000 iterations, 10 replicates.
    pub fn full(model: Model, beta: f64) -> Self {
        Self { s: 10, n: 100, k: 200, b: 10, t_s: 100, iterations: 5000, runs: 10, ..Self::desk(model, beta) }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, EngineError> {
        let cfg: Self = toml::from_str(text).map_err(|e| EngineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |msg: String| Err(EngineError::Config(msg));
        Alphabet::new(self.n).map_err(|e| EngineError::Config(e.to_string()))?;
        if self.k < 2 {
            return fail(format!("k must be at least 2, got {}", self.k));
        }
        if self.b < 1 || self.b > self.t_s {
            return fail(format!("b must satisfy 1 <= b <= T_s, got b={} T_s={}", self.b, self.t_s));
        }
        if self.s > self.t_s {
            return fail(format!("s must not exceed T_s, got s={} T_s={}", self.s, self.t_s));
        }
        if self.s < self.model.min_targets().max(1) {
            return fail(format!("{} needs s >= {}, got {}", self.model, self.model.min_targets().max(1), self.s));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return fail(format!("tau must lie in [0, 1], got {}", self.tau));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return fail(format!("beta must be a non-negative number, got {}", self.beta));
        }
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.n).expect("validated")
    }

    pub fn gen_config(&self) -> GenModelConfig {
        GenModelConfig {
            model: self.model,
            beta: self.beta,
            k: self.k,
            max_stall: self.max_stall,
            weighting: self.weighting,
            cost_mode: self.cost_mode,
        }
    }

    /// Seed of replicate `run`.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.rng_seed.wrapping_add((run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}
