//! TOML configuration. Every key is listed in the README.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::catalog::ObjectiveSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("config has no [{0}] section")]
    MissingSection(&'static str),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub objective: Option<ObjectiveSpec>,
    pub run: Option<RunSection>,
    pub noise: Option<NoiseSpec>,
    pub sweep: Option<SweepConfig>,
    pub verify: Option<VerifyConfig>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// The `[objective]`, `[run]` and `[noise]` sections, validated.
    pub fn run_config(&self) -> Result<RunConfig, ConfigError> {
        let objective = self
            .objective
            .clone()
            .ok_or(ConfigError::MissingSection("objective"))?;
        let cfg = RunConfig {
            objective,
            run: self.run.clone().unwrap_or_default(),
            noise: self.noise.clone().unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, ConfigError> {
        let cfg = self.sweep.clone().ok_or(ConfigError::MissingSection("sweep"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn verify_config(&self) -> VerifyConfig {
        self.verify.clone().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gd,
    AdaptiveGd,
    Sgd,
    PerturbedGd,
    RestartedSgd,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Gd => "gd",
            Algorithm::AdaptiveGd => "adaptive_gd",
            Algorithm::Sgd => "sgd",
            Algorithm::PerturbedGd => "perturbed_gd",
            Algorithm::RestartedSgd => "restarted_sgd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    Fosp,
    Sosp,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub algorithm: Algorithm,
    pub target: TargetSpec,
    pub eps: f64,
    /// Confidence `δ` of block SGD and Perturbed GD.
    pub delta: f64,
    /// Per-block failure budget `p` of Restarted SGD.
    pub p_conf: f64,
    /// Perturbed GD's universal constant.
    pub c: f64,
    pub scale: f64,
    pub oracle_budget: u64,
    pub seed: u64,
    /// Explicit starting point; otherwise drawn from the objective's default law.
    pub w0: Option<Vec<f64>>,
    /// Standard deviation override for the Gaussian starting law.
    pub init_std: Option<f64>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            algorithm: Algorithm::Gd,
            target: TargetSpec::Fosp,
            eps: 1e-2,
            delta: 0.1,
            p_conf: 0.1,
            c: gensmooth::optimizers::DEFAULT_C,
            scale: 1.0,
            oracle_budget: 1_000_000,
            seed: 0,
            w0: None,
            init_std: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKindSpec {
    Exact,
    Ball,
    Injected,
    Gaussian,
}

/// `[noise]`: `sigma` is the constant ball radius `σ`; `std` the Gaussian
/// standard deviation. Injected noise uses `σ̃ = 2σ`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub kind: NoiseKindSpec,
    pub sigma: f64,
    pub std: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            kind: NoiseKindSpec::Exact,
            sigma: 0.0,
            std: 0.0,
        }
    }
}

impl NoiseSpec {
    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0 && self.std.is_finite() && self.std >= 0.0) {
            return Err(ConfigError::Invalid("noise sigma and std must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub objective: ObjectiveSpec,
    pub run: RunSection,
    pub noise: NoiseSpec,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.run;
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(r.eps > 0.0 && r.eps.is_finite()) {
            return bad("run.eps must be positive");
        }
        for (name, v) in [("run.delta", r.delta), ("run.p_conf", r.p_conf)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ConfigError::Invalid(format!("{name} must lie in (0, 1)")));
            }
        }
        if !(r.c > 0.0 && r.c <= 1.0) {
            return bad("run.c must lie in (0, 1]");
        }
        if !(r.scale > 0.0 && r.scale.is_finite()) {
            return bad("run.scale must be positive");
        }
        if r.oracle_budget == 0 {
            return bad("run.oracle_budget must be positive");
        }
        if r.init_std.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return bad("run.init_std must be positive");
        }
        self.noise.validate()?;
        use Algorithm::*;
        use NoiseKindSpec::*;
        match (r.algorithm, self.noise.kind) {
            (Gd | AdaptiveGd | PerturbedGd, Exact) => {}
            (Gd | AdaptiveGd | PerturbedGd, _) => {
                return Err(ConfigError::Invalid(format!(
                    "{} uses exact gradients; set noise.kind = \"exact\"",
                    r.algorithm.as_str()
                )))
            }
            (Sgd, Exact | Ball | Gaussian) => {}
            (RestartedSgd, Injected) => {}
            (a, k) => {
                return Err(ConfigError::Invalid(format!(
                    "noise kind {k:?} is not supported by {}",
                    a.as_str()
                )))
            }
        }
        if r.algorithm == Sgd && self.noise.kind == Gaussian && self.noise.std > 0.0 {
            // Parameters come from the bounded-noise theory; σ must still be given.
            if self.noise.sigma <= 0.0 {
                return bad("sgd with gaussian noise needs noise.sigma for the parameter schedule");
            }
        }
        Ok(())
    }

    /// Seed override from the command line.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.run.seed = s;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAlgorithm {
    Gd,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepGrid {
    pub log_min_exp: f64,
    pub log_max_exp: f64,
    pub count: usize,
}

impl Default for StepGrid {
    fn default() -> Self {
        StepGrid {
            log_min_exp: -8.0,
            log_max_exp: 1.0,
            count: 30,
        }
    }
}

impl StepGrid {
    /// `10^{a + (b−a)·i/(count−1)}`, endpoints included.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                10f64.powf(self.log_min_exp + (self.log_max_exp - self.log_min_exp) * t)
            })
            .collect()
    }
}

/// `[sweep]`: step-size divergence sweep over the `‖Aw‖^p` family with
/// `A = diag(1/dim, …, 1/2, 1)`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub algorithm: SweepAlgorithm,
    pub p_values: Vec<u32>,
    pub dim: usize,
    pub step_grid: StepGrid,
    /// Covariance multipliers `c_j` of the starting laws `N(0, c_j I)`.
    pub init_scales: Vec<f64>,
    pub inits_per_cell: usize,
    pub iterations: usize,
    pub base_seed: u64,
    pub divergence_ratio_factor: f64,
    /// Standard deviation of the per-step Gaussian gradient noise (SGD only).
    pub noise_std: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            algorithm: SweepAlgorithm::Gd,
            p_values: vec![2, 3, 4, 5, 6],
            dim: 20,
            step_grid: StepGrid::default(),
            init_scales: vec![2.5, 5.0, 7.5, 10.0],
            inits_per_cell: 100,
            iterations: 1000,
            base_seed: 0,
            divergence_ratio_factor: 100.0,
            noise_std: 0.1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.step_grid.count < 2 {
            return bad("sweep.step_grid.count must be at least 2");
        }
        if !(self.step_grid.log_min_exp < self.step_grid.log_max_exp) {
            return bad("sweep.step_grid needs log_min_exp < log_max_exp");
        }
        if self.iterations == 0 || self.inits_per_cell == 0 || self.dim == 0 {
            return bad("sweep.iterations, inits_per_cell and dim must be at least 1");
        }
        if self.p_values.iter().any(|&p| p < 2) {
            return bad("sweep.p_values must be at least 2");
        }
        if self.init_scales.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return bad("sweep.init_scales must be positive");
        }
        if !(self.divergence_ratio_factor > 1.0) {
            return bad("sweep.divergence_ratio_factor must exceed 1");
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad("sweep.noise_std must be finite and >= 0");
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.base_seed = s;
        }
        self
    }
}

/// `[verify]`: which objectives to certify and with how many samples.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub objectives: Vec<String>,
    pub seed: u64,
    pub samples: usize,
    pub fd_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            objectives: crate::catalog::CATALOG.iter().map(|s| s.to_string()).collect(),
            seed: 0,
            samples: 1000,
            fd_points: 100,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_matches_the_published_threshold() {
        let g = StepGrid::default().points();
        assert_eq!(g.len(), 30);
        assert!((g[0] - 1e-8).abs() < 1e-22);
        assert!((g[29] - 10.0).abs() < 1e-12);
        assert!((g[26] - 10f64.powf(-8.0 + 9.0 * 26.0 / 29.0)).abs() < 1e-15);
        assert!((g[26] - 1.172).abs() < 1e-3);
    }

    #[test]
    fn parses_a_full_run_config() {
        let cfg = Config::parse(
            r#"
            [objective]
            name = "phase_retrieval"
            dim = 20
            [run]
            algorithm = "perturbed_gd"
            target = "sosp"
            eps = 0.01
            scale = 35000.0
            [noise]
            kind = "exact"
            "#,
        )
        .unwrap();
        let rc = cfg.run_config().unwrap();
        assert_eq!(rc.run.algorithm, Algorithm::PerturbedGd);
        assert_eq!(rc.run.delta, 0.1);
        assert_eq!(rc.objective.dim, Some(20));
        assert_eq!(rc.with_seed(Some(9)).run.seed, 9);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("[run]\nalgoritm = \"gd\"").is_err());
        let cfg = Config::parse("[objective]\nname = \"quadratic\"\n[run]\neps = -1.0").unwrap();
        assert!(matches!(cfg.run_config(), Err(ConfigError::Invalid(_))));
        let cfg = Config::parse("[objective]\nname = \"quadratic\"\n[noise]\nkind = \"ball\"\nsigma = 0.1").unwrap();
        assert!(cfg.run_config().is_err());
        assert!(matches!(Config::default().run_config(), Err(ConfigError::MissingSection("objective"))));
        let cfg = Config::parse("[sweep]\n[sweep.step_grid]\ncount = 1").unwrap();
        assert!(cfg.sweep_config().is_err());
    }

    #[test]
    fn sweep_defaults() {
        let cfg = Config::parse("[sweep]\nalgorithm = \"sgd\"").unwrap().sweep_config().unwrap();
        assert_eq!(cfg.algorithm, SweepAlgorithm::Sgd);
        assert_eq!(cfg.init_scales, vec![2.5, 5.0, 7.5, 10.0]);
        assert_eq!(cfg.noise_std, 0.1);
        assert_eq!(cfg.with_seed(Some(4)).base_seed, 4);
    }
}
