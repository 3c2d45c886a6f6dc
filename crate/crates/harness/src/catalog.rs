//! Named objective instances and their initial distributions.

use gensmooth::problems::{
    log_secant, matrix_pca, monomial_norm, phase_retrieval, quadratic, MatrixPcaSpec,
    MonomialNormSpec, Objective, PhaseRetrievalSpec,
};
use gensmooth::{RngState, Vector};
use serde::Deserialize;

use crate::config::ConfigError;

pub const CATALOG: [&str; 5] = [
    "quadratic",
    "log_secant",
    "phase_retrieval",
    "matrix_pca",
    "monomial_norm",
];

const INSTANCE_STREAM: u64 = 0x1A57;

/// `[objective]` table of a config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub name: String,
    pub dim: Option<usize>,
    /// Quadratic curvatures `a_i` in `½Σ a_i w_i²`.
    pub diag: Option<Vec<f64>>,
    /// PCA spectrum, any order; the matrix is `Q diag(spectrum) Qᵀ` for a random `Q`.
    pub spectrum: Option<Vec<f64>>,
    /// Exponent of `‖Aw‖^p`.
    pub p: Option<u32>,
    /// Seed for random instance data (`w*`, PCA basis).
    #[serde(default)]
    pub instance_seed: u64,
}

impl ObjectiveSpec {
    pub fn named(name: &str) -> Self {
        ObjectiveSpec {
            name: name.to_string(),
            dim: None,
            diag: None,
            spectrum: None,
            p: None,
            instance_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitDist {
    Gaussian { std: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl InitDist {
    pub fn sample(&self, d: usize, rng: &mut RngState) -> Vector {
        match *self {
            InitDist::Gaussian { std } => rng.gaussian_vector(d, std),
            InitDist::Uniform { lo, hi } => Vector::from_fn(d, |_, _| lo + (hi - lo) * rng.uniform()),
        }
    }
}

/// A built objective together with the data the checks need.
#[derive(Debug, Clone)]
pub struct Instance {
    pub objective: Objective,
    pub init: InitDist,
    pub pca: Option<MatrixPcaSpec>,
    pub w_star: Option<Vector>,
}

impl Instance {
    pub fn name(&self) -> &str {
        self.objective.name()
    }

    pub fn sample_init(&self, rng: &mut RngState) -> Vector {
        self.init.sample(self.objective.dim(), rng)
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

pub fn build(spec: &ObjectiveSpec) -> Result<Instance, ConfigError> {
    let mut rng = RngState::new(spec.instance_seed, INSTANCE_STREAM);
    let err = |e: gensmooth::problems::ProblemError| invalid(format!("objective {}: {e}", spec.name));
    let unit = |d: usize| InitDist::Gaussian {
        std: 1.0 / (d as f64).sqrt(),
    };
    match spec.name.as_str() {
        "quadratic" => {
            let diag = match (&spec.diag, spec.dim) {
                (Some(d), _) => d.clone(),
                (None, d) => (1..=d.unwrap_or(4)).map(|i| i as f64).collect(),
            };
            if spec.dim.is_some_and(|d| d != diag.len()) {
                return Err(invalid("quadratic: dim disagrees with diag"));
            }
            Ok(Instance {
                objective: quadratic(diag).map_err(err)?,
                init: InitDist::Gaussian { std: 1.0 },
                pca: None,
                w_star: None,
            })
        }
        "log_secant" => {
            if spec.dim.is_some_and(|d| d != 1) {
                return Err(invalid("log_secant is one-dimensional"));
            }
            Ok(Instance {
                objective: log_secant(),
                init: InitDist::Uniform { lo: 0.0, hi: 0.4 },
                pca: None,
                w_star: None,
            })
        }
        "phase_retrieval" => {
            let d = spec.dim.unwrap_or(10);
            let ps = PhaseRetrievalSpec::random(d, &mut rng).map_err(err)?;
            let w_star = ps.w_star().clone();
            Ok(Instance {
                objective: phase_retrieval(ps),
                init: unit(d),
                pca: None,
                w_star: Some(w_star),
            })
        }
        "matrix_pca" => {
            let spectrum = match (&spec.spectrum, spec.dim) {
                (Some(s), _) => s.clone(),
                (None, d) => default_spectrum(d.unwrap_or(10)),
            };
            if spec.dim.is_some_and(|d| d != spectrum.len()) {
                return Err(invalid("matrix_pca: dim disagrees with spectrum"));
            }
            let d = spectrum.len();
            let ps = MatrixPcaSpec::from_spectrum(&spectrum, &mut rng).map_err(err)?;
            Ok(Instance {
                objective: matrix_pca(ps.clone()),
                init: unit(d),
                w_star: Some(ps.optimum()),
                pca: Some(ps),
            })
        }
        "monomial_norm" => {
            let d = spec.dim.unwrap_or(20);
            let ms = MonomialNormSpec::harmonic(d, spec.p.unwrap_or(4)).map_err(err)?;
            Ok(Instance {
                objective: monomial_norm(ms),
                init: InitDist::Gaussian { std: 1.0 },
                pca: None,
                w_star: Some(Vector::zeros(d)),
            })
        }
        other => Err(invalid(format!(
            "unknown objective {other:?}; expected one of {CATALOG:?}"
        ))),
    }
}

/// `λ₁ = 2`, `λ₂ = 1`, then evenly down to `1/d`.
pub fn default_spectrum(d: usize) -> Vec<f64> {
    match d {
        0 => Vec::new(),
        1 => vec![2.0],
        _ => {
            let mut s = vec![2.0, 1.0];
            let rest = d - 2;
            for k in 1..=rest {
                s.push(1.0 - (1.0 - 1.0 / d as f64) * k as f64 / rest as f64);
            }
            s
        }
    }
}

/// Every catalog objective at its default settings.
pub fn standard_instances(instance_seed: u64) -> Vec<Instance> {
    CATALOG
        .iter()
        .map(|n| {
            let mut spec = ObjectiveSpec::named(n);
            spec.instance_seed = instance_seed;
            build(&spec).expect("default catalog entries are valid")
        })
        .collect()
}
