//! Single driver runs and parameter listings.

use gensmooth::calculus::SelfBoundingProfile;
use gensmooth::framework::{run_driver, DecreaseProcedure, RunRecord, StationaryTarget};
use gensmooth::optimizers::{
    adaptive_gd_procedure, build_adaptive_gd, build_gd, build_perturbed_gd, build_restarted_sgd,
    build_sgd, gd_procedure, perturbed_gd_procedure, restarted_sgd_procedure, sgd_procedure,
};
use gensmooth::oracles::GradientOracle;
use gensmooth::problems::Objective;
use gensmooth::{RngState, Vector};
use thiserror::Error;

use crate::catalog::{self, InitDist, Instance};
use crate::config::{Algorithm, ConfigError, NoiseKindSpec, RunConfig, TargetSpec};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("parameter construction failed: {0}")]
    Params(String),
    #[error("driver failed: {0}")]
    Driver(#[from] gensmooth::framework::FrameworkError),
}

impl RunError {
    /// Exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Params(_) => 2,
            RunError::Driver(_) => 1,
        }
    }
}

/// Ordered `key=value` listing.
pub type Listing = Vec<(String, String)>;

pub fn format_listing(l: &Listing) -> String {
    l.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn real(x: f64) -> String {
    format!("{x:.9e}")
}

/// Everything needed to start a run.
pub struct Prepared {
    pub instance: Instance,
    pub w0: Vector,
    pub procedure: Box<dyn DecreaseProcedure>,
    pub target: StationaryTarget,
    pub listing: Listing,
}

const INIT_STREAM: u64 = 0x1417;
const RUN_STREAM: u64 = 0x5EED;

fn starting_point(cfg: &RunConfig, inst: &Instance) -> Result<Vector, ConfigError> {
    let d = inst.objective.dim();
    let w0 = match &cfg.run.w0 {
        Some(v) => {
            if v.len() != d {
                return Err(ConfigError::Invalid(format!(
                    "run.w0 has length {}, objective dimension is {d}",
                    v.len()
                )));
            }
            Vector::from_column_slice(v)
        }
        None => {
            let law = match (cfg.run.init_std, inst.init) {
                (Some(std), _) => InitDist::Gaussian { std },
                (None, law) => law,
            };
            law.sample(d, &mut RngState::new(cfg.run.seed, INIT_STREAM))
        }
    };
    if !inst.objective.contains(&w0) || !inst.objective.value(&w0).is_finite() {
        return Err(ConfigError::Invalid("starting point is outside the domain".into()));
    }
    Ok(w0)
}

fn noisy(obj: &Objective, sigma: f64) -> Result<(Objective, SelfBoundingProfile), RunError> {
    let prof = obj
        .profile()
        .with_additive_noise(move |_| sigma)
        .map_err(|e| RunError::Params(e.to_string()))?;
    Ok((obj.clone().with_profile(prof.clone()), prof))
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, RunError> {
    cfg.validate()?;
    let instance = catalog::build(&cfg.objective)?;
    let obj = instance.objective.clone();
    let w0 = starting_point(cfg, &instance)?;
    let f0 = obj.value(&w0);
    let r = &cfg.run;
    let pe = |e: &dyn std::fmt::Display| RunError::Params(e.to_string());
    let consts = obj.profile().effective_constants(f0).map_err(|e| pe(&e))?;

    let mut listing: Listing = vec![
        ("objective".into(), obj.name().into()),
        ("dim".into(), obj.dim().to_string()),
        ("algorithm".into(), r.algorithm.as_str().into()),
        ("seed".into(), r.seed.to_string()),
        ("eps".into(), real(r.eps)),
        ("scale".into(), real(r.scale)),
        ("F0".into(), real(f0)),
        ("L1".into(), real(consts.l1)),
        ("L1_prime".into(), real(consts.l1_prime)),
        ("L2".into(), consts.l2.map(real).unwrap_or_else(|| "none".into())),
        ("rho0_F0".into(), real(consts.rho0_at_f0)),
        ("rho0_F0p1".into(), real(consts.rho0_at_f0_plus1)),
    ];
    let mut put = |k: &str, v: String| listing.push((k.to_string(), v));

    let procedure: Box<dyn DecreaseProcedure> = match r.algorithm {
        Algorithm::Gd => {
            let p = build_gd(&consts, r.scale).map_err(|e| pe(&e))?;
            put("eta", real(p.eta));
            Box::new(gd_procedure(obj.clone(), p, r.eps))
        }
        Algorithm::AdaptiveGd => {
            let p = build_adaptive_gd(&consts, r.scale).map_err(|e| pe(&e))?;
            put("eta_max", real(p.step_size(0.0)));
            put("step_length_cap", real(r.scale / p.rho0_f0p1));
            Box::new(adaptive_gd_procedure(obj.clone(), p, r.eps))
        }
        Algorithm::Sgd => {
            let (nobj, prof) = noisy(&obj, cfg.noise.sigma)?;
            let c = prof.effective_constants(f0).map_err(|e| pe(&e))?;
            let p = build_sgd(&prof, &c, r.eps, r.delta, r.scale).map_err(|e| pe(&e))?;
            for (k, v) in [
                ("delta", p.delta_conf),
                ("eta", p.eta),
                ("eta_theory", p.eta_theory),
                ("eta_tilde", p.eta_tilde),
                ("p_block", p.p_block),
                ("B", p.b),
                ("C", p.c),
                ("L_tilde_prime", p.l_tilde_prime),
                ("L_tilde", p.l_tilde),
                ("block_decrease", p.delta()),
            ] {
                put(k, real(v));
            }
            put("K0", p.k0.to_string());
            put("K0_theory", p.k0_theory.to_string());
            let sigma = cfg.noise.sigma;
            let oracle = match cfg.noise.kind {
                NoiseKindSpec::Gaussian => GradientOracle::gaussian(nobj, cfg.noise.std),
                NoiseKindSpec::Ball => GradientOracle::ball_noise(nobj, move |_| sigma),
                _ => GradientOracle::exact(nobj),
            };
            put("noise", oracle.kind().name().into());
            Box::new(sgd_procedure(oracle, p))
        }
        Algorithm::PerturbedGd => {
            let p = build_perturbed_gd(&consts, obj.dim(), r.eps, r.delta, r.c, r.scale)
                .map_err(|e| pe(&e))?;
            for (k, v) in [
                ("delta", p.delta_conf),
                ("c", p.c),
                ("eps_tilde", p.eps_tilde),
                ("chi", p.chi),
                ("eta", p.eta),
                ("r", p.r),
                ("g_thres", p.g_thres),
                ("f_thres", p.f_thres),
            ] {
                put(k, real(v));
            }
            put("t_thres", p.t_thres.to_string());
            Box::new(perturbed_gd_procedure(obj.clone(), p))
        }
        Algorithm::RestartedSgd => {
            let (nobj, prof) = noisy(&obj, cfg.noise.sigma)?;
            let nc = prof.restarted_noise_constants(f0).map_err(|e| pe(&e))?;
            let p = build_restarted_sgd(&nc, obj.dim(), r.eps, r.p_conf, r.scale).map_err(|e| pe(&e))?;
            for (k, v) in [
                ("p_conf", p.p_conf),
                ("eps_used", p.eps_used),
                ("sigma_prime", nc.sigma_prime),
                ("sigma_tilde", p.sigma_tilde),
                ("sigma1", p.sigma1),
                ("L1_rsgd", p.l1),
                ("L2_rsgd", p.l2),
                ("C_tilde1", p.c_tilde1),
                ("delta_rsgd", p.delta),
                ("delta2", p.delta2),
                ("B", p.b),
                ("eta_tilde", p.eta_tilde),
                ("eta_theory", p.eta_theory),
                ("eta", p.eta),
                ("eta_bound", p.eta_bound()),
                ("K0_theory", p.k0_theory),
                ("K_o", p.k_o),
                ("block_decrease", p.block_decrease()),
                ("average_gradient_bound", p.average_gradient_bound()),
            ] {
                put(k, real(v));
            }
            put("N", p.n_rounds.to_string());
            put("K0", p.k0.to_string());
            let sigma = cfg.noise.sigma;
            let oracle = GradientOracle::injected(nobj, move |_| sigma, p.sigma_tilde);
            Box::new(restarted_sgd_procedure(oracle, p).map_err(|e| pe(&e))?)
        }
    };
    listing.push(("oracle_budget".into(), r.oracle_budget.to_string()));

    let target = match r.target {
        TargetSpec::Fosp => StationaryTarget::fosp(&obj, r.eps),
        TargetSpec::Sosp => StationaryTarget::sosp(&obj, r.eps)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?,
    };
    listing.push((
        "target".into(),
        match r.target {
            TargetSpec::Fosp => "fosp".into(),
            TargetSpec::Sosp => "sosp".into(),
        },
    ));
    Ok(Prepared {
        instance,
        w0,
        procedure,
        target,
        listing,
    })
}

pub fn params(cfg: &RunConfig) -> Result<Listing, RunError> {
    Ok(prepare(cfg)?.listing)
}

pub struct RunOutcome {
    pub record: RunRecord,
    pub instance: Instance,
    pub listing: Listing,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let Prepared {
        instance,
        w0,
        mut procedure,
        target,
        listing,
    } = prepare(cfg)?;
    let mut rng = RngState::new(cfg.run.seed, RUN_STREAM);
    let record = run_driver(procedure.as_mut(), &w0, &target, cfg.run.oracle_budget, &mut rng)?;
    Ok(RunOutcome {
        record,
        instance,
        listing,
    })
}

/// Summary lines printed after a run.
pub fn summary(out: &RunOutcome) -> Listing {
    let r = &out.record;
    let mut l: Listing = vec![
        ("terminated".into(), r.terminated.as_str().into()),
        ("outer_steps".into(), r.steps.len().to_string()),
        ("oracle_calls".into(), r.total_oracle_calls.to_string()),
        ("value_evals".into(), r.total_value_evals.to_string()),
        ("decrease_violations".into(), r.decrease_violations.to_string()),
        ("candidates".into(), r.candidates.len().to_string()),
    ];
    if let Some(h) = r.hit() {
        l.push(("hit_step".into(), h.step.to_string()));
        l.push(("hit_F".into(), real(h.value)));
        if let Some(g) = h.certificate.grad_norm {
            l.push(("hit_grad_norm".into(), real(g)));
        }
        if let Some(d) = out.instance.objective.distance_to_optimum(&h.point) {
            l.push(("hit_dist_to_optimum".into(), real(d)));
        }
    }
    l
}
