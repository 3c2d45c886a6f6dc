//! Certification suite: finite-difference consistency, self-bounding
//! envelopes on sublevel samples, profile monotonicity and the strict-saddle
//! properties of the phase retrieval and PCA instances.

use std::fmt;

use gensmooth::framework::{run_driver, StationaryTarget};
use gensmooth::numerics::derive_stream;
use gensmooth::optimizers::{build_perturbed_gd, perturbed_gd_procedure, DEFAULT_C};
use gensmooth::problems::Objective;
use gensmooth::stationarity::check;
use gensmooth::{RngState, Vector};
use nalgebra::DMatrix;

use crate::catalog::{self, Instance, ObjectiveSpec};
use crate::config::{ConfigError, VerifyConfig};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-5;
pub const ENVELOPE_SLACK: f64 = 1e-6;
/// Perturbed GD runs per strict-saddle check.
const SADDLE_RUNS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub objective: String,
    pub check: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.objective,
            self.check,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub results: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn get(&self, objective: &str, check: &str) -> Option<&CheckResult> {
        self.results
            .iter()
            .find(|r| r.objective == objective && r.check == check)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.results.len(), failed)
    }
}

/// Sizes of the sampled checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub samples: usize,
    pub fd_points: usize,
}

impl From<&VerifyConfig> for VerifyOptions {
    fn from(c: &VerifyConfig) -> Self {
        VerifyOptions {
            seed: c.seed,
            samples: c.samples,
            fd_points: c.fd_points,
        }
    }
}

pub fn fd_gradient(obj: &Objective, w: &Vector, h: f64) -> Vector {
    Vector::from_fn(w.len(), |i, _| {
        let mut p = w.clone();
        let mut m = w.clone();
        p[i] += h;
        m[i] -= h;
        (obj.value(&p) - obj.value(&m)) / (2.0 * h)
    })
}

pub fn fd_hessian(obj: &Objective, w: &Vector, h: f64) -> DMatrix<f64> {
    let d = w.len();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut p = w.clone();
        let mut m = w.clone();
        p[j] += h;
        m[j] -= h;
        out.set_column(j, &((obj.gradient(&p) - obj.gradient(&m)) / (2.0 * h)));
    }
    out
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, 1)`.
fn rel_err(diff: f64, a: f64, b: f64) -> f64 {
    diff / a.max(b).max(1.0)
}

/// Points of the sublevel set `{F ≤ F(w_ref)}`: each draw from the initial
/// law is pulled toward `w_ref` by halving until it lands inside.
pub fn sublevel_samples(inst: &Instance, w_ref: &Vector, n: usize, rng: &mut RngState) -> Vec<Vector> {
    let obj = &inst.objective;
    let alpha = obj.value(w_ref);
    (0..n)
        .map(|_| {
            let w = inst.sample_init(rng);
            let mut t = 1.0;
            loop {
                let x = w_ref + (&w - w_ref) * t;
                if t < 1e-12 || (obj.contains(&x) && obj.value(&x) <= alpha) {
                    break x;
                }
                t *= 0.5;
            }
        })
        .collect()
}

struct Checks<'a> {
    name: &'a str,
    out: Vec<CheckResult>,
}

impl Checks<'_> {
    fn push(&mut self, check: &'static str, passed: bool, detail: String) {
        self.out.push(CheckResult {
            objective: self.name.to_string(),
            check,
            passed,
            detail,
        });
    }
}

fn worst(v: f64, w: &mut f64) {
    if v > *w || v.is_nan() {
        *w = v;
    }
}

/// Runs every check that applies to `inst`.
pub fn verify_instance(inst: &Instance, opts: &VerifyOptions) -> Vec<CheckResult> {
    let obj = &inst.objective;
    let profile = obj.profile();
    let mut rng = RngState::new(opts.seed, derive_stream(&[0x7E51, obj.dim() as u64]));
    let mut c = Checks {
        name: inst.name(),
        out: Vec::new(),
    };

    let fd_pts: Vec<Vector> = (0..opts.fd_points).map(|_| inst.sample_init(&mut rng)).collect();
    let mut g_err = 0.0f64;
    let mut h_err = 0.0f64;
    let mut min_value = f64::INFINITY;
    for w in &fd_pts {
        let g = obj.gradient(w);
        let fd = fd_gradient(obj, w, FD_STEP);
        worst(rel_err((&g - &fd).norm(), g.norm(), fd.norm()), &mut g_err);
        if let Some(h) = obj.hessian(w) {
            let fd = fd_hessian(obj, w, FD_STEP);
            let h = h.as_matrix();
            worst(rel_err((h - &fd).norm(), h.norm(), fd.norm()), &mut h_err);
        }
        min_value = min_value.min(obj.value(w));
    }
    c.push(
        "fd_gradient",
        g_err <= FD_TOL,
        format!("max rel err {g_err:.3e} over {} points", fd_pts.len()),
    );
    if obj.has_hessian() {
        c.push(
            "fd_hessian",
            h_err <= FD_TOL,
            format!("max rel err {h_err:.3e} over {} points", fd_pts.len()),
        );
    }
    c.push(
        "nonnegative",
        min_value >= 0.0,
        format!("min F {min_value:.3e}"),
    );

    let w_ref = inst.sample_init(&mut rng);
    let alpha = obj.value(&w_ref);
    let pts = sublevel_samples(inst, &w_ref, opts.samples, &mut rng);
    let mut g_excess = f64::NEG_INFINITY;
    let mut h_excess = f64::NEG_INFINITY;
    let mut env_err = None;
    for w in &pts {
        let fv = obj.value(w);
        match profile.rho0(fv) {
            Ok(r0) => worst(obj.gradient(w).norm() - r0, &mut g_excess),
            Err(e) => env_err = Some(e.to_string()),
        }
        if let Some(h) = obj.hessian(w) {
            match h.op_norm() {
                Ok(n) => worst(n - profile.rho1(fv), &mut h_excess),
                Err(e) => env_err = Some(e.to_string()),
            }
        }
    }
    c.push(
        "rho0_gradient_envelope",
        env_err.is_none() && g_excess <= ENVELOPE_SLACK,
        env_err.clone().unwrap_or(format!(
            "max ‖∇F‖ − ρ₀(F) = {g_excess:.3e} on {} points with F ≤ {alpha:.3e}",
            pts.len()
        )),
    );
    if obj.has_hessian() {
        c.push(
            "rho1_hessian_envelope",
            env_err.is_none() && h_excess <= ENVELOPE_SLACK,
            env_err.unwrap_or(format!(
                "max ‖∇²F‖ − ρ₁(F) = {h_excess:.3e} on {} points",
                pts.len()
            )),
        );
    }

    if obj.has_hessian() && profile.has_rho2() {
        let mut excess = f64::NEG_INFINITY;
        let mut failure = None;
        for w in &pts {
            let dir = rng.gaussian_vector(obj.dim(), 1.0);
            let w2 = w + dir.normalize() * (1e-3 * w.norm().max(1e-2));
            if !obj.contains(&w2) {
                continue;
            }
            let (h1, h2) = (obj.hessian(w).unwrap(), obj.hessian(&w2).unwrap());
            let diff = gensmooth::SymMatrix::symmetrized(h1.as_matrix() - h2.as_matrix());
            let fmax = obj.value(w).max(obj.value(&w2));
            match (diff.op_norm(), profile.rho2(fmax)) {
                (Ok(n), Ok(r2)) => worst(n - r2 * (w - &w2).norm(), &mut excess),
                (Err(e), _) => failure = Some(e.to_string()),
                (_, Err(e)) => failure = Some(e.to_string()),
            }
        }
        c.push(
            "rho2_hessian_lipschitz",
            failure.is_none() && excess <= ENVELOPE_SLACK,
            failure.unwrap_or(format!("max excess {excess:.3e} on {} pairs", pts.len())),
        );
    }

    let grid: Vec<f64> = (0..64).map(|k| (alpha + 1.0) * k as f64 / 63.0).collect();
    let rho0: Result<Vec<f64>, _> = grid.iter().map(|&x| profile.rho0(x)).collect();
    c.push(
        "rho0_monotone",
        rho0.as_ref().is_ok_and(|v| v.windows(2).all(|p| p[1] >= p[0])),
        match &rho0 {
            Ok(_) => format!("64 points on [0, {:.3e}]", alpha + 1.0),
            Err(e) => e.to_string(),
        },
    );
    let consts: Result<Vec<_>, _> = grid.iter().map(|&x| profile.effective_constants(x)).collect();
    c.push(
        "effective_constants_monotone",
        consts.as_ref().is_ok_and(|v| {
            v.windows(2)
                .all(|p| p[1].l1 >= p[0].l1 && p[1].l2.unwrap_or(0.0) >= p[0].l2.unwrap_or(0.0))
        }),
        match &consts {
            Ok(_) => "L1 and L2 non-decreasing in F0".to_string(),
            Err(e) => e.to_string(),
        },
    );

    match inst.name() {
        "phase_retrieval" => strict_saddle_pr(inst, &mut rng, &mut c),
        "matrix_pca" => strict_saddle_pca(inst, &mut rng, &mut c),
        _ => {}
    }
    c.out
}

/// Perturbed GD to an `eps`-SOSP with `η·L₁ = 0.5`.
fn sosp_from(obj: &Objective, w0: &Vector, eps: f64, rng: &mut RngState) -> Result<Vector, String> {
    let consts = obj
        .profile()
        .effective_constants(obj.value(w0))
        .map_err(|e| e.to_string())?;
    let params = build_perturbed_gd(&consts, obj.dim(), eps, 0.1, DEFAULT_C, 0.5 / DEFAULT_C)
        .map_err(|e| e.to_string())?;
    let mut proc = perturbed_gd_procedure(obj.clone(), params);
    let target = StationaryTarget::sosp(obj, eps).map_err(|e| e.to_string())?;
    let rec = run_driver(&mut proc, w0, &target, 10_000_000, rng).map_err(|e| e.to_string())?;
    rec.hit()
        .map(|c| c.point.clone())
        .ok_or_else(|| "no SOSP within budget".to_string())
}

fn strict_saddle_pr(inst: &Instance, rng: &mut RngState, c: &mut Checks) {
    let obj = &inst.objective;
    let eps = 20f64.powi(-4);
    let mut bad = Vec::new();
    for k in 0..SADDLE_RUNS {
        let w0 = inst.sample_init(rng);
        match sosp_from(obj, &w0, eps, rng) {
            Ok(w) => {
                let sosp = check(obj, &w, eps, true).ok().and_then(|r| r.is_sosp) == Some(true);
                if !sosp || obj.value(&w) > eps / 2.0 {
                    bad.push(format!("run {k}: F = {:.3e}", obj.value(&w)));
                }
            }
            Err(e) => bad.push(format!("run {k}: {e}")),
        }
    }
    c.push(
        "strict_saddle",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{SADDLE_RUNS} SOSPs at eps = 20^-4 all have F ≤ eps/2")
        } else {
            bad.join("; ")
        },
    );
}

fn strict_saddle_pca(inst: &Instance, rng: &mut RngState, c: &mut Checks) {
    let Some(spec) = &inst.pca else { return };
    let obj = &inst.objective;
    let gap = spec.gap();
    let eps = 1e-3f64.min(0.5 * 1f64.min(gap * gap / 16.0).min(0.375 * gap.powf(2.5)));
    let mut bad = Vec::new();
    for k in 0..SADDLE_RUNS {
        let w0 = inst.sample_init(rng);
        match sosp_from(obj, &w0, eps, rng) {
            Ok(w) => {
                let dev = (w.norm_squared() - spec.lambda1()).abs();
                if dev >= eps.sqrt() {
                    bad.push(format!("run {k}: |‖w‖² − λ₁| = {dev:.3e}"));
                }
            }
            Err(e) => bad.push(format!("run {k}: {e}")),
        }
    }
    c.push(
        "strict_saddle",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{SADDLE_RUNS} SOSPs at eps = {eps:.3e} all have |‖w‖² − λ₁| < √eps")
        } else {
            bad.join("; ")
        },
    );
}

/// Runs the suite on the named catalog objectives at their default settings.
pub fn verify_suite(cfg: &VerifyConfig) -> Result<VerifyReport, ConfigError> {
    let opts = VerifyOptions::from(cfg);
    let mut report = VerifyReport::default();
    for name in &cfg.objectives {
        let mut spec = ObjectiveSpec::named(name);
        spec.instance_seed = cfg.seed;
        let inst = catalog::build(&spec)?;
        report.results.extend(verify_instance(&inst, &opts));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_of_a_quadratic_is_exact_enough() {
        let inst = catalog::build(&ObjectiveSpec::named("quadratic")).unwrap();
        let w = Vector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let g = inst.objective.gradient(&w);
        assert!((fd_gradient(&inst.objective, &w, FD_STEP) - g).norm() < 1e-8);
    }

    #[test]
    fn sublevel_samples_stay_inside() {
        let inst = catalog::build(&ObjectiveSpec::named("phase_retrieval")).unwrap();
        let mut rng = RngState::new(1, 1);
        let w_ref = inst.sample_init(&mut rng);
        let a = inst.objective.value(&w_ref);
        for w in sublevel_samples(&inst, &w_ref, 200, &mut rng) {
            assert!(inst.objective.value(&w) <= a);
        }
    }

    #[test]
    fn report_formatting() {
        let r = VerifyReport {
            results: vec![CheckResult {
                objective: "quadratic".into(),
                check: "fd_gradient",
                passed: false,
                detail: "x".into(),
            }],
        };
        assert!(!r.passed());
        assert_eq!(r.to_string(), "FAIL quadratic fd_gradient: x\n1 checks, 1 failed");
    }
}
