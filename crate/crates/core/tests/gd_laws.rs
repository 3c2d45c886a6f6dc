use gensmooth::framework::{run_driver, DecreaseProcedure, StationaryTarget, Termination};
use gensmooth::optimizers::{build_gd, gd_procedure};
use gensmooth::problems::{
    log_secant, matrix_pca, monomial_norm, phase_retrieval, quadratic, MatrixPcaSpec,
    MonomialNormSpec, Objective, PhaseRetrievalSpec,
};
use gensmooth::{RngState, Vector};

fn catalog(seed: u64) -> Vec<(Objective, Box<dyn Fn(&mut RngState) -> Vector>)> {
    let mut rng = RngState::new(seed, 99);
    let q = quadratic(vec![0.5, 1.0, 2.0, 4.0]).unwrap();
    let pr = phase_retrieval(PhaseRetrievalSpec::random(10, &mut rng).unwrap());
    let pca = matrix_pca(MatrixPcaSpec::from_spectrum(&[2.0, 1.0, 0.5, 0.25], &mut rng).unwrap());
    let mono = monomial_norm(MonomialNormSpec::harmonic(5, 4).unwrap());
    vec![
        (q, Box::new(|r: &mut RngState| r.gaussian_vector(4, 1.0))),
        (log_secant(), Box::new(|r: &mut RngState| Vector::from_element(1, 0.4 * r.uniform()))),
        (pr, Box::new(|r: &mut RngState| r.gaussian_vector(10, 10f64.sqrt().recip()))),
        (pca, Box::new(|r: &mut RngState| r.gaussian_vector(4, 0.5))),
        (mono, Box::new(|r: &mut RngState| r.gaussian_vector(5, 1.0))),
    ]
}

#[test]
fn gd_never_increases_and_stays_in_the_sublevel_set() {
    for (obj, init) in catalog(1) {
        for seed in 0..10 {
            let mut rng = RngState::new(seed, 1);
            let mut w = init(&mut rng);
            let f0 = obj.value(&w);
            let c = obj.profile().effective_constants(f0).unwrap();
            let eta = build_gd(&c, 1.0).unwrap().eta;
            let mut f = f0;
            for _ in 0..2000 {
                w -= obj.gradient(&w) * eta;
                let next = obj.value(&w);
                assert!(next <= f + 1e-12, "{}: {next} > {f}", obj.name());
                assert!(next <= f0 + 1e-12);
                assert!(obj.contains(&w));
                f = next;
            }
        }
    }
}

#[test]
fn gd_hits_within_the_call_bound() {
    let eps = 1e-2;
    for (obj, init) in catalog(2).into_iter().take(4) {
        for seed in 0..10 {
            let mut rng = RngState::new(seed, 2);
            let w0 = init(&mut rng);
            let f0 = obj.value(&w0);
            let c = obj.profile().effective_constants(f0).unwrap();
            let bound = (2.0 * f0 * c.l1 / (eps * eps)).ceil() as u64 + 1;
            let mut proc = gd_procedure(obj.clone(), build_gd(&c, 1.0).unwrap(), eps);
            let target = StationaryTarget::fosp(&obj, eps);
            let rec = run_driver(&mut proc, &w0, &target, bound, &mut rng).unwrap();
            assert_eq!(rec.terminated, Termination::Hit, "{}", obj.name());
            assert!(rec.total_oracle_calls <= bound);
            assert_eq!(rec.decrease_violations, 0);
            assert!(proc.delta(&w0) > 0.0);
        }
    }
}
