//! Step-size divergence sweeps over `‖Aw‖^p`.

use gensmooth::numerics::derive_stream;
use gensmooth::problems::{monomial_norm, MonomialNormSpec, Objective};
use gensmooth::{RngState, Vector};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{SweepAlgorithm, SweepConfig};

/// Ratio recorded for a trajectory that produced NaN or ±∞.
pub const OVERFLOW_SENTINEL: f64 = 1e30;

const INIT_TAG: u64 = 1;
const NOISE_TAG: u64 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("divergence detection needs a non-empty list")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub p: u32,
    pub c: f64,
    pub eta_index: usize,
    pub eta: f64,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub n: usize,
    /// Trajectories whose ratio was replaced by the sentinel.
    pub overflowed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub p: u32,
    pub c: f64,
    pub index: Option<usize>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    /// Ordered by `p`, then `c`, then `η`.
    pub cells: Vec<Cell>,
    /// One per `(p, c)`, same order.
    pub thresholds: Vec<Threshold>,
}

impl SweepResult {
    pub fn threshold(&self, p: u32, c: f64) -> Option<&Threshold> {
        self.thresholds.iter().find(|t| t.p == p && t.c == c)
    }

    pub fn row(&self, p: u32, c: f64) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |x| x.p == p && x.c == c)
    }
}

/// First `i ≥ 1` with `ratios[i] ≥ factor·ratios[i−1]`.
pub fn detect_divergence(ratios: &[f64], factor: f64) -> Result<Option<usize>, SweepError> {
    if ratios.is_empty() {
        return Err(SweepError::Empty);
    }
    Ok((1..ratios.len()).find(|&i| ratios[i] >= factor * ratios[i - 1]))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `‖∇F(w_T)‖/F(w₀)` after `T` steps, or the sentinel.
fn terminal_ratio(
    obj: &Objective,
    w0: &Vector,
    eta: f64,
    iters: usize,
    noise: Option<(f64, &mut RngState)>,
) -> f64 {
    let f0 = obj.value(w0);
    let mut w = w0.clone();
    let mut noise = noise;
    for _ in 0..iters {
        let mut g = obj.gradient(&w);
        if let Some((std, rng)) = noise.as_mut() {
            g += rng.gaussian_vector(w.len(), *std);
        }
        w -= g * eta;
        if !w.iter().all(|x| x.is_finite()) {
            return OVERFLOW_SENTINEL;
        }
    }
    let r = obj.gradient(&w).norm() / f0;
    if r.is_finite() {
        r
    } else {
        OVERFLOW_SENTINEL
    }
}

fn run_row(cfg: &SweepConfig, grid: &[f64], p: u32, pi: usize, ci: usize) -> (Vec<Cell>, Threshold) {
    let c = cfg.init_scales[ci];
    let obj = monomial_norm(MonomialNormSpec::harmonic(cfg.dim, p).expect("validated exponent"));
    let mut init_rng = RngState::new(cfg.base_seed, derive_stream(&[INIT_TAG, pi as u64, ci as u64]));
    let inits: Vec<Vector> = (0..cfg.inits_per_cell)
        .map(|_| init_rng.gaussian_vector(cfg.dim, c.sqrt()))
        .collect();
    let mut cells = Vec::new();
    let mut means = Vec::new();
    let mut index = None;
    for (i, &eta) in grid.iter().enumerate() {
        let mut rng = RngState::new(
            cfg.base_seed,
            derive_stream(&[NOISE_TAG, pi as u64, ci as u64, i as u64]),
        );
        let ratios: Vec<f64> = inits
            .iter()
            .map(|w0| match cfg.algorithm {
                SweepAlgorithm::Gd => terminal_ratio(&obj, w0, eta, cfg.iterations, None),
                SweepAlgorithm::Sgd => {
                    terminal_ratio(&obj, w0, eta, cfg.iterations, Some((cfg.noise_std, &mut rng)))
                }
            })
            .collect();
        let (mean, std) = mean_std(&ratios);
        cells.push(Cell {
            p,
            c,
            eta_index: i,
            eta,
            mean_ratio: mean,
            std_ratio: std,
            n: ratios.len(),
            overflowed: ratios.iter().filter(|&&r| r == OVERFLOW_SENTINEL).count(),
        });
        means.push(mean);
        if i >= 1 && mean >= cfg.divergence_ratio_factor * means[i - 1] {
            index = Some(i);
            break;
        }
    }
    debug_assert_eq!(index, detect_divergence(&means, cfg.divergence_ratio_factor).unwrap());
    let threshold = Threshold {
        p,
        c,
        index,
        eta: index.map(|i| grid[i]),
    };
    (cells, threshold)
}

/// Rows `(p, c_j)` run in parallel on the current rayon pool; each row scans
/// `η` upward and stops at its divergence point. Output order is fixed.
pub fn run_sweep(cfg: &SweepConfig) -> SweepResult {
    let grid = cfg.step_grid.points();
    let rows: Vec<(usize, usize)> = (0..cfg.p_values.len())
        .flat_map(|pi| (0..cfg.init_scales.len()).map(move |ci| (pi, ci)))
        .collect();
    let done: Vec<(Vec<Cell>, Threshold)> = rows
        .par_iter()
        .map(|&(pi, ci)| run_row(cfg, &grid, cfg.p_values[pi], pi, ci))
        .collect();
    let mut cells = Vec::new();
    let mut thresholds = Vec::new();
    for (c, t) in done {
        cells.extend(c);
        thresholds.push(t);
    }
    SweepResult {
        grid,
        cells,
        thresholds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StepGrid;

    #[test]
    fn divergence_rule() {
        assert_eq!(detect_divergence(&[1.0, 1.0, 1e6], 100.0).unwrap(), Some(2));
        assert_eq!(detect_divergence(&[5.0, 4.0, 3.0, 1.0], 100.0).unwrap(), None);
        assert_eq!(detect_divergence(&[2.0, 150.0, 1.0], 100.0).unwrap(), None);
        assert_eq!(detect_divergence(&[2.0, 250.0, 1e9], 100.0).unwrap(), Some(1));
        assert_eq!(detect_divergence(&[1.0, 100.0], 100.0).unwrap(), Some(1));
        assert_eq!(detect_divergence(&[3.0], 100.0).unwrap(), None);
        assert_eq!(detect_divergence(&[], 100.0), Err(SweepError::Empty));
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_eq!(s, 1.0);
    }

    fn small() -> SweepConfig {
        SweepConfig {
            p_values: vec![2, 4],
            dim: 5,
            inits_per_cell: 5,
            iterations: 100,
            init_scales: vec![1.0, 4.0],
            step_grid: StepGrid {
                log_min_exp: -3.0,
                log_max_exp: 1.0,
                count: 10,
            },
            ..SweepConfig::default()
        }
    }

    #[test]
    fn quadratic_case_diverges_past_two_over_curvature() {
        // Hessian 2·diag(a²) has top eigenvalue 2, so GD diverges once η > 1.
        // The grid avoids η = 1 itself, where the top mode neither grows nor decays.
        let r = run_sweep(&small());
        for c in [1.0, 4.0] {
            let t = r.threshold(2, c).unwrap();
            assert!(t.eta.unwrap() > 1.0);
            assert!(r.grid[t.index.unwrap() - 1] <= 1.0);
        }
        assert_eq!(r.thresholds.len(), 4);
    }

    #[test]
    fn rows_stop_at_the_threshold() {
        let r = run_sweep(&small());
        for t in &r.thresholds {
            let n = r.row(t.p, t.c).count();
            match t.index {
                Some(i) => assert_eq!(n, i + 1),
                None => assert_eq!(n, r.grid.len()),
            }
        }
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let cfg = SweepConfig {
            algorithm: SweepAlgorithm::Sgd,
            ..small()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_sweep(&cfg));
        let b = four.install(|| run_sweep(&cfg));
        assert_eq!(a, b);
    }

    #[test]
    fn overflow_gives_the_sentinel() {
        let obj = monomial_norm(MonomialNormSpec::harmonic(3, 6).unwrap());
        let w0 = Vector::from_element(3, 50.0);
        assert_eq!(terminal_ratio(&obj, &w0, 10.0, 50, None), OVERFLOW_SENTINEL);
    }
}
