//! Seeded batch simulation and envelope statistics.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`). Run `i` of a
//! batch with seed `s` is keyed by the 64-bit value `s ^ i` written
//! little-endian into the first 8 key bytes, remaining 24 key bytes zero,
//! stream 0. Each run therefore owns an independent substream and a batch
//! gives bit-identical results however its runs are scheduled. Initial
//! states are drawn agent by agent with `Rng::gen_range(low..high)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::analysis::consensus_value;
use crate::dynamics::{AugmentedState, ModelParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::net::{validate, WeightedAdjacency, ROW_SUM_TOL};
use crate::spectral::eigendecompose_symmetric;

/// Norms below this are rounding noise.
pub const NORM_FLOOR: f64 = 1e-13;

/// Minimum number of points for a rate fit.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub model: ModelParams,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
    pub init_low: f64,
    pub init_high: f64,
}

impl SimConfig {
    /// Uniform initial states on `[0, 1)`.
    pub fn new(model: ModelParams, steps: usize, runs: usize, seed: u64) -> Self {
        SimConfig { model, steps, runs, seed, init_low: 0.0, init_high: 1.0 }
    }

    pub fn check(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::BadParameter("steps must be at least 1".into()));
        }
        if self.runs < 1 {
            return Err(Error::BadParameter("runs must be at least 1".into()));
        }
        if self.init_low.partial_cmp(&self.init_high) != Some(std::cmp::Ordering::Less) {
            return Err(Error::BadParameter(format!(
                "initial range [{}, {}) is empty",
                self.init_low, self.init_high
            )));
        }
        Ok(())
    }
}

/// Per-step envelope of deviations from the instantaneous agent mean,
/// aggregated over every run and agent.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    /// Indexed by step `k = 0..=steps`.
    pub env_min: Vec<f64>,
    pub env_max: Vec<f64>,
    /// One entry per run: `max_i |x_i(steps) - mean(x(steps))|`.
    pub final_max_abs_deviation: Vec<f64>,
}

impl TraceSummary {
    pub fn steps(&self) -> usize {
        self.env_max.len() - 1
    }

    pub fn width(&self, k: usize) -> f64 {
        self.env_max[k] - self.env_min[k]
    }

    /// First step at which the envelope width is below `level`.
    pub fn first_below(&self, level: f64) -> Option<usize> {
        (0..=self.steps()).find(|&k| self.width(k) < level)
    }

    /// CSV with header `k,env_min,env_max`, one row per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,env_min,env_max\n");
        for (k, (lo, hi)) in self.env_min.iter().zip(&self.env_max).enumerate() {
            writeln!(out, "{k},{lo:e},{hi:e}").unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&(seed ^ stream).to_le_bytes());
    ChaCha20Rng::from_seed(key)
}

/// Initial state of run `run` in a batch configured by `cfg`.
pub fn initial_condition(n: usize, cfg: &SimConfig, run: usize) -> Vec<f64> {
    let mut rng = rng_for(cfg.seed, run as u64);
    (0..n).map(|_| rng.gen_range(cfg.init_low..cfg.init_high)).collect()
}

fn deviation_extremes(x: &[f64]) -> (f64, f64) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        let d = v - mean;
        (lo.min(d), hi.max(d))
    })
}

/// Runs `cfg.runs` seeded simulations and aggregates their envelopes.
pub fn run_batch(a: &WeightedAdjacency, cfg: &SimConfig) -> Result<TraceSummary> {
    cfg.check()?;
    let initials: Vec<Vec<f64>> = (0..cfg.runs).map(|r| initial_condition(a.n(), cfg, r)).collect();
    run_from(a, cfg.model, cfg.steps, &initials)
}

/// Like [`run_batch`] with explicit initial states, one run per entry.
pub fn run_from(
    a: &WeightedAdjacency,
    model: ModelParams,
    steps: usize,
    initials: &[Vec<f64>],
) -> Result<TraceSummary> {
    if initials.is_empty() {
        return Err(Error::BadParameter("no initial conditions".into()));
    }
    let traces = initials
        .par_iter()
        .map(|x0| {
            let mut state = AugmentedState::new(x0.clone());
            let mut ext = Vec::with_capacity(steps + 1);
            ext.push(deviation_extremes(&state.current));
            for _ in 0..steps {
                model.advance(a, &mut state)?;
                ext.push(deviation_extremes(&state.current));
            }
            Ok(ext)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut env_min = vec![f64::INFINITY; steps + 1];
    let mut env_max = vec![f64::NEG_INFINITY; steps + 1];
    for ext in &traces {
        for (k, &(lo, hi)) in ext.iter().enumerate() {
            env_min[k] = env_min[k].min(lo);
            env_max[k] = env_max[k].max(hi);
        }
    }
    let final_max_abs_deviation =
        traces.iter().map(|ext| ext[steps].0.abs().max(ext[steps].1.abs())).collect();
    Ok(TraceSummary { env_min, env_max, final_max_abs_deviation })
}

/// Empirical decay rate from a log-linear least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub fitted_rate: f64,
    pub r_squared: f64,
    /// First and last step used.
    pub window: (usize, usize),
}

/// Fits `log ||x(k) - x_inf 1||_2` against `k`.
///
/// The window skips the first 10% of steps and ends just before the norm
/// first falls under [`NORM_FLOOR`]; later points are rounding noise.
pub fn fit_rate(
    a: &WeightedAdjacency,
    model: ModelParams,
    x0: &[f64],
    steps: usize,
) -> Result<RateFit> {
    let spec = eigendecompose_symmetric(a)?;
    let limit = consensus_value(a, &spec, x0)?;
    let start = steps.div_ceil(10);

    let mut state = AugmentedState::new(x0.to_vec());
    let mut points = Vec::new();
    for k in 0..=steps {
        if k > 0 {
            model.advance(a, &mut state)?;
        }
        if k < start {
            continue;
        }
        let norm = state.current.iter().map(|x| (x - limit).powi(2)).sum::<f64>().sqrt();
        if !(norm >= NORM_FLOOR && norm.is_finite()) {
            break;
        }
        points.push((k as f64, norm.ln()));
    }
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { usable: points.len(), needed: MIN_FIT_POINTS });
    }
    let (slope, r_squared) = least_squares(&points);
    Ok(RateFit {
        fitted_rate: slope.exp(),
        r_squared,
        window: (points[0].0 as usize, points[points.len() - 1].0 as usize),
    })
}

/// Slope and coefficient of determination of a straight-line fit.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, r2)
}

/// Random symmetric, row-stochastic, irreducible matrix.
///
/// The sparsity pattern is the union of the supports of `P + P^T` for the
/// cyclic shift `P` (a ring backbone, so the result is irreducible) and for
/// zero to two uniformly random permutations. Such a pattern has total
/// support, which lets the symmetric Sinkhorn iteration
/// `x <- sqrt(x / (M x))` converge. Each symmetric entry pair gets an
/// independent random weight in `[0.5, 1.5)` before scaling.
pub fn random_symmetric_stochastic(n: usize, seed: u64) -> Result<WeightedAdjacency> {
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    const MAX_ITER: usize = 10_000;
    let mut rng = rng_for(seed, 0);

    let mut pattern = vec![vec![false; n]; n];
    let shift: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut perms = vec![shift];
    for _ in 0..rng.gen_range(0..=2) {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng);
        perms.push(p);
    }
    for p in &perms {
        for (i, &j) in p.iter().enumerate() {
            pattern[i][j] = true;
            pattern[j][i] = true;
        }
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if pattern[i][j] {
                let w = rng.gen_range(0.5..1.5);
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
        }
    }

    let mut x = vec![1.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let scaled = scale_symmetric(&m, &x);
        residual = scaled.row_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
        if residual <= ROW_SUM_TOL / 10.0 {
            return validate(&scaled.to_rows());
        }
        let mx = m.mul_vec(&x);
        for (xi, r) in x.iter_mut().zip(&mx) {
            *xi = (*xi / r).sqrt();
        }
    }
    Err(Error::NormalizationFailed { iterations: MAX_ITER, residual })
}

/// `diag(x) M diag(x)`, with the lower triangle mirrored from the upper one
/// so the result is exactly symmetric.
fn scale_symmetric(m: &Matrix, x: &[f64]) -> Matrix {
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = x[i] * m[(i, j)] * x[j];
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
