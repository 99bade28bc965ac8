//! Update rules for the three averaging models.
//!
//! * DeGroot: `x(k+1) = A x(k)`
//! * accelerated averaging: `x(k+1) = beta A x(k) + (1 - beta) x(k-1)`
//! * memory of local averages (MLA): `x(k+1) = gamma A x(k) + (1 - gamma) A x(k-1)`
//!
//! Both memory models start from `x(-1) = x(0) = x0`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::net::WeightedAdjacency;

/// Which model to run, together with its scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    DeGroot,
    Accelerated { beta: f64 },
    Mla { gamma: f64 },
}

impl ModelParams {
    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::DeGroot => "degroot",
            ModelParams::Accelerated { .. } => "accelerated",
            ModelParams::Mla { .. } => "mla",
        }
    }

    /// Advances `state` by one step of this model.
    pub fn advance(&self, a: &WeightedAdjacency, state: &mut AugmentedState) -> Result<()> {
        let next = match *self {
            ModelParams::DeGroot => step_degroot(a, &state.current)?,
            ModelParams::Accelerated { beta } => {
                step_accelerated(a, beta, &state.current, &state.previous)?
            }
            ModelParams::Mla { gamma } => step_mla(a, gamma, &state.current, &state.previous)?,
        };
        state.previous = std::mem::replace(&mut state.current, next);
        state.k += 1;
        Ok(())
    }
}

/// `[x(k); x(k-1)]` plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub current: Vec<f64>,
    pub previous: Vec<f64>,
    pub k: usize,
}

impl AugmentedState {
    /// Initial state with `x(-1) = x(0) = x0`.
    pub fn new(x0: Vec<f64>) -> Self {
        AugmentedState { previous: x0.clone(), current: x0, k: 0 }
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.current.iter().chain(&self.previous).copied().collect()
    }
}

fn check_len(a: &WeightedAdjacency, x: &[f64]) -> Result<()> {
    if x.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: x.len() });
    }
    Ok(())
}

pub fn step_degroot(a: &WeightedAdjacency, x: &[f64]) -> Result<Vec<f64>> {
    check_len(a, x)?;
    Ok(a.weights().mul_vec(x))
}

pub fn step_accelerated(
    a: &WeightedAdjacency,
    beta: f64,
    x: &[f64],
    x_prev: &[f64],
) -> Result<Vec<f64>> {
    check_len(a, x_prev)?;
    let ax = step_degroot(a, x)?;
    Ok(ax.iter().zip(x_prev).map(|(z, p)| beta * z + (1.0 - beta) * p).collect())
}

pub fn step_mla(a: &WeightedAdjacency, gamma: f64, x: &[f64], x_prev: &[f64]) -> Result<Vec<f64>> {
    let z = step_degroot(a, x)?;
    let z_prev = step_degroot(a, x_prev)?;
    Ok(z.iter().zip(&z_prev).map(|(c, p)| gamma * c + (1.0 - gamma) * p).collect())
}

/// Explicit `2n x 2n` iteration matrix of a two-step model.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedMatrix {
    n: usize,
    m: Matrix,
}

impl AugmentedMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn apply(&self, state: &AugmentedState) -> AugmentedState {
        let y = self.m.mul_vec(&state.stacked());
        AugmentedState {
            current: y[..self.n].to_vec(),
            previous: y[self.n..].to_vec(),
            k: state.k + 1,
        }
    }
}

/// `[gamma A | (1 - gamma) A ; I | 0]`.
pub fn build_augmented(a: &WeightedAdjacency, gamma: f64) -> AugmentedMatrix {
    let n = a.n();
    let m = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => gamma * a.get(i, j),
        (true, false) => (1.0 - gamma) * a.get(i, j - n),
        (false, true) => {
            if i - n == j {
                1.0
            } else {
                0.0
            }
        }
        (false, false) => 0.0,
    });
    AugmentedMatrix { n, m }
}

/// `[beta A | (1 - beta) I ; I | 0]` for the accelerated averaging model.
pub fn build_augmented_accelerated(a: &WeightedAdjacency, beta: f64) -> AugmentedMatrix {
    let n = a.n();
    let m = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => beta * a.get(i, j),
        (true, false) => {
            if j - n == i {
                1.0 - beta
            } else {
                0.0
            }
        }
        (false, true) => {
            if i - n == j {
                1.0
            } else {
                0.0
            }
        }
        (false, false) => 0.0,
    });
    AugmentedMatrix { n, m }
}
