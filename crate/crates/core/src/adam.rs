//! Adam with bias correction, and full-batch training on the scalarized
//! PINN loss.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlp::ParameterVector;
use crate::problems::{objectives_and_gradient, ObjectiveVector, PinnProblem, ProblemError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdamError {
    #[error("gradient length {actual} does not match parameter length {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite gradient component at index {index}: {value}")]
    NonFiniteGradient { index: usize, value: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Self::default()
        }
    }
}

/// Moment estimates for one parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step_count: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step_count: 0,
            config,
        }
    }

    fn check(&self, params: &[f64], grad: &[f64]) -> Result<(), AdamError> {
        if grad.len() != params.len() || self.m.len() != params.len() {
            return Err(AdamError::LengthMismatch {
                expected: self.m.len(),
                actual: grad.len().max(params.len()),
            });
        }
        if let Some((index, &value)) = grad.iter().enumerate().find(|(_, g)| !g.is_finite()) {
            return Err(AdamError::NonFiniteGradient { index, value });
        }
        Ok(())
    }

    /// Applies one update in place.
    pub fn step_in_place(&mut self, params: &mut [f64], grad: &[f64]) -> Result<(), AdamError> {
        self.check(params, grad)?;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        self.step_count += 1;
        let t = self.step_count as i32;
        let c1 = 1.0 - libm::pow(beta1, t as f64);
        let c2 = 1.0 - libm::pow(beta2, t as f64);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (libm::sqrt(v_hat) + eps);
        }
        Ok(())
    }
}

/// One Adam update; inputs are left untouched.
pub fn adam_step(
    state: &AdamState,
    params: &[f64],
    grad: &[f64],
) -> Result<(AdamState, Vec<f64>), AdamError> {
    let mut next = state.clone();
    let mut out = params.to_vec();
    next.step_in_place(&mut out, grad)?;
    Ok((next, out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ParameterVector,
    pub state: AdamState,
    /// Total loss before every step and after the last one.
    pub history: Vec<f64>,
    /// Components at the returned parameters.
    pub objectives: ObjectiveVector,
}

/// `n_steps` full-batch Adam steps on the unit-weight total loss, starting
/// from a fresh optimizer state.
pub fn train<P: PinnProblem + ?Sized>(
    problem: &P,
    params: &ParameterVector,
    n_steps: usize,
    config: AdamConfig,
) -> Result<TrainOutcome, AdamError> {
    train_from(
        problem,
        params,
        AdamState::new(params.len(), config),
        n_steps,
    )
}

/// Like [`train`] but resumes from an existing optimizer state.
pub fn train_from<P: PinnProblem + ?Sized>(
    problem: &P,
    params: &ParameterVector,
    mut state: AdamState,
    n_steps: usize,
) -> Result<TrainOutcome, AdamError> {
    let mut params = params.clone();
    let mut history = Vec::with_capacity(n_steps + 1);
    for _ in 0..n_steps {
        let (obj, grad) = objectives_and_gradient(problem, &params)?;
        history.push(obj.total());
        state.step_in_place(&mut params.values, &grad)?;
    }
    let objectives = crate::problems::evaluate_objectives(problem, &params)?;
    history.push(objectives.total());
    Ok(TrainOutcome {
        params,
        state,
        history,
        objectives,
    })
}
