use serde::{Deserialize, Serialize};

use super::nn::ParamSet;
use super::{TensorError, TensorResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
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

/// First and second moment estimates for one tensor.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn zeros(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// One bias-corrected Adam update of `param` in place; `t` is the 1-based step.
pub fn adam_step(
    param: &mut [f64],
    grad: &[f64],
    state: &mut AdamState,
    t: u64,
    cfg: &AdamConfig,
) -> TensorResult<()> {
    if grad.len() != param.len() || state.m.len() != param.len() || state.v.len() != param.len() {
        return Err(TensorError::ShapeMismatch {
            op: "adam_step",
            left: vec![param.len()],
            right: vec![grad.len(), state.m.len(), state.v.len()],
        });
    }
    let bc1 = 1.0 - cfg.beta1.powi(t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(t as i32);
    for i in 0..param.len() {
        let g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let mhat = state.m[i] / bc1;
        let vhat = state.v[i] / bc2;
        param[i] -= cfg.lr * mhat / (vhat.sqrt() + cfg.eps);
    }
    Ok(())
}

/// Adam over a whole [`ParamSet`], reading the accumulated `grad` fields.
#[derive(Clone, Debug)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    states: Vec<AdamState>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            states: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut ParamSet) -> TensorResult<()> {
        if self.states.is_empty() {
            self.states = params.iter().map(|p| AdamState::zeros(p.value.len())).collect();
        }
        if self.states.len() != params.len() {
            return Err(TensorError::ShapeMismatch {
                op: "adam",
                left: vec![self.states.len()],
                right: vec![params.len()],
            });
        }
        self.step += 1;
        for (p, st) in params.iter_mut().zip(&mut self.states) {
            let grad = p.grad.data().to_vec();
            adam_step(p.value.data_mut(), &grad, st, self.step, &self.config)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_about_lr() {
        let cfg = AdamConfig {
            lr: 0.1,
            ..Default::default()
        };
        let mut x = [1.0];
        let mut st = AdamState::zeros(1);
        adam_step(&mut x, &[1.0], &mut st, 1, &cfg).unwrap();
        assert!((x[0] - 0.9).abs() < 1e-6);
    }

    #[test]
    fn zero_grad_is_noop() {
        let mut x = [0.7];
        let mut st = AdamState::zeros(1);
        adam_step(&mut x, &[0.0], &mut st, 1, &AdamConfig::default()).unwrap();
        assert_eq!(x[0], 0.7);
    }

    #[test]
    fn quadratic_decreases() {
        let cfg = AdamConfig {
            lr: 0.1,
            ..Default::default()
        };
        let mut x = [1.0f64];
        let mut st = AdamState::zeros(1);
        let mut prev = x[0].abs();
        for t in 1..=3 {
            let g = [2.0 * x[0]];
            adam_step(&mut x, &g, &mut st, t, &cfg).unwrap();
            assert!(x[0].abs() < prev);
            prev = x[0].abs();
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut x = [0.0, 1.0];
        let mut st = AdamState::zeros(2);
        assert!(adam_step(&mut x, &[1.0], &mut st, 1, &AdamConfig::default()).is_err());
    }
}
