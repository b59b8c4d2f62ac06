use alloc::vec;
use alloc::vec::Vec;

use super::ParamSet;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for Adam {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        let zeros = || params.iter().map(|p| vec![0.0; p.data.len()]).collect();
        Self {
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }
}

impl Adam {
    /// Advances the step counter and applies one bias-corrected update.
    pub fn step(&self, params: &mut ParamSet, grads: &ParamSet, state: &mut AdamState) {
        state.step += 1;
        adam_step(params, grads, state, state.step, self);
    }
}

/// One Adam update at (1-based) step `t`.
pub fn adam_step(params: &mut ParamSet, grads: &ParamSet, state: &mut AdamState, t: u64, hp: &Adam) {
    assert!(t >= 1, "Adam steps are 1-based");
    let bc1 = 1.0 - libm::pow(hp.beta1, t as f64);
    let bc2 = 1.0 - libm::pow(hp.beta2, t as f64);
    for (i, (p, g)) in params.iter_mut().zip(grads.iter()).enumerate() {
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        for j in 0..p.data.len() {
            let gj = g.data[j];
            m[j] = hp.beta1 * m[j] + (1.0 - hp.beta1) * gj;
            v[j] = hp.beta2 * v[j] + (1.0 - hp.beta2) * gj * gj;
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            p.data[j] -= hp.learning_rate * m_hat / (libm::sqrt(v_hat) + hp.epsilon);
        }
    }
}
