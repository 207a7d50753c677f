//! Adam with bias correction, over flat `f64` tensors.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment accumulators for one tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl Moments {
    pub fn zeros(len: usize) -> Self {
        Moments {
            first: vec![0.0; len],
            second: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.first.iter().chain(&self.second).all(|x| x.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Adam { config, step: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Advance the step counter. Call once per optimizer step, before the
    /// per-tensor updates of that step.
    pub fn begin_step(&mut self) {
        self.step += 1;
    }

    /// Update one tensor in place; `grad(i)` is the gradient of element `i`.
    pub fn update_with<F>(&self, params: &mut [f64], moments: &mut Moments, grad: F) -> Result<()>
    where
        F: Fn(usize) -> f64,
    {
        if params.len() != moments.len() {
            return Err(Error::Dimension {
                expected: moments.len(),
                actual: params.len(),
            });
        }
        assert!(self.step > 0, "begin_step must precede updates");
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let t = self.step as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);
        for (i, p) in params.iter_mut().enumerate() {
            let g = grad(i);
            if !g.is_finite() {
                return Err(Error::NonFinite(format!("gradient element {i} at step {t}")));
            }
            let m = &mut moments.first[i];
            let v = &mut moments.second[i];
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }

    pub fn update(&self, params: &mut [f64], moments: &mut Moments, grad: &[f64]) -> Result<()> {
        if grad.len() != params.len() {
            return Err(Error::Dimension {
                expected: params.len(),
                actual: grad.len(),
            });
        }
        self.update_with(params, moments, |i| grad[i])
    }
}
