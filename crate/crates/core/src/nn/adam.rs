//! Adam with bias correction.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    /// Name reported when a gradient turns non-finite.
    pub label: String,
    pub m: Tensor,
    pub v: Tensor,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zeroed moments with the default hyperparameters (0.9, 0.999, 1e-8).
    pub fn new(label: impl Into<String>, shape: &[usize]) -> Self {
        Self {
            label: label.into(),
            m: Tensor::zeros(shape.to_vec()),
            v: Tensor::zeros(shape.to_vec()),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

pub fn adam_step(param: &mut Tensor, grad: &Tensor, state: &mut AdamState, lr: f64) -> Result<()> {
    grad.expect_shape("adam gradient", param.shape())?;
    state.m.expect_shape("adam first moment", param.shape())?;
    state.v.expect_shape("adam second moment", param.shape())?;
    if lr.is_nan() || lr <= 0.0 {
        return Err(Error::Validation(format!("learning rate {lr} must be > 0")));
    }
    if !grad.all_finite() {
        return Err(Error::NonFinite(format!("gradient of {}", state.label)));
    }
    state.step += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.step as i32);
    let c2 = 1.0 - b2.powi(state.step as i32);
    let m = state.m.data_mut();
    let v = state.v.data_mut();
    for (((p, &g), m), v) in param.data_mut().iter_mut().zip(grad.data()).zip(m).zip(v) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}
