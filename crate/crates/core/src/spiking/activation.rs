use crate::error::{Error, Result};

/// `1` iff `x > theta` (strict), else `0`.
#[inline]
pub fn binary_activation(x: f64, theta: f64) -> bool {
    x > theta
}

/// Straight-through gradient of the step at θ = 1: `0.5` on `[0, 2]`
/// (both ends included), `0` elsewhere.
#[inline]
pub fn ste_gradient(x: f64) -> f64 {
    if (0.0..=2.0).contains(&x) {
        0.5
    } else {
        0.0
    }
}

/// `clip(x/2, 0, 1)`; its derivative is [`ste_gradient`] almost everywhere.
#[inline]
pub fn hard_sigmoid(x: f64) -> f64 {
    (x / 2.0).clamp(0.0, 1.0)
}

/// Forward nonlinearity of a spiking layer.
///
/// `Surrogate` swaps the step for [`hard_sigmoid`]; the backward rules are
/// unchanged, so gradients of the surrogate network can be checked against
/// finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Firing {
    #[default]
    Binary,
    Surrogate,
}

impl Firing {
    #[inline]
    pub fn fire(self, v: f64, theta: f64) -> f64 {
        match self {
            Firing::Binary => {
                if binary_activation(v, theta) {
                    1.0
                } else {
                    0.0
                }
            }
            Firing::Surrogate => hard_sigmoid(v),
        }
    }
}

/// Gradient treatment of the `−θ·spike` reset term in CT backpropagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResetGrad {
    /// `∂v/∂v⁻ = 1 − θ·g(v⁻)`.
    #[default]
    Ste,
    /// `∂v/∂v⁻ = 1`.
    Detached,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteConfig {
    pub theta: f64,
    pub reset_grad: ResetGrad,
}

impl SteConfig {
    pub fn new(theta: f64, reset_grad: ResetGrad) -> Result<Self> {
        if theta.is_nan() || theta <= 0.0 {
            return Err(Error::Validation(format!("threshold {theta} must be > 0")));
        }
        Ok(Self { theta, reset_grad })
    }
}

impl Default for SteConfig {
    fn default() -> Self {
        Self {
            theta: 1.0,
            reset_grad: ResetGrad::Ste,
        }
    }
}
