//! Dense/convolutional numerics with hand-written forward and backward
//! passes, the squared hinge loss, dropout and Adam.

pub mod adam;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod init;
pub mod loss;
pub mod pool;

pub use adam::{adam_step, AdamState};
pub use dropout::{dropout_apply, DropoutMask};
pub use loss::{squared_hinge_loss, squared_hinge_row};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Spatial size of every convolution kernel.
pub const KERNEL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Dense,
    Conv5x5,
    MaxPool2x2,
}

impl LayerKind {
    pub(crate) fn code(self) -> u8 {
        match self {
            LayerKind::Dense => 0,
            LayerKind::Conv5x5 => 1,
            LayerKind::MaxPool2x2 => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(LayerKind::Dense),
            1 => Ok(LayerKind::Conv5x5),
            2 => Ok(LayerKind::MaxPool2x2),
            other => Err(Error::Format(format!("unknown layer kind code {other}"))),
        }
    }
}

/// Weights, bias and kind of one layer.
///
/// Dense weights are `out × in`; convolution weights are `K × C × 5 × 5`;
/// pooling layers carry empty tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub kind: LayerKind,
    pub weights: Tensor,
    pub bias: Tensor,
}

impl LayerParams {
    pub fn dense(weights: Tensor, bias: Tensor) -> Result<Self> {
        let p = Self {
            kind: LayerKind::Dense,
            weights,
            bias,
        };
        p.validate()?;
        Ok(p)
    }

    /// Dense layer from nested rows, mostly for tests and examples.
    pub fn dense_from_rows(rows: &[&[f64]], bias: &[f64]) -> Result<Self> {
        let out = rows.len();
        let fan_in = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(out * fan_in);
        for r in rows {
            if r.len() != fan_in {
                return Err(Error::dim("dense rows", &[fan_in], &[r.len()]));
            }
            data.extend_from_slice(r);
        }
        Self::dense(
            Tensor::new(vec![out, fan_in], data)?,
            Tensor::vector(bias.to_vec()),
        )
    }

    pub fn conv5x5(weights: Tensor, bias: Tensor) -> Result<Self> {
        let p = Self {
            kind: LayerKind::Conv5x5,
            weights,
            bias,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn maxpool() -> Self {
        Self {
            kind: LayerKind::MaxPool2x2,
            weights: Tensor::zeros(vec![0]),
            bias: Tensor::zeros(vec![0]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ws = self.weights.shape();
        match self.kind {
            LayerKind::Dense => {
                if ws.len() != 2 {
                    return Err(Error::dim("dense weight rank", &[2], &[ws.len()]));
                }
                if self.bias.shape() != [ws[0]] {
                    return Err(Error::dim("dense bias", &[ws[0]], self.bias.shape()));
                }
            }
            LayerKind::Conv5x5 => {
                if ws.len() != 4 || ws[2] != KERNEL || ws[3] != KERNEL {
                    return Err(Error::dim("conv kernel bank", &[0, 0, KERNEL, KERNEL], ws));
                }
                if self.bias.shape() != [ws[0]] {
                    return Err(Error::dim("conv bias", &[ws[0]], self.bias.shape()));
                }
            }
            LayerKind::MaxPool2x2 => {}
        }
        Ok(())
    }

    /// Output units (dense) or output channels (conv).
    pub fn out_dim(&self) -> usize {
        match self.kind {
            LayerKind::MaxPool2x2 => 0,
            _ => self.weights.shape()[0],
        }
    }

    /// Input units (dense) or input channels (conv).
    pub fn fan_in(&self) -> usize {
        match self.kind {
            LayerKind::MaxPool2x2 => 0,
            _ => self.weights.shape()[1],
        }
    }

    pub fn zero_grads(&self) -> LayerGrads {
        LayerGrads {
            weights: Tensor::zeros(self.weights.shape().to_vec()),
            bias: Tensor::zeros(self.bias.shape().to_vec()),
        }
    }
}

/// Accumulated parameter gradients for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl LayerGrads {
    pub fn clear(&mut self) {
        self.weights.fill(0.0);
        self.bias.fill(0.0);
    }
}
