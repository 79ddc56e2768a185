//! Glorot-uniform initialization, `U(±√(6/(fan_in+fan_out)))`, zero bias.
//!
//! Initial weights are rounded to `f32` so that checkpoints (stored as
//! 32-bit reals) reproduce a freshly initialized model exactly.

use rand::Rng;

use super::{LayerParams, KERNEL};
use crate::tensor::Tensor;

fn glorot(len: usize, fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..len)
        .map(|_| rng.random_range(-limit..limit) as f32 as f64)
        .collect()
}

pub fn glorot_dense(out: usize, fan_in: usize, rng: &mut impl Rng) -> LayerParams {
    let w = glorot(out * fan_in, fan_in, out, rng);
    LayerParams::dense(
        Tensor::new(vec![out, fan_in], w).expect("shape matches length"),
        Tensor::zeros(vec![out]),
    )
    .expect("valid dense shape")
}

pub fn glorot_conv(kernels: usize, channels: usize, rng: &mut impl Rng) -> LayerParams {
    let area = KERNEL * KERNEL;
    let w = glorot(
        kernels * channels * area,
        channels * area,
        kernels * area,
        rng,
    );
    LayerParams::conv5x5(
        Tensor::new(vec![kernels, channels, KERNEL, KERNEL], w).expect("shape matches length"),
        Tensor::zeros(vec![kernels]),
    )
    .expect("valid conv shape")
}
