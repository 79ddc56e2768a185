//! Shared fixtures for the benchmarks.

use dtsnn::model::{Network, NeuronModel};
use dtsnn::spiking::SpikeFrame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Glorot-initialised dense network with weights scaled by `gain`.
pub fn network(sizes: &[usize], neuron: NeuronModel, gain: f64, seed: u64) -> Network {
    let mut r = rng(seed);
    let mut net = Network::dense("bench", neuron, sizes, 1.0, &mut r).expect("valid sizes");
    for l in &mut net.layers {
        for w in l.weights.data_mut() {
            *w *= gain;
        }
    }
    net
}

/// `steps` frames of `width` inputs, each active with probability `p`.
pub fn frames(width: usize, steps: usize, p: f64, seed: u64) -> Vec<SpikeFrame> {
    let mut r = rng(seed);
    (0..steps)
        .map(|t| SpikeFrame::new((0..width).map(|_| r.random::<f64>() < p).collect(), t))
        .collect()
}
