use rand::Rng;

use crate::spiking::SpikeFrame;

/// Rate coding: each input fires independently with probability
/// `pixel/255`. Every call draws fresh randomness.
pub fn bernoulli_encode(pixels: &[u8], step_index: usize, rng: &mut impl Rng) -> SpikeFrame {
    let bits = pixels
        .iter()
        .map(|&p| match p {
            0 => false,
            255 => true,
            _ => rng.random::<f64>() < f64::from(p) / 255.0,
        })
        .collect();
    SpikeFrame::new(bits, step_index)
}
