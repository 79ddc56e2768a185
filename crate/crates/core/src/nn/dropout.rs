//! Inverted dropout: survivors are scaled by `1/(1 − ratio)` while
//! training, so evaluation is the identity.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Per-element keep mask and the probability it was drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    pub keep_prob: f64,
    pub mask: Vec<bool>,
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::Validation(format!(
            "dropout ratio {ratio} outside [0, 1)"
        )));
    }
    Ok(())
}

impl DropoutMask {
    pub fn identity(len: usize) -> Self {
        Self {
            keep_prob: 1.0,
            mask: vec![true; len],
        }
    }

    /// Draws a training mask; a zero ratio consumes no randomness.
    pub fn sample(len: usize, ratio: f64, rng: &mut impl Rng) -> Result<Self> {
        check_ratio(ratio)?;
        if ratio == 0.0 {
            return Ok(Self::identity(len));
        }
        let keep_prob = 1.0 - ratio;
        let mask = (0..len).map(|_| rng.random::<f64>() < keep_prob).collect();
        Ok(Self { keep_prob, mask })
    }

    /// Scales kept entries by `1/keep_prob` and zeroes the rest, in place.
    /// The same call applies the mask to a gradient on the way back.
    pub fn apply(&self, values: &mut [f64]) {
        if self.keep_prob == 1.0 {
            return;
        }
        let scale = 1.0 / self.keep_prob;
        for (v, &keep) in values.iter_mut().zip(&self.mask) {
            *v = if keep { *v * scale } else { 0.0 };
        }
    }
}

pub fn dropout_apply(
    input: &Tensor,
    ratio: f64,
    rng: &mut impl Rng,
    training: bool,
) -> Result<Tensor> {
    check_ratio(ratio)?;
    let mut out = input.clone();
    if training {
        DropoutMask::sample(input.len(), ratio, rng)?.apply(out.data_mut());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_ratio_and_eval_are_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Tensor::vector(vec![1.0, -2.0, 0.5]);
        assert_eq!(dropout_apply(&x, 0.0, &mut rng, true).unwrap(), x);
        assert_eq!(dropout_apply(&x, 0.7, &mut rng, false).unwrap(), x);
    }

    #[test]
    fn ratio_one_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(dropout_apply(&Tensor::vector(vec![1.0]), 1.0, &mut rng, true).is_err());
    }

    #[test]
    fn monte_carlo_survival_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let x = Tensor::filled(vec![n], 1.0);
        let y = dropout_apply(&x, 0.2, &mut rng, true).unwrap();
        let survivors = y.data().iter().filter(|&&v| v != 0.0).count() as f64 / n as f64;
        assert!((survivors - 0.8).abs() <= 0.01, "{survivors}");
        let mean = y.data().iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() <= 0.02, "{mean}");
    }
}
