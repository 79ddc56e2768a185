//! Squared hinge loss over ±1 targets.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Per-row squared hinge: returns `scale·Σ_c max(0, 1 − t·y)²` and writes
/// `scale·(−2t·max(0, 1 − t·y))` into `grad`.
pub fn squared_hinge_row(logits: &[f64], targets: &[f64], scale: f64, grad: &mut [f64]) -> f64 {
    let mut loss = 0.0;
    for ((&y, &t), g) in logits.iter().zip(targets).zip(grad.iter_mut()) {
        let margin = (1.0 - t * y).max(0.0);
        loss += margin * margin;
        *g = scale * (-2.0 * t * margin);
    }
    scale * loss
}

/// Mean over `N` rows of the summed per-class squared hinge loss.
pub fn squared_hinge_loss(logits: &Tensor, targets: &Tensor) -> Result<(f64, Tensor)> {
    if logits.shape() != targets.shape() || logits.shape().len() != 2 {
        return Err(Error::dim(
            "hinge logits vs targets (N×C)",
            targets.shape(),
            logits.shape(),
        ));
    }
    if let Some(bad) = targets.data().iter().find(|&&t| t != 1.0 && t != -1.0) {
        return Err(Error::Validation(format!("hinge target {bad} is not ±1")));
    }
    let (n, c) = (logits.shape()[0], logits.shape()[1]);
    let scale = 1.0 / n as f64;
    let mut grad = Tensor::zeros(vec![n, c]);
    let mut loss = 0.0;
    for row in 0..n {
        let span = row * c..(row + 1) * c;
        loss += squared_hinge_row(
            &logits.data()[span.clone()],
            &targets.data()[span.clone()],
            scale,
            &mut grad.data_mut()[span],
        );
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(y: f64, t: f64) -> (f64, f64) {
        let (l, g) = squared_hinge_loss(
            &Tensor::new(vec![1, 1], vec![y]).unwrap(),
            &Tensor::new(vec![1, 1], vec![t]).unwrap(),
        )
        .unwrap();
        (l, g.data()[0])
    }

    #[test]
    fn satisfied_margin() {
        assert_eq!(single(2.0, 1.0), (0.0, 0.0));
    }

    #[test]
    fn zero_logit() {
        assert_eq!(single(0.0, 1.0).0, 1.0);
    }

    #[test]
    fn wrong_side() {
        assert_eq!(single(1.0, -1.0), (4.0, 4.0));
    }

    #[test]
    fn mean_over_rows() {
        let y = Tensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap();
        let t = Tensor::new(vec![2, 1], vec![-1.0, -1.0]).unwrap();
        let (l, g) = squared_hinge_loss(&y, &t).unwrap();
        assert_eq!(l, 4.0);
        assert_eq!(g.data(), &[2.0, 2.0]);
    }

    #[test]
    fn rejects_non_pm_one_targets() {
        let y = Tensor::zeros(vec![1, 2]);
        let t = Tensor::new(vec![1, 2], vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            squared_hinge_loss(&y, &t),
            Err(Error::Validation(_))
        ));
    }

    proptest! {
        #[test]
        fn nonnegative_and_zero_iff_margins_hold(
            y in proptest::collection::vec(-3.0f64..3.0, 6),
            signs in proptest::collection::vec(any::<bool>(), 6),
        ) {
            let t: Vec<f64> = signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
            let (l, _) = squared_hinge_loss(
                &Tensor::new(vec![2, 3], y.clone()).unwrap(),
                &Tensor::new(vec![2, 3], t.clone()).unwrap(),
            ).unwrap();
            prop_assert!(l >= 0.0);
            let all_hold = y.iter().zip(&t).all(|(y, t)| t * y >= 1.0);
            prop_assert_eq!(l == 0.0, all_hold);
        }
    }
}
