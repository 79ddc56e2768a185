//! 2×2 max pooling with stride 2.
//!
//! Ties route the gradient to the first maximum in row-major window order.
//! On binary spike maps the forward pass is a logical OR of each window.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Pooled output plus, per output element, the flat input index that won.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub output: Tensor,
    pub argmax: Vec<usize>,
}

pub fn forward(input: &Tensor) -> Result<Pooled> {
    let s = input.shape();
    if s.len() != 3 || s[1] % 2 != 0 || s[2] % 2 != 0 {
        return Err(Error::dim(
            "maxpool input (K×H×W, H and W even)",
            &[0, 2, 2],
            s,
        ));
    }
    let (k, h, w) = (s[0], s[1], s[2]);
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = Vec::with_capacity(k * oh * ow);
    let mut argmax = Vec::with_capacity(k * oh * ow);
    for c in 0..k {
        for oy in 0..oh {
            for ox in 0..ow {
                let base = c * h * w + 2 * oy * w + 2 * ox;
                let window = [base, base + 1, base + w, base + w + 1];
                let mut best = window[0];
                for &idx in &window[1..] {
                    if x[idx] > x[best] {
                        best = idx;
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    Ok(Pooled {
        output: Tensor::new(vec![k, oh, ow], out)?,
        argmax,
    })
}

/// Routes each upstream element to its recorded argmax position.
pub fn backward(pooled: &Pooled, upstream: &Tensor, input_shape: &[usize]) -> Result<Tensor> {
    upstream.expect_shape("maxpool upstream gradient", pooled.output.shape())?;
    let mut gin = Tensor::zeros(input_shape.to_vec());
    let g = gin.data_mut();
    for (&idx, &up) in pooled.argmax.iter().zip(upstream.data()) {
        g[idx] += up;
    }
    Ok(gin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn window(v: [f64; 4]) -> Pooled {
        forward(&Tensor::new(vec![1, 2, 2], v.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn single_max_routes_to_it() {
        let p = window([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.output.data(), &[1.0]);
        let g = backward(&p, &Tensor::filled(vec![1, 1, 1], 1.0), &[1, 2, 2]).unwrap();
        assert_eq!(g.data(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn all_zero_window() {
        assert_eq!(window([0.0; 4]).output.data(), &[0.0]);
    }

    #[test]
    fn tie_goes_to_lowest_row_major_index() {
        let p = window([0.2, 0.9, 0.9, 0.1]);
        assert_eq!(p.output.data(), &[0.9]);
        assert_eq!(p.argmax, vec![1]);
    }

    #[test]
    fn odd_dims_rejected() {
        assert!(forward(&Tensor::zeros(vec![1, 3, 4])).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        // distinct values so the argmax is stable under a small nudge
        let x: Vec<f64> = (0..16).map(|i| ((i * 7) % 16) as f64 * 0.1).collect();
        let input = Tensor::new(vec![1, 4, 4], x).unwrap();
        let c = [0.3, -1.2, 0.7, 2.0];
        let loss = |t: &Tensor| -> f64 {
            forward(t)
                .unwrap()
                .output
                .data()
                .iter()
                .zip(&c)
                .map(|(a, b)| a * b)
                .sum()
        };
        let p = forward(&input).unwrap();
        let g = backward(
            &p,
            &Tensor::new(vec![1, 2, 2], c.to_vec()).unwrap(),
            &[1, 4, 4],
        )
        .unwrap();
        let h = 1e-6;
        for k in 0..16 {
            let mut hi = input.clone();
            hi.data_mut()[k] += h;
            let mut lo = input.clone();
            lo.data_mut()[k] -= h;
            let fd = (loss(&hi) - loss(&lo)) / (2.0 * h);
            assert!((fd - g.data()[k]).abs() <= 1e-4 * fd.abs().max(1e-8) + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn binary_pooling_is_or(bits in proptest::collection::vec(any::<bool>(), 2 * 4 * 6)) {
            let x: Vec<f64> = bits.iter().map(|&b| b as u8 as f64).collect();
            let p = forward(&Tensor::new(vec![2, 4, 6], x).unwrap()).unwrap();
            for c in 0..2 {
                for oy in 0..2 {
                    for ox in 0..3 {
                        let at = |y: usize, xx: usize| bits[c * 24 + y * 6 + xx];
                        let or = at(2 * oy, 2 * ox) || at(2 * oy, 2 * ox + 1)
                            || at(2 * oy + 1, 2 * ox) || at(2 * oy + 1, 2 * ox + 1);
                        prop_assert_eq!(p.output.data()[c * 6 + oy * 3 + ox], or as u8 as f64);
                    }
                }
            }
        }
    }
}
