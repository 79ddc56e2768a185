//! Valid (unpadded) 5×5 cross-correlation with per-channel bias.

use super::{LayerGrads, LayerKind, LayerParams, KERNEL};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

struct Dims {
    kernels: usize,
    channels: usize,
    h: usize,
    w: usize,
    oh: usize,
    ow: usize,
}

fn dims(params: &LayerParams, input: &Tensor) -> Result<Dims> {
    if params.kind != LayerKind::Conv5x5 {
        return Err(Error::Validation(format!(
            "conv operation on a {:?} layer",
            params.kind
        )));
    }
    let ws = params.weights.shape();
    let s = input.shape();
    if s.len() != 3 || s[0] != ws[1] {
        return Err(Error::dim("conv input (C×H×W)", &[ws[1], 0, 0], s));
    }
    if s[1] < KERNEL || s[2] < KERNEL {
        return Err(Error::dim(
            "conv input spatial size",
            &[ws[1], KERNEL, KERNEL],
            s,
        ));
    }
    Ok(Dims {
        kernels: ws[0],
        channels: ws[1],
        h: s[1],
        w: s[2],
        oh: s[1] - KERNEL + 1,
        ow: s[2] - KERNEL + 1,
    })
}

pub fn output_shape(params: &LayerParams, input: &Tensor) -> Result<Vec<usize>> {
    let d = dims(params, input)?;
    Ok(vec![d.kernels, d.oh, d.ow])
}

pub fn forward(params: &LayerParams, input: &Tensor) -> Result<Tensor> {
    let d = dims(params, input)?;
    let x = input.data();
    let wt = params.weights.data();
    let mut out = vec![0.0; d.kernels * d.oh * d.ow];
    for k in 0..d.kernels {
        let plane = &mut out[k * d.oh * d.ow..(k + 1) * d.oh * d.ow];
        plane.fill(params.bias.data()[k]);
        for c in 0..d.channels {
            let xin = &x[c * d.h * d.w..(c + 1) * d.h * d.w];
            let kern = &wt[(k * d.channels + c) * KERNEL * KERNEL..][..KERNEL * KERNEL];
            for oy in 0..d.oh {
                for ox in 0..d.ow {
                    let mut acc = 0.0;
                    for ky in 0..KERNEL {
                        let row = &xin[(oy + ky) * d.w + ox..][..KERNEL];
                        let krow = &kern[ky * KERNEL..][..KERNEL];
                        for (a, b) in row.iter().zip(krow) {
                            acc += a * b;
                        }
                    }
                    plane[oy * d.ow + ox] += acc;
                }
            }
        }
    }
    Tensor::new(vec![d.kernels, d.oh, d.ow], out)
}

/// Accumulates kernel/bias gradients into `grads` and returns the input
/// gradient when `want_input_grad` is set.
pub fn backward(
    params: &LayerParams,
    input: &Tensor,
    upstream: &Tensor,
    grads: Option<&mut LayerGrads>,
    want_input_grad: bool,
) -> Result<Option<Tensor>> {
    let d = dims(params, input)?;
    upstream.expect_shape("conv upstream gradient", &[d.kernels, d.oh, d.ow])?;
    let x = input.data();
    let g = upstream.data();
    if let Some(grads) = grads {
        let gw = grads.weights.data_mut();
        for k in 0..d.kernels {
            let gplane = &g[k * d.oh * d.ow..(k + 1) * d.oh * d.ow];
            for c in 0..d.channels {
                let xin = &x[c * d.h * d.w..(c + 1) * d.h * d.w];
                let gk = &mut gw[(k * d.channels + c) * KERNEL * KERNEL..][..KERNEL * KERNEL];
                for oy in 0..d.oh {
                    for ox in 0..d.ow {
                        let go = gplane[oy * d.ow + ox];
                        if go == 0.0 {
                            continue;
                        }
                        for ky in 0..KERNEL {
                            let row = &xin[(oy + ky) * d.w + ox..][..KERNEL];
                            for (kx, xv) in row.iter().enumerate() {
                                gk[ky * KERNEL + kx] += go * xv;
                            }
                        }
                    }
                }
            }
            grads.bias.data_mut()[k] += gplane.iter().sum::<f64>();
        }
    }
    if !want_input_grad {
        return Ok(None);
    }
    let wt = params.weights.data();
    let mut gin = vec![0.0; d.channels * d.h * d.w];
    for k in 0..d.kernels {
        let gplane = &g[k * d.oh * d.ow..(k + 1) * d.oh * d.ow];
        for c in 0..d.channels {
            let kern = &wt[(k * d.channels + c) * KERNEL * KERNEL..][..KERNEL * KERNEL];
            let gi = &mut gin[c * d.h * d.w..(c + 1) * d.h * d.w];
            for oy in 0..d.oh {
                for ox in 0..d.ow {
                    let go = gplane[oy * d.ow + ox];
                    if go == 0.0 {
                        continue;
                    }
                    for ky in 0..KERNEL {
                        for kx in 0..KERNEL {
                            gi[(oy + ky) * d.w + ox + kx] += kern[ky * KERNEL + kx] * go;
                        }
                    }
                }
            }
        }
    }
    Ok(Some(Tensor::new(vec![d.channels, d.h, d.w], gin)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init::glorot_conv;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_input_gives_broadcast_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = glorot_conv(3, 2, &mut rng);
        p.bias = Tensor::vector(vec![0.5, -1.0, 2.0]);
        let y = forward(&p, &Tensor::zeros(vec![2, 7, 6])).unwrap();
        assert_eq!(y.shape(), &[3, 3, 2]);
        for k in 0..3 {
            assert!(y.data()[k * 6..(k + 1) * 6]
                .iter()
                .all(|&v| v == p.bias.data()[k]));
        }
    }

    #[test]
    fn ones_kernel_sums_window() {
        let p = LayerParams::conv5x5(
            Tensor::filled(vec![1, 1, 5, 5], 1.0),
            Tensor::zeros(vec![1]),
        )
        .unwrap();
        let y = forward(&p, &Tensor::filled(vec![1, 5, 5], 1.0)).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1]);
        assert_eq!(y.data(), &[25.0]);
    }

    #[test]
    fn rejects_small_input() {
        let p =
            LayerParams::conv5x5(Tensor::zeros(vec![1, 1, 5, 5]), Tensor::zeros(vec![1])).unwrap();
        assert!(matches!(
            forward(&p, &Tensor::zeros(vec![1, 4, 9])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn kernel_and_input_gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = glorot_conv(2, 1, &mut rng);
        let x = Tensor::new(
            vec![1, 8, 8],
            (0..64).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let c: Vec<f64> = (0..2 * 4 * 4)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let loss = |p: &LayerParams, x: &Tensor| -> f64 {
            forward(p, x)
                .unwrap()
                .data()
                .iter()
                .zip(&c)
                .map(|(a, b)| a * b)
                .sum()
        };
        let up = Tensor::new(vec![2, 4, 4], c.clone()).unwrap();
        let mut grads = p.zero_grads();
        let gin = backward(&p, &x, &up, Some(&mut grads), true)
            .unwrap()
            .unwrap();
        let h = 1e-6;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-8);
        for k in 0..p.weights.len() {
            let mut hi = p.clone();
            hi.weights.data_mut()[k] += h;
            let mut lo = p.clone();
            lo.weights.data_mut()[k] -= h;
            let fd = (loss(&hi, &x) - loss(&lo, &x)) / (2.0 * h);
            assert!(rel(fd, grads.weights.data()[k]) < 1e-4, "kernel {k}");
        }
        for k in 0..64 {
            let mut hi = x.clone();
            hi.data_mut()[k] += h;
            let mut lo = x.clone();
            lo.data_mut()[k] -= h;
            let fd = (loss(&p, &hi) - loss(&p, &lo)) / (2.0 * h);
            assert!(rel(fd, gin.data()[k]) < 1e-4, "input {k}");
        }
        let total: f64 = c[..16].iter().sum();
        assert!((grads.bias.data()[0] - total).abs() < 1e-12);
    }
}
