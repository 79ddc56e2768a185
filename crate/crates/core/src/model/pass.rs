//! Network-level forward and backward passes.
//!
//! DC: every layer but the last fires; the last dense layer returns its raw
//! potentials. CT: every layer fires and keeps its membrane across steps;
//! the backward pass is BPTT over the recorded tape.
//!
//! `masks[i]`, when given, is the dropout mask applied to the input of
//! layer `i`. CT callers reuse one mask set for all steps of a sequence.

use super::network::Network;
use crate::error::{Error, Result};
use crate::nn::pool::{self, Pooled};
use crate::nn::{conv, dense, DropoutMask, LayerGrads, LayerKind};
use crate::spiking::{
    ct_step, snn_ct_backward_step, ste_gradient, CtLayerTape, Firing, NeuronState, SteConfig,
};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
enum DcEntry {
    Dense {
        input: Vec<f64>,
        v: Vec<f64>,
    },
    Conv {
        input: Tensor,
        v: Tensor,
    },
    Pool {
        pooled: Pooled,
        input_shape: Vec<usize>,
    },
}

/// Forward caches of one DC pass.
#[derive(Debug, Clone, Default)]
pub struct DcTape {
    entries: Vec<DcEntry>,
}

impl DcTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_masks(net: &Network, masks: Option<&[DropoutMask]>) -> Result<()> {
    if let Some(m) = masks {
        if m.len() != net.layers.len() {
            return Err(Error::dim(
                "dropout masks per layer",
                &[net.layers.len()],
                &[m.len()],
            ));
        }
    }
    Ok(())
}

/// One single-step DC pass; returns the output-layer potentials.
pub fn dc_forward(
    net: &Network,
    input: &[f64],
    masks: Option<&[DropoutMask]>,
    firing: Firing,
    mut tape: Option<&mut DcTape>,
) -> Result<Vec<f64>> {
    if input.len() != net.input_len() {
        return Err(Error::dim(
            "network input",
            &net.input_shape,
            &[input.len()],
        ));
    }
    check_masks(net, masks)?;
    if let Some(t) = tape.as_deref_mut() {
        t.clear();
    }
    let last = net.layers.len() - 1;
    let mut shape = net.input_shape.clone();
    let mut x = input.to_vec();
    for (i, layer) in net.layers.iter().enumerate() {
        if let Some(m) = masks {
            m[i].apply(&mut x);
        }
        let (next, entry) = match layer.kind {
            LayerKind::Dense => {
                let v = dense::forward(layer, &x)?;
                shape = vec![v.len()];
                if i == last {
                    (v.clone(), DcEntry::Dense { input: x, v })
                } else {
                    let a = v.iter().map(|&p| firing.fire(p, net.theta)).collect();
                    (a, DcEntry::Dense { input: x, v })
                }
            }
            LayerKind::Conv5x5 => {
                let input = Tensor::new(shape.clone(), x)?;
                let v = conv::forward(layer, &input)?;
                shape = v.shape().to_vec();
                let a = v
                    .data()
                    .iter()
                    .map(|&p| firing.fire(p, net.theta))
                    .collect();
                (a, DcEntry::Conv { input, v })
            }
            LayerKind::MaxPool2x2 => {
                let input = Tensor::new(shape.clone(), x)?;
                let pooled = pool::forward(&input)?;
                shape = pooled.output.shape().to_vec();
                let a = pooled.output.data().to_vec();
                let input_shape = input.shape().to_vec();
                (
                    a,
                    DcEntry::Pool {
                        pooled,
                        input_shape,
                    },
                )
            }
        };
        if let Some(t) = tape.as_deref_mut() {
            t.entries.push(entry);
        }
        x = next;
    }
    Ok(x)
}

/// STE backward of a DC pass given `dL/d(output potentials)`; accumulates
/// into `grads` (one entry per layer).
pub fn dc_backward(
    net: &Network,
    tape: &DcTape,
    grad_out: &[f64],
    masks: Option<&[DropoutMask]>,
    grads: &mut [LayerGrads],
) -> Result<()> {
    if tape.entries.len() != net.layers.len() {
        return Err(Error::State(format!(
            "tape holds {} layers, network has {}",
            tape.entries.len(),
            net.layers.len()
        )));
    }
    if grads.len() != net.layers.len() {
        return Err(Error::dim(
            "gradient buffers",
            &[net.layers.len()],
            &[grads.len()],
        ));
    }
    check_masks(net, masks)?;
    let last = net.layers.len() - 1;
    let mut g = grad_out.to_vec();
    for i in (0..=last).rev() {
        let layer = &net.layers[i];
        let want = i > 0;
        let gin = match &tape.entries[i] {
            DcEntry::Dense { input, v } => {
                if g.len() != v.len() {
                    return Err(Error::dim("dense output gradient", &[v.len()], &[g.len()]));
                }
                if i != last {
                    for (gk, &vk) in g.iter_mut().zip(v) {
                        *gk *= ste_gradient(vk);
                    }
                }
                dense::backward(layer, input, &g, Some(&mut grads[i]), want)?
            }
            DcEntry::Conv { input, v } => {
                let mut up = Tensor::new(v.shape().to_vec(), g)?;
                for (gk, &vk) in up.data_mut().iter_mut().zip(v.data()) {
                    *gk *= ste_gradient(vk);
                }
                conv::backward(layer, input, &up, Some(&mut grads[i]), want)?.map(Tensor::into_data)
            }
            DcEntry::Pool {
                pooled,
                input_shape,
            } => {
                let up = Tensor::new(pooled.output.shape().to_vec(), g)?;
                Some(pool::backward(pooled, &up, input_shape)?.into_data())
            }
        };
        match gin {
            Some(mut next) if i > 0 => {
                if let Some(m) = masks {
                    m[i].apply(&mut next);
                }
                g = next;
            }
            _ => break,
        }
    }
    Ok(())
}

/// Forward caches of one CT sequence, one tape per layer.
#[derive(Debug, Clone, Default)]
pub struct CtTape {
    pub layers: Vec<CtLayerTape>,
}

impl CtTape {
    pub fn new(layers: usize) -> Self {
        Self {
            layers: vec![CtLayerTape::new(); layers],
        }
    }

    pub fn steps(&self) -> usize {
        self.layers.first().map_or(0, CtLayerTape::len)
    }
}

/// Runs a CT network over `frames` from a zero state and returns the output
/// spikes of every step.
pub fn ct_forward(
    net: &Network,
    frames: &[Vec<f64>],
    masks: Option<&[DropoutMask]>,
    firing: Firing,
    mut tape: Option<&mut CtTape>,
) -> Result<Vec<Vec<f64>>> {
    if !net.is_dense_only() {
        return Err(Error::Config(
            "continuous-integration models are dense-only".into(),
        ));
    }
    check_masks(net, masks)?;
    if let Some(t) = tape.as_deref_mut() {
        *t = CtTape::new(net.layers.len());
    }
    let mut states = net
        .layers
        .iter()
        .map(|l| NeuronState::new(l.out_dim(), net.theta))
        .collect::<Result<Vec<_>>>()?;
    let mut outputs = Vec::with_capacity(frames.len());
    for frame in frames {
        if frame.len() != net.input_len() {
            return Err(Error::dim("ct frame", &net.input_shape, &[frame.len()]));
        }
        let mut x = frame.clone();
        for (i, layer) in net.layers.iter().enumerate() {
            if let Some(m) = masks {
                m[i].apply(&mut x);
            }
            let lt = tape.as_deref_mut().map(|t| &mut t.layers[i]);
            x = ct_step(layer, &x, &mut states[i], firing, lt)?;
        }
        outputs.push(x);
    }
    Ok(outputs)
}

/// BPTT through a recorded CT sequence given `dL/d spike_out(t)` for every
/// step; accumulates into `grads`.
pub fn ct_backward(
    net: &Network,
    tape: &CtTape,
    grad_out: &[Vec<f64>],
    cfg: &SteConfig,
    masks: Option<&[DropoutMask]>,
    grads: &mut [LayerGrads],
) -> Result<()> {
    if tape.layers.len() != net.layers.len() {
        return Err(Error::State(format!(
            "tape holds {} layers, network has {}",
            tape.layers.len(),
            net.layers.len()
        )));
    }
    if grad_out.len() != tape.steps() {
        return Err(Error::dim(
            "ct output gradients per step",
            &[tape.steps()],
            &[grad_out.len()],
        ));
    }
    if grads.len() != net.layers.len() {
        return Err(Error::dim(
            "gradient buffers",
            &[net.layers.len()],
            &[grads.len()],
        ));
    }
    check_masks(net, masks)?;
    let mut carries: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.out_dim()]).collect();
    for t in (0..grad_out.len()).rev() {
        let mut gs = grad_out[t].clone();
        for i in (0..net.layers.len()).rev() {
            let r = snn_ct_backward_step(
                &tape.layers[i],
                t,
                &gs,
                &carries[i],
                &net.layers[i],
                cfg,
                Some(&mut grads[i]),
                i > 0,
            )?;
            carries[i] = r.v_post_prev;
            if let Some(mut gin) = r.input {
                if let Some(m) = masks {
                    m[i].apply(&mut gin);
                }
                gs = gin;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NeuronModel;
    use crate::nn::init::{glorot_conv, glorot_dense};
    use crate::nn::LayerParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }

    fn perturb(net: &Network, layer: usize, bias: bool, k: usize, h: f64) -> Network {
        let mut n = net.clone();
        let t = if bias {
            &mut n.layers[layer].bias
        } else {
            &mut n.layers[layer].weights
        };
        t.data_mut()[k] += h;
        n
    }

    fn fd_check(net: &Network, loss: impl Fn(&Network) -> f64, grads: &[LayerGrads], tol: f64) {
        let h = 1e-6;
        for (li, g) in grads.iter().enumerate() {
            for (bias, analytic) in [(false, g.weights.data()), (true, g.bias.data())] {
                for (k, &a) in analytic.iter().enumerate() {
                    let fd = (loss(&perturb(net, li, bias, k, h))
                        - loss(&perturb(net, li, bias, k, -h)))
                        / (2.0 * h);
                    assert!(
                        rel(fd, a) < tol,
                        "layer {li} bias={bias} k={k}: fd {fd} vs {a}"
                    );
                }
            }
        }
    }

    fn randomize_bias(net: &mut Network, rng: &mut ChaCha8Rng) {
        for l in &mut net.layers {
            for b in l.bias.data_mut() {
                *b = rng.random_range(0.2..1.2);
            }
        }
    }

    #[test]
    fn dc_surrogate_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layers = vec![
            glorot_conv(2, 1, &mut rng),
            LayerParams::maxpool(),
            glorot_dense(5, 2 * 2 * 2, &mut rng),
            glorot_dense(3, 5, &mut rng),
        ];
        let mut net = Network::new("t", NeuronModel::Dc, vec![1, 8, 8], 1.0, layers).unwrap();
        randomize_bias(&mut net, &mut rng);
        for w in net.layers[0].weights.data_mut() {
            *w *= 3.0;
        }
        let x: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut masks = vec![DropoutMask::identity(0); net.layers.len()];
        masks[2] = DropoutMask::sample(8, 0.25, &mut rng).unwrap();
        let c = [0.7, -1.1, 0.4];
        let loss = |n: &Network| -> f64 {
            let y = dc_forward(n, &x, Some(&masks), Firing::Surrogate, None).unwrap();
            y.iter().zip(&c).map(|(a, b)| a * b).sum()
        };
        let mut tape = DcTape::new();
        dc_forward(&net, &x, Some(&masks), Firing::Surrogate, Some(&mut tape)).unwrap();
        let mut grads: Vec<_> = net.layers.iter().map(LayerParams::zero_grads).collect();
        dc_backward(&net, &tape, &c, Some(&masks), &mut grads).unwrap();
        assert!(grads[0].weights.data().iter().any(|&g| g != 0.0));
        fd_check(&net, loss, &grads, 1e-4);
    }

    #[test]
    fn dc_zero_model_outputs_zero() {
        let layers = vec![
            LayerParams::dense(Tensor::zeros(vec![4, 6]), Tensor::zeros(vec![4])).unwrap(),
            LayerParams::dense(Tensor::zeros(vec![2, 4]), Tensor::zeros(vec![2])).unwrap(),
        ];
        let net = Network::new("z", NeuronModel::Dc, vec![6], 1.0, layers).unwrap();
        let y = dc_forward(&net, &[1.0; 6], None, Firing::Binary, None).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn ct_bptt_matches_finite_differences_on_surrogate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = Network::dense("t", NeuronModel::Ct, &[4, 3, 3], 1.0, &mut rng).unwrap();
        randomize_bias(&mut net, &mut rng);
        for l in &mut net.layers {
            for w in l.weights.data_mut() {
                *w *= 2.0;
            }
        }
        let frames: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..4).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let c = [[0.5, -0.8, 1.3], [-0.2, 0.9, 0.6]];
        let loss = |n: &Network| -> f64 {
            let out = ct_forward(n, &frames, None, Firing::Surrogate, None).unwrap();
            out.iter()
                .zip(&c)
                .map(|(o, c)| o.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                .sum()
        };
        for reset in [
            crate::spiking::ResetGrad::Ste,
            crate::spiking::ResetGrad::Detached,
        ] {
            let cfg = SteConfig::new(1.0, reset).unwrap();
            let mut tape = CtTape::default();
            ct_forward(&net, &frames, None, Firing::Surrogate, Some(&mut tape)).unwrap();
            let gout: Vec<Vec<f64>> = c.iter().map(|r| r.to_vec()).collect();
            let mut grads: Vec<_> = net.layers.iter().map(LayerParams::zero_grads).collect();
            ct_backward(&net, &tape, &gout, &cfg, None, &mut grads).unwrap();
            if reset == crate::spiking::ResetGrad::Ste {
                fd_check(&net, loss, &grads, 1e-4);
            }
        }
    }

    #[test]
    fn ct_zero_input_zero_model_never_fires() {
        let layers = vec![
            LayerParams::dense(Tensor::zeros(vec![3, 5]), Tensor::zeros(vec![3])).unwrap(),
            LayerParams::dense(Tensor::zeros(vec![2, 3]), Tensor::zeros(vec![2])).unwrap(),
        ];
        let net = Network::new("z", NeuronModel::Ct, vec![5], 1.0, layers).unwrap();
        let out = ct_forward(&net, &vec![vec![0.0; 5]; 16], None, Firing::Binary, None).unwrap();
        assert!(out.iter().flatten().all(|&s| s == 0.0));
    }

    #[test]
    fn ct_backward_without_tape_steps_is_state_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Network::dense("t", NeuronModel::Ct, &[2, 2], 1.0, &mut rng).unwrap();
        let mut grads: Vec<_> = net.layers.iter().map(LayerParams::zero_grads).collect();
        let err = ct_backward(
            &net,
            &CtTape::new(1),
            &[vec![1.0, 1.0]],
            &SteConfig::default(),
            None,
            &mut grads,
        );
        assert!(err.is_err());
    }
}
