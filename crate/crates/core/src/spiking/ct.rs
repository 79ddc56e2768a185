use super::activation::{ste_gradient, Firing, ResetGrad, SteConfig};
use super::frame::SpikeFrame;
use crate::error::{Error, Result};
use crate::nn::{dense, LayerGrads, LayerParams};

/// Membrane potentials of one CT layer before (`v_pre`) and after
/// (`v_post`) the firing check of the latest step.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronState {
    pub v_pre: Vec<f64>,
    pub v_post: Vec<f64>,
    pub theta: f64,
}

impl NeuronState {
    pub fn new(width: usize, theta: f64) -> Result<Self> {
        if theta.is_nan() || theta <= 0.0 {
            return Err(Error::Validation(format!("threshold {theta} must be > 0")));
        }
        Ok(Self {
            v_pre: vec![0.0; width],
            v_post: vec![0.0; width],
            theta,
        })
    }

    pub fn width(&self) -> usize {
        self.v_post.len()
    }

    pub fn reset(&mut self) {
        self.v_pre.fill(0.0);
        self.v_post.fill(0.0);
    }
}

/// What the backward pass needs from one forward step.
#[derive(Debug, Clone, PartialEq)]
pub struct CtStepCache {
    pub input: Vec<f64>,
    pub v_pre: Vec<f64>,
}

/// Per-step caches of one layer, in time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CtLayerTape {
    steps: Vec<CtStepCache>,
}

impl CtLayerTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn clear(&mut self) {
        self.steps.clear();
    }

    pub fn step(&self, t: usize) -> Result<&CtStepCache> {
        self.steps.get(t).ok_or_else(|| {
            Error::State(format!(
                "no forward cache for step {t} (tape holds {} steps)",
                self.steps.len()
            ))
        })
    }
}

/// One CT step on an arbitrary input vector; updates `state` in place and
/// returns the layer activations. Records a cache when `tape` is given.
pub fn ct_step(
    params: &LayerParams,
    input: &[f64],
    state: &mut NeuronState,
    firing: Firing,
    tape: Option<&mut CtLayerTape>,
) -> Result<Vec<f64>> {
    let injection = dense::forward(params, input)?;
    if injection.len() != state.width() {
        return Err(Error::dim(
            "ct state width",
            &[injection.len()],
            &[state.width()],
        ));
    }
    let theta = state.theta;
    let mut out = Vec::with_capacity(injection.len());
    for ((inj, pre), post) in injection
        .iter()
        .zip(&mut state.v_pre)
        .zip(&mut state.v_post)
    {
        *pre = inj + *post;
        let s = firing.fire(*pre, theta);
        *post = *pre - theta * s;
        out.push(s);
    }
    if let Some(tape) = tape {
        tape.steps.push(CtStepCache {
            input: input.to_vec(),
            v_pre: state.v_pre.clone(),
        });
    }
    Ok(out)
}

/// CT layer step on a binary frame.
pub fn snn_ct_step(
    spikes_in: &SpikeFrame,
    params: &LayerParams,
    state: &mut NeuronState,
) -> Result<SpikeFrame> {
    let out = ct_step(params, &spikes_in.to_values(), state, Firing::Binary, None)?;
    Ok(SpikeFrame::from_values(&out, spikes_in.step_index))
}

/// Gradient at `v⁻` from the spike path and the membrane carry path.
#[inline]
pub fn ct_local_grad(grad_spike: f64, grad_v_post: f64, v_pre: f64, cfg: &SteConfig) -> f64 {
    let g = ste_gradient(v_pre);
    let reset_factor = match cfg.reset_grad {
        ResetGrad::Ste => 1.0 - cfg.theta * g,
        ResetGrad::Detached => 1.0,
    };
    grad_spike * g + grad_v_post * reset_factor
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtStepGrads {
    /// Gradient with respect to the layer input at this step.
    pub input: Option<Vec<f64>>,
    /// Gradient with respect to `v_post` of the previous step; the carry
    /// path has unit derivative, so this equals the gradient at `v⁻`.
    pub v_post_prev: Vec<f64>,
}

/// Backward through step `t` of a CT layer.
///
/// `grad_spike` is `dL/d spike(t)` and `grad_v_post` is `dL/d v_post(t)`
/// (the carry from step `t+1`).
#[allow(clippy::too_many_arguments)]
pub fn snn_ct_backward_step(
    tape: &CtLayerTape,
    t: usize,
    grad_spike: &[f64],
    grad_v_post: &[f64],
    params: &LayerParams,
    cfg: &SteConfig,
    grads: Option<&mut LayerGrads>,
    want_input_grad: bool,
) -> Result<CtStepGrads> {
    let cache = tape.step(t)?;
    let n = cache.v_pre.len();
    if grad_spike.len() != n || grad_v_post.len() != n {
        return Err(Error::dim(
            "ct backward gradients",
            &[n, n],
            &[grad_spike.len(), grad_v_post.len()],
        ));
    }
    let grad_v_pre: Vec<f64> = (0..n)
        .map(|k| ct_local_grad(grad_spike[k], grad_v_post[k], cache.v_pre[k], cfg))
        .collect();
    let input = dense::backward(params, &cache.input, &grad_v_pre, grads, want_input_grad)?;
    Ok(CtStepGrads {
        input,
        v_post_prev: grad_v_pre,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spiking::dc::snn_dc_layer;
    use proptest::prelude::*;

    fn single(w: f64) -> LayerParams {
        LayerParams::dense_from_rows(&[&[w]], &[0.0]).unwrap()
    }

    fn step_with(v_prev: f64, injection: f64) -> (bool, NeuronState) {
        let p = single(injection);
        let mut st = NeuronState::new(1, 1.0).unwrap();
        st.v_post[0] = v_prev;
        let s = snn_ct_step(&SpikeFrame::new(vec![true], 0), &p, &mut st).unwrap();
        (s.bits[0], st)
    }

    #[test]
    fn fire_and_decrement() {
        let (spike, st) = step_with(0.4, 0.9);
        assert!(spike);
        assert!((st.v_pre[0] - 1.3).abs() < 1e-12);
        assert!((st.v_post[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn integrate_below_threshold() {
        let (spike, st) = step_with(0.4, 0.3);
        assert!(!spike);
        assert!((st.v_pre[0] - 0.7).abs() < 1e-12);
        assert_eq!(st.v_post[0], st.v_pre[0]);
    }

    #[test]
    fn zero_state_zero_input() {
        let (spike, st) = step_with(0.0, 0.0);
        assert!(!spike);
        assert_eq!(st.v_post, vec![0.0]);
    }

    #[test]
    fn detached_carry_is_identity() {
        let cfg = SteConfig::new(1.0, ResetGrad::Detached).unwrap();
        for v in [-1.0, 0.5, 1.0, 3.0] {
            assert_eq!(ct_local_grad(0.0, 0.7, v, &cfg), 0.7);
        }
    }

    #[test]
    fn ste_reset_factor() {
        let cfg = SteConfig::default();
        assert_eq!(ct_local_grad(0.0, 1.0, 1.0, &cfg), 0.5);
        assert_eq!(ct_local_grad(1.0, 0.0, 1.0, &cfg), 0.5);
    }

    #[test]
    fn missing_cache_is_state_error() {
        let p = single(1.0);
        let tape = CtLayerTape::new();
        let err = snn_ct_backward_step(
            &tape,
            0,
            &[1.0],
            &[0.0],
            &p,
            &SteConfig::default(),
            None,
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    /// Two-step, two-neuron unrolled network under the hard-sigmoid
    /// surrogate, loss `Σ_t Σ_k c_tk·s_k(t)`, checked against central
    /// differences of a direct re-implementation of the recurrence.
    #[test]
    fn unrolled_two_steps_match_surrogate_differences() {
        let w = [0.7, -0.3, 0.4, 0.9, 0.2, 0.55];
        let b = [0.15, 0.35];
        let inputs = [[1.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        let c = [[0.8, -1.1], [1.3, 0.6]];
        let surrogate_loss = |w: &[f64], b: &[f64]| -> f64 {
            let mut v = [0.0; 2];
            let mut loss = 0.0;
            for t in 0..2 {
                for k in 0..2 {
                    let pre =
                        v[k] + b[k] + (0..3).map(|i| w[k * 3 + i] * inputs[t][i]).sum::<f64>();
                    let s = (pre / 2.0).clamp(0.0, 1.0);
                    v[k] = pre - s;
                    loss += c[t][k] * s;
                }
            }
            loss
        };

        let p = LayerParams::dense_from_rows(&[&w[..3], &w[3..]], &b).unwrap();
        let mut st = NeuronState::new(2, 1.0).unwrap();
        let mut tape = CtLayerTape::new();
        for x in &inputs {
            ct_step(&p, x, &mut st, Firing::Surrogate, Some(&mut tape)).unwrap();
        }
        let cfg = SteConfig::default();
        let mut grads = p.zero_grads();
        let mut carry = vec![0.0; 2];
        for t in (0..2).rev() {
            let r =
                snn_ct_backward_step(&tape, t, &c[t], &carry, &p, &cfg, Some(&mut grads), false)
                    .unwrap();
            carry = r.v_post_prev;
        }

        let h = 1e-6;
        for k in 0..6 {
            let (mut hi, mut lo) = (w, w);
            hi[k] += h;
            lo[k] -= h;
            let fd = (surrogate_loss(&hi, &b) - surrogate_loss(&lo, &b)) / (2.0 * h);
            let got = grads.weights.data()[k];
            assert!(
                (fd - got).abs() <= 1e-4 * fd.abs().max(got.abs()) + 1e-9,
                "w{k}: {fd} vs {got}"
            );
        }
        for k in 0..2 {
            let (mut hi, mut lo) = (b, b);
            hi[k] += h;
            lo[k] -= h;
            let fd = (surrogate_loss(&w, &hi) - surrogate_loss(&w, &lo)) / (2.0 * h);
            let got = grads.bias.data()[k];
            assert!(
                (fd - got).abs() <= 1e-4 * fd.abs().max(got.abs()) + 1e-9,
                "b{k}: {fd} vs {got}"
            );
        }
    }

    proptest! {
        #[test]
        fn conservation_holds_exactly(
            w in proptest::collection::vec(-1.5f64..1.5, 12),
            b in proptest::collection::vec(-0.5f64..0.5, 3),
            frames in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 4), 1..10),
        ) {
            let p = LayerParams::dense_from_rows(&[&w[..4], &w[4..8], &w[8..]], &b).unwrap();
            let mut st = NeuronState::new(3, 1.0).unwrap();
            for (t, bits) in frames.iter().enumerate() {
                let s = snn_ct_step(&SpikeFrame::new(bits.clone(), t), &p, &mut st).unwrap();
                for k in 0..3 {
                    let spike = if s.bits[k] { 1.0 } else { 0.0 };
                    prop_assert_eq!(st.v_post[k], st.v_pre[k] - st.theta * spike);
                }
            }
        }

        #[test]
        fn zeroed_ct_matches_dc(
            w in proptest::collection::vec(-1.5f64..1.5, 10),
            b in proptest::collection::vec(-0.5f64..1.5, 2),
            bits in proptest::collection::vec(any::<bool>(), 5),
        ) {
            let p = LayerParams::dense_from_rows(&[&w[..5], &w[5..]], &b).unwrap();
            let mut st = NeuronState::new(2, 1.0).unwrap();
            st.v_post = vec![0.37, -2.0];
            st.reset();
            let frame = SpikeFrame::new(bits, 0);
            let ct = snn_ct_step(&frame, &p, &mut st).unwrap();
            let (dc, _) = snn_dc_layer(&frame, &p, 1.0).unwrap();
            prop_assert_eq!(ct, dc);
        }

        #[test]
        fn spike_counts_bounded_by_steps(
            w in proptest::collection::vec(-3.0f64..3.0, 3),
            steps in 1usize..20,
        ) {
            let p = LayerParams::dense_from_rows(&[&w[..]], &[0.5]).unwrap();
            let mut st = NeuronState::new(1, 1.0).unwrap();
            let mut count = 0;
            for t in 0..steps {
                count += snn_ct_step(&SpikeFrame::new(vec![true; 3], t), &p, &mut st).unwrap().popcount();
            }
            prop_assert!(count <= steps);
        }
    }
}
