use crate::error::{Error, Result};
use crate::nn::{LayerKind, LayerParams};
use crate::spiking::SpikeFrame;
use crate::tensor::Tensor;

/// Signed accumulator width of the integer datapath.
pub const ACCUMULATOR_BITS: u32 = 24;
pub const MIN_BITS: u8 = 2;
pub const MAX_BITS: u8 = 8;

const ACC_MAX: i64 = (1 << (ACCUMULATOR_BITS - 1)) - 1;
const ACC_MIN: i64 = -(1 << (ACCUMULATOR_BITS - 1));

/// Dense layer with integer weights on a per-layer symmetric scale.
///
/// A real weight `w` is represented by `round(w/scale)`; bias and threshold
/// share the scale.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedLayer {
    pub out: usize,
    pub fan_in: usize,
    /// Row-major `out × fan_in`.
    pub weights_q: Vec<i32>,
    pub bias_q: Vec<i32>,
    pub scale: f64,
    pub theta_q: i64,
    pub bits: u8,
}

fn check_bits(bits: u8) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::Validation(format!(
            "bit width {bits} outside {MIN_BITS}..={MAX_BITS}"
        )));
    }
    Ok(())
}

/// Largest representable magnitude, `2^(B−1) − 1`.
pub fn weight_limit(bits: u8) -> i32 {
    (1 << (bits - 1)) - 1
}

impl QuantizedLayer {
    pub fn new(
        out: usize,
        fan_in: usize,
        weights_q: Vec<i32>,
        bias_q: Vec<i32>,
        scale: f64,
        theta_q: i64,
        bits: u8,
    ) -> Result<Self> {
        check_bits(bits)?;
        if weights_q.len() != out * fan_in {
            return Err(Error::dim(
                "quantized weights",
                &[out, fan_in],
                &[weights_q.len()],
            ));
        }
        if bias_q.len() != out {
            return Err(Error::dim("quantized bias", &[out], &[bias_q.len()]));
        }
        let lo = -(1i32 << (bits - 1));
        let hi = weight_limit(bits);
        if let Some((i, w)) = weights_q
            .iter()
            .enumerate()
            .find(|(_, &w)| w < lo || w > hi)
        {
            return Err(Error::Validation(format!(
                "weight {w} at index {i} outside the {bits}-bit range [{lo}, {hi}]"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Validation(format!("scale {scale} must be positive")));
        }
        if theta_q < 1 {
            return Err(Error::Validation(format!(
                "integer threshold {theta_q} must be ≥ 1"
            )));
        }
        Ok(Self {
            out,
            fan_in,
            weights_q,
            bias_q,
            scale,
            theta_q,
            bits,
        })
    }

    /// Weights fanning out of presynaptic neuron `i`: one SRAM row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = i32> + '_ {
        (0..self.out).map(move |o| self.weights_q[o * self.fan_in + i])
    }

    pub fn dequantize(&self) -> LayerParams {
        let w = self
            .weights_q
            .iter()
            .map(|&q| f64::from(q) * self.scale)
            .collect();
        let b = self
            .bias_q
            .iter()
            .map(|&q| f64::from(q) * self.scale)
            .collect();
        LayerParams::dense(
            Tensor::new(vec![self.out, self.fan_in], w).expect("validated length"),
            Tensor::vector(b),
        )
        .expect("validated shapes")
    }
}

/// Per-layer symmetric quantization: `scale = max|w| / (2^(B−1) − 1)`,
/// or 1 for an all-zero layer. The threshold rounds to at least one step.
pub fn quantize_layer(params: &LayerParams, bits: u8, theta: f64) -> Result<QuantizedLayer> {
    check_bits(bits)?;
    if params.kind != LayerKind::Dense {
        return Err(Error::Config(format!(
            "only dense layers are quantized, got {:?}",
            params.kind
        )));
    }
    let max_abs = params
        .weights
        .data()
        .iter()
        .fold(0.0f64, |m, w| m.max(w.abs()));
    let scale = if max_abs == 0.0 {
        1.0
    } else {
        max_abs / f64::from(weight_limit(bits))
    };
    let limit = f64::from(weight_limit(bits));
    let weights_q = params
        .weights
        .data()
        .iter()
        .map(|w| (w / scale).round().clamp(-limit, limit) as i32)
        .collect();
    let bias_q = params
        .bias
        .data()
        .iter()
        .map(|b| {
            let q = (b / scale).round();
            if q.abs() > ACC_MAX as f64 {
                Err(Error::Validation(format!(
                    "bias {b} does not fit the accumulator at scale {scale}"
                )))
            } else {
                Ok(q as i32)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let theta_q = ((theta / scale).round() as i64).max(1);
    QuantizedLayer::new(
        params.out_dim(),
        params.fan_in(),
        weights_q,
        bias_q,
        scale,
        theta_q,
        bits,
    )
}

#[inline]
pub(crate) fn accumulate(acc: i64, add: i64, layer: usize, neuron: usize) -> Result<i64> {
    let v = acc + add;
    if !(ACC_MIN..=ACC_MAX).contains(&v) {
        return Err(Error::Overflow {
            layer,
            neuron,
            value: v,
        });
    }
    Ok(v)
}

/// Integer injection `Σ_active W[:, i] + bias_q`, row by row.
pub fn integer_injection(
    frame: &SpikeFrame,
    q: &QuantizedLayer,
    layer: usize,
    start: &[i64],
) -> Result<Vec<i64>> {
    if frame.width() != q.fan_in {
        return Err(Error::dim(
            "quantized layer input",
            &[q.fan_in],
            &[frame.width()],
        ));
    }
    let mut v = start.to_vec();
    for i in frame.active_indices() {
        for (o, w) in q.row(i).enumerate() {
            v[o] = accumulate(v[o], i64::from(w), layer, o)?;
        }
    }
    for (o, &b) in q.bias_q.iter().enumerate() {
        v[o] = accumulate(v[o], i64::from(b), layer, o)?;
    }
    Ok(v)
}

/// DC step: integer potentials from zero, fire iff `v_q > theta_q`.
pub fn quantized_forward_dc(
    spikes_in: &SpikeFrame,
    q: &QuantizedLayer,
    layer: usize,
) -> Result<(SpikeFrame, Vec<i64>)> {
    let v = integer_injection(spikes_in, q, layer, &vec![0; q.out])?;
    let bits = v.iter().map(|&x| x > q.theta_q).collect();
    Ok((SpikeFrame::new(bits, spikes_in.step_index), v))
}

/// Integer membrane of a CT layer (the value after the latest firing check).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntNeuronState {
    pub v: Vec<i64>,
}

impl IntNeuronState {
    pub fn new(width: usize) -> Self {
        Self { v: vec![0; width] }
    }
}

/// CT step: `v⁻ = v + injection`; on a spike `v ← v⁻ − theta_q`. Returns
/// the output frame and `v⁻`.
pub fn quantized_forward_ct(
    spikes_in: &SpikeFrame,
    q: &QuantizedLayer,
    state: &mut IntNeuronState,
    layer: usize,
) -> Result<(SpikeFrame, Vec<i64>)> {
    if state.v.len() != q.out {
        return Err(Error::dim(
            "integer state width",
            &[q.out],
            &[state.v.len()],
        ));
    }
    let v_pre = integer_injection(spikes_in, q, layer, &state.v)?;
    let mut bits = Vec::with_capacity(q.out);
    for (o, (&pre, post)) in v_pre.iter().zip(&mut state.v).enumerate() {
        let fire = pre > q.theta_q;
        *post = if fire {
            accumulate(pre, -q.theta_q, layer, o)?
        } else {
            pre
        };
        bits.push(fire);
    }
    Ok((SpikeFrame::new(bits, spikes_in.step_index), v_pre))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layer(w: &[&[f64]], b: &[f64]) -> LayerParams {
        LayerParams::dense_from_rows(w, b).unwrap()
    }

    #[test]
    fn max_weight_maps_to_limit() {
        let q = quantize_layer(&layer(&[&[0.5, -0.25, 0.0]], &[0.0]), 7, 1.0).unwrap();
        assert_eq!(q.weights_q, vec![63, -32, 0]);
        assert!((q.scale - 0.5 / 63.0).abs() < 1e-15);
        assert_eq!(q.theta_q, 126);
    }

    #[test]
    fn all_zero_layer_uses_unit_scale() {
        let q = quantize_layer(&layer(&[&[0.0, 0.0]], &[0.0]), 7, 1.0).unwrap();
        assert_eq!(q.scale, 1.0);
        assert_eq!(q.theta_q, 1);
    }

    #[test]
    fn out_of_range_weights_rejected() {
        assert!(QuantizedLayer::new(1, 1, vec![64], vec![0], 1.0, 1, 7).is_err());
        assert!(QuantizedLayer::new(1, 1, vec![-64], vec![0], 1.0, 1, 7).is_ok());
        assert!(QuantizedLayer::new(1, 1, vec![0], vec![0], 1.0, 1, 9).is_err());
    }

    #[test]
    fn silent_input_zero_bias_no_spikes() {
        let q = QuantizedLayer::new(2, 3, vec![5; 6], vec![0, 0], 0.1, 10, 7).unwrap();
        let (s, v) = quantized_forward_dc(&SpikeFrame::silent(3, 0), &q, 0).unwrap();
        assert_eq!(s.popcount(), 0);
        assert_eq!(v, vec![0, 0]);
    }

    #[test]
    fn ct_integer_fire_and_decrement() {
        let q = QuantizedLayer::new(1, 1, vec![9], vec![0], 0.1, 10, 7).unwrap();
        let mut st = IntNeuronState { v: vec![4] };
        let (s, pre) =
            quantized_forward_ct(&SpikeFrame::new(vec![true], 0), &q, &mut st, 0).unwrap();
        assert_eq!((s.bits[0], pre[0], st.v[0]), (true, 13, 3));
        let (s, _) =
            quantized_forward_ct(&SpikeFrame::new(vec![false], 1), &q, &mut st, 0).unwrap();
        assert_eq!((s.bits[0], st.v[0]), (false, 3));
    }

    #[test]
    fn overflow_names_neuron() {
        let q = QuantizedLayer::new(2, 1, vec![0, 100], vec![0, 0], 1.0, 1, 8).unwrap();
        let mut st = IntNeuronState {
            v: vec![0, ACC_MAX - 50],
        };
        let err =
            quantized_forward_ct(&SpikeFrame::new(vec![true], 0), &q, &mut st, 3).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Overflow {
                    layer: 3,
                    neuron: 1,
                    ..
                }
            ),
            "{err}"
        );
    }

    proptest! {
        #[test]
        fn dequantization_error_within_half_step(
            w in proptest::collection::vec(-2.0f64..2.0, 1..40),
            bits in MIN_BITS..=MAX_BITS,
        ) {
            let p = LayerParams::dense(
                Tensor::new(vec![1, w.len()], w.clone()).unwrap(),
                Tensor::zeros(vec![1]),
            ).unwrap();
            let q = quantize_layer(&p, bits, 1.0).unwrap();
            let d = q.dequantize();
            for (a, b) in w.iter().zip(d.weights.data()) {
                prop_assert!((a - b).abs() <= q.scale / 2.0 * (1.0 + 1e-12));
            }
        }

        #[test]
        fn integer_and_float_agree_outside_rounding_band(
            w in proptest::collection::vec(-1.0f64..1.0, 16),
            bias in -0.5f64..0.5,
            bits in proptest::collection::vec(any::<bool>(), 16),
        ) {
            let p = LayerParams::dense(
                Tensor::new(vec![1, 16], w).unwrap(),
                Tensor::vector(vec![bias]),
            ).unwrap();
            let q = quantize_layer(&p, 7, 1.0).unwrap();
            let frame = SpikeFrame::new(bits, 0);
            let (s, vq) = quantized_forward_dc(&frame, &q, 0).unwrap();
            let (fs, v) = crate::spiking::snn_dc_layer(&frame, &p, 1.0).unwrap();
            let k = frame.popcount() as f64;
            // weights, bias and threshold each round by at most scale/2
            let band = (k + 2.0) * q.scale / 2.0;
            prop_assert!((vq[0] as f64 * q.scale - v[0]).abs() <= (k + 1.0) * q.scale / 2.0 + 1e-12);
            if (v[0] - 1.0).abs() > band {
                prop_assert_eq!(s.bits[0], fs.bits[0]);
            }
        }
    }
}
