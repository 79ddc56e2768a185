use super::activation::{ste_gradient, Firing};
use super::frame::SpikeFrame;
use crate::error::{Error, Result};
use crate::nn::{dense, LayerGrads, LayerParams};

/// One DC step on an arbitrary (possibly dropout-scaled) input vector.
///
/// Returns the layer activations and the membrane potential `v = W·x + b`.
pub fn dc_forward(
    params: &LayerParams,
    input: &[f64],
    theta: f64,
    firing: Firing,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let v = dense::forward(params, input)?;
    let out = v.iter().map(|&x| firing.fire(x, theta)).collect();
    Ok((out, v))
}

/// DC layer on a binary frame: the membrane starts from zero every step.
pub fn snn_dc_layer(
    spikes_in: &SpikeFrame,
    params: &LayerParams,
    theta: f64,
) -> Result<(SpikeFrame, Vec<f64>)> {
    let (out, v) = dc_forward(params, &spikes_in.to_values(), theta, Firing::Binary)?;
    Ok((SpikeFrame::from_values(&out, spikes_in.step_index), v))
}

/// STE backward through a DC layer: `upstream ⊙ g(v)`, then the affine rule.
pub fn snn_dc_backward(
    upstream: &[f64],
    v: &[f64],
    input: &[f64],
    params: &LayerParams,
    grads: Option<&mut LayerGrads>,
    want_input_grad: bool,
) -> Result<Option<Vec<f64>>> {
    if upstream.len() != v.len() {
        return Err(Error::dim(
            "dc upstream vs membrane",
            &[v.len()],
            &[upstream.len()],
        ));
    }
    let local: Vec<f64> = upstream
        .iter()
        .zip(v)
        .map(|(&g, &x)| g * ste_gradient(x))
        .collect();
    dense::backward(params, input, &local, grads, want_input_grad)
}
