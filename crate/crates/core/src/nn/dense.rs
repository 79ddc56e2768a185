//! Fully connected affine layer: `W·x + b`.
//!
//! Inputs in this crate are mostly binary spike vectors, so the forward pass
//! gathers only the nonzero input lines. Skipped terms are exact zeros, so the
//! result is identical to the dense sum.

use super::{LayerGrads, LayerKind, LayerParams};
use crate::error::{Error, Result};

fn check(params: &LayerParams, input_len: usize) -> Result<(usize, usize)> {
    if params.kind != LayerKind::Dense {
        return Err(Error::Validation(format!(
            "dense operation on a {:?} layer",
            params.kind
        )));
    }
    let shape = params.weights.shape();
    let (out, fan_in) = (shape[0], shape[1]);
    if input_len != fan_in {
        return Err(Error::dim(
            "dense input vs weight fan-in",
            &[out, fan_in],
            &[input_len],
        ));
    }
    Ok((out, fan_in))
}

/// Indices of the nonzero entries of `input`.
pub(crate) fn active_lines(input: &[f64]) -> Vec<usize> {
    input
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| (x != 0.0).then_some(i))
        .collect()
}

/// `W·input + b`.
pub fn forward(params: &LayerParams, input: &[f64]) -> Result<Vec<f64>> {
    let (out, fan_in) = check(params, input.len())?;
    let active = active_lines(input);
    let w = params.weights.data();
    let b = params.bias.data();
    let mut result = Vec::with_capacity(out);
    for o in 0..out {
        let row = &w[o * fan_in..(o + 1) * fan_in];
        let mut acc = 0.0;
        for &i in &active {
            acc += row[i] * input[i];
        }
        result.push(acc + b[o]);
    }
    Ok(result)
}

/// Backward pass for `W·input + b` given `upstream = dL/d(output)`.
///
/// Accumulates `dW += upstream·inputᵀ` and `db += upstream` into `grads`
/// when provided, and returns `Wᵀ·upstream` when `want_input_grad` is set.
pub fn backward(
    params: &LayerParams,
    input: &[f64],
    upstream: &[f64],
    grads: Option<&mut LayerGrads>,
    want_input_grad: bool,
) -> Result<Option<Vec<f64>>> {
    let (out, fan_in) = check(params, input.len())?;
    if upstream.len() != out {
        return Err(Error::dim(
            "dense upstream gradient",
            &[out],
            &[upstream.len()],
        ));
    }
    if let Some(grads) = grads {
        let active = active_lines(input);
        let gw = grads.weights.data_mut();
        for (o, &g) in upstream.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let row = &mut gw[o * fan_in..(o + 1) * fan_in];
            for &i in &active {
                row[i] += g * input[i];
            }
        }
        for (gb, &g) in grads.bias.data_mut().iter_mut().zip(upstream) {
            *gb += g;
        }
    }
    if !want_input_grad {
        return Ok(None);
    }
    let w = params.weights.data();
    let mut grad_in = vec![0.0; fan_in];
    for (o, &g) in upstream.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let row = &w[o * fan_in..(o + 1) * fan_in];
        for (gi, &wi) in grad_in.iter_mut().zip(row) {
            *gi += wi * g;
        }
    }
    Ok(Some(grad_in))
}
