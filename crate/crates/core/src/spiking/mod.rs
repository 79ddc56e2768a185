//! Discrete-time spiking neuron models.
//!
//! * Discontinuous integration (DC): the membrane is recomputed from zero at
//!   every step, `v = W·s + b`, and the neuron fires iff `v > θ`.
//! * Continuous integration (CT): the membrane carries over between steps,
//!   `v⁻(t) = W·s(t) + b + v(t−1)`, fires iff `v⁻ > θ`, and firing subtracts
//!   `θ` from the membrane: `v(t) = v⁻(t) − θ·spike`.
//!
//! Both are trained with a straight-through estimator: the derivative of the
//! step function is replaced by `0.5` on `[0, 2]` and `0` elsewhere (θ = 1),
//! which is the derivative of the hard sigmoid `clip(x/2, 0, 1)`.

mod activation;
mod ct;
mod dc;
mod frame;

pub use activation::{binary_activation, hard_sigmoid, ste_gradient, Firing, ResetGrad, SteConfig};
pub use ct::{
    ct_local_grad, ct_step, snn_ct_backward_step, snn_ct_step, CtLayerTape, CtStepCache,
    CtStepGrads, NeuronState,
};
pub use dc::{dc_forward, snn_dc_backward, snn_dc_layer};
pub use frame::SpikeFrame;
