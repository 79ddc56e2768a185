use rand::Rng;

use super::preset::{LayerSpec, NeuronModel, PresetSpec};
use crate::error::{Error, Result};
use crate::nn::init::{glorot_conv, glorot_dense};
use crate::nn::{LayerKind, LayerParams, KERNEL};

/// Layer stack plus the metadata needed to run and serialize it.
///
/// For DC models every layer but the last fires; the last dense layer is a
/// non-firing accumulator read out through its potentials. For CT models
/// every layer fires.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub preset: String,
    pub neuron: NeuronModel,
    pub input_shape: Vec<usize>,
    pub theta: f64,
    pub layers: Vec<LayerParams>,
}

impl Network {
    pub fn new(
        preset: impl Into<String>,
        neuron: NeuronModel,
        input_shape: Vec<usize>,
        theta: f64,
        layers: Vec<LayerParams>,
    ) -> Result<Self> {
        let net = Self {
            preset: preset.into(),
            neuron,
            input_shape,
            theta,
            layers,
        };
        net.validate()?;
        Ok(net)
    }

    /// Glorot-initialized network for a preset.
    pub fn init(spec: &PresetSpec, theta: f64, rng: &mut impl Rng) -> Result<Self> {
        let mut shape = spec.input_shape.clone();
        let mut layers = Vec::with_capacity(spec.layers.len());
        for l in &spec.layers {
            match *l {
                LayerSpec::Dense(out) => {
                    let fan_in: usize = shape.iter().product();
                    layers.push(glorot_dense(out, fan_in, rng));
                    shape = vec![out];
                }
                LayerSpec::Conv5x5(k) => {
                    if shape.len() != 3 {
                        return Err(Error::Config(format!(
                            "conv layer after flat shape {shape:?}"
                        )));
                    }
                    layers.push(glorot_conv(k, shape[0], rng));
                    shape = vec![k, shape[1] + 1 - KERNEL, shape[2] + 1 - KERNEL];
                }
                LayerSpec::MaxPool2x2 => {
                    layers.push(LayerParams::maxpool());
                    shape = vec![shape[0], shape[1] / 2, shape[2] / 2];
                }
            }
        }
        Self::new(
            spec.id,
            spec.neuron,
            spec.input_shape.clone(),
            theta,
            layers,
        )
    }

    /// Dense-only network with the given layer widths (`sizes[0]` = inputs).
    pub fn dense(
        preset: impl Into<String>,
        neuron: NeuronModel,
        sizes: &[usize],
        theta: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        let layers = sizes
            .windows(2)
            .map(|w| glorot_dense(w[1], w[0], rng))
            .collect();
        Self::new(preset, neuron, vec![sizes[0]], theta, layers)
    }

    /// Shape of every intermediate activation, starting with the input.
    pub fn activation_shapes(&self) -> Result<Vec<Vec<usize>>> {
        let mut shapes = vec![self.input_shape.clone()];
        for (i, l) in self.layers.iter().enumerate() {
            let cur = shapes.last().expect("non-empty");
            let next = match l.kind {
                LayerKind::Dense => {
                    let fan_in: usize = cur.iter().product();
                    if l.fan_in() != fan_in {
                        return Err(Error::dim("layer fan-in", &[fan_in], &[l.fan_in()]));
                    }
                    vec![l.out_dim()]
                }
                LayerKind::Conv5x5 => {
                    if cur.len() != 3 || cur[0] != l.fan_in() || cur[1] < KERNEL || cur[2] < KERNEL
                    {
                        return Err(Error::dim("conv input", &[l.fan_in(), KERNEL, KERNEL], cur));
                    }
                    vec![l.out_dim(), cur[1] + 1 - KERNEL, cur[2] + 1 - KERNEL]
                }
                LayerKind::MaxPool2x2 => {
                    if cur.len() != 3 || cur[1] % 2 != 0 || cur[2] % 2 != 0 {
                        return Err(Error::dim("maxpool input", &[0, 2, 2], cur));
                    }
                    vec![cur[0], cur[1] / 2, cur[2] / 2]
                }
            };
            if i + 1 == self.layers.len() && l.kind != LayerKind::Dense {
                return Err(Error::Config("the output layer must be dense".into()));
            }
            shapes.push(next);
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("network has no layers".into()));
        }
        if self.theta.is_nan() || self.theta <= 0.0 {
            return Err(Error::Validation(format!(
                "threshold {} must be > 0",
                self.theta
            )));
        }
        for l in &self.layers {
            l.validate()?;
        }
        if self.neuron == NeuronModel::Ct && self.layers.iter().any(|l| l.kind != LayerKind::Dense)
        {
            return Err(Error::Config(
                "continuous-integration models are dense-only".into(),
            ));
        }
        self.activation_shapes().map(|_| ())
    }

    pub fn input_len(&self) -> usize {
        self.input_shape.iter().product()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, LayerParams::out_dim)
    }

    pub fn is_dense_only(&self) -> bool {
        self.layers.iter().all(|l| l.kind == LayerKind::Dense)
    }

    /// Rounds every parameter to the nearest `f32`, the checkpoint precision.
    pub fn round_to_f32(&mut self) {
        for l in &mut self.layers {
            for v in l
                .weights
                .data_mut()
                .iter_mut()
                .chain(l.bias.data_mut().iter_mut())
            {
                *v = *v as f32 as f64;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.all_finite() && l.bias.all_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conv_preset_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Network::init(&preset("conv").unwrap(), 1.0, &mut rng).unwrap();
        let shapes = net.activation_shapes().unwrap();
        assert_eq!(
            shapes,
            vec![
                vec![1, 28, 28],
                vec![12, 24, 24],
                vec![12, 12, 12],
                vec![64, 8, 8],
                vec![64, 4, 4],
                vec![512],
                vec![10],
            ]
        );
        assert_eq!(net.layers[4].fan_in(), 1024);
    }

    #[test]
    fn ct_rejects_conv() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut spec = preset("conv").unwrap();
        spec.neuron = NeuronModel::Ct;
        assert!(Network::init(&spec, 1.0, &mut rng).is_err());
    }

    #[test]
    fn mismatched_chain_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = glorot_dense(4, 3, &mut rng);
        let b = glorot_dense(2, 5, &mut rng);
        assert!(Network::new("x", NeuronModel::Dc, vec![3], 1.0, vec![a, b]).is_err());
    }
}
