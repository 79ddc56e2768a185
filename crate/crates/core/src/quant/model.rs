//! Whole-network integer inference and the quantized model file.
//!
//! File layout (little-endian):
//!
//! ```text
//! magic "DTSNNQNT" | version u32 | preset id (u16 length + UTF-8)
//! neuron u8 | theta f64 | bits u8 | input rank u8 + dims u32
//! layer count u32, then per layer:
//!   out u32 | fan_in u32 | scale f64 | theta_q i64
//!   weights i8 × out·fan_in | bias i32 × out
//! ```

use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::layer::{
    quantize_layer, quantized_forward_ct, quantized_forward_dc, IntNeuronState, QuantizedLayer,
};
use crate::error::{Error, Result};
use crate::model::{Network, NeuronModel};
use crate::spiking::SpikeFrame;

pub const QUANT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"DTSNNQNT";

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedModel {
    pub preset: String,
    pub neuron: NeuronModel,
    pub theta: f64,
    pub bits: u8,
    pub input_shape: Vec<usize>,
    pub layers: Vec<QuantizedLayer>,
}

/// Outputs of every layer at one step: spike frames and pre-reset potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedStep {
    pub frames: Vec<SpikeFrame>,
    pub potentials: Vec<Vec<i64>>,
}

impl QuantizedStep {
    pub fn output_frame(&self) -> &SpikeFrame {
        self.frames.last().expect("at least one layer")
    }

    pub fn output_potentials(&self) -> &[i64] {
        self.potentials.last().expect("at least one layer")
    }
}

impl QuantizedModel {
    /// Quantizes every layer of a dense network at `bits`.
    pub fn from_network(net: &Network, bits: u8) -> Result<Self> {
        if !net.is_dense_only() {
            return Err(Error::Config(
                "integer inference covers dense networks only".into(),
            ));
        }
        let layers = net
            .layers
            .iter()
            .map(|l| quantize_layer(l, bits, net.theta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            preset: net.preset.clone(),
            neuron: net.neuron,
            theta: net.theta,
            bits,
            input_shape: net.input_shape.clone(),
            layers,
        })
    }

    pub fn input_len(&self) -> usize {
        self.input_shape.iter().product()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out)
    }

    fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("quantized model has no layers".into()));
        }
        let mut width = self.input_len();
        for (i, l) in self.layers.iter().enumerate() {
            if l.fan_in != width {
                return Err(Error::Format(format!(
                    "layer {i} fan-in {} does not match the previous width {width}",
                    l.fan_in
                )));
            }
            if l.bits != self.bits {
                return Err(Error::Format(format!(
                    "layer {i} has {} bits, model {}",
                    l.bits, self.bits
                )));
            }
            width = l.out;
        }
        Ok(())
    }

    /// Single DC step through every layer.
    pub fn forward_dc(&self, input: &SpikeFrame) -> Result<QuantizedStep> {
        let mut frames = Vec::with_capacity(self.layers.len());
        let mut potentials = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for (i, l) in self.layers.iter().enumerate() {
            let (s, v) = quantized_forward_dc(&x, l, i)?;
            frames.push(s.clone());
            potentials.push(v);
            x = s;
        }
        Ok(QuantizedStep { frames, potentials })
    }

    pub fn ct_states(&self) -> Vec<IntNeuronState> {
        self.layers
            .iter()
            .map(|l| IntNeuronState::new(l.out))
            .collect()
    }

    /// One CT step through every layer, updating `states`.
    pub fn step_ct(
        &self,
        input: &SpikeFrame,
        states: &mut [IntNeuronState],
    ) -> Result<QuantizedStep> {
        if states.len() != self.layers.len() {
            return Err(Error::dim(
                "integer states per layer",
                &[self.layers.len()],
                &[states.len()],
            ));
        }
        let mut frames = Vec::with_capacity(self.layers.len());
        let mut potentials = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for (i, (l, st)) in self.layers.iter().zip(states).enumerate() {
            let (s, v) = quantized_forward_ct(&x, l, st, i)?;
            frames.push(s.clone());
            potentials.push(v);
            x = s;
        }
        Ok(QuantizedStep { frames, potentials })
    }

    /// Runs a whole input sequence with the model's own neuron type.
    pub fn run(&self, inputs: &[SpikeFrame]) -> Result<Vec<QuantizedStep>> {
        match self.neuron {
            NeuronModel::Dc => inputs.iter().map(|f| self.forward_dc(f)).collect(),
            NeuronModel::Ct => {
                let mut st = self.ct_states();
                inputs.iter().map(|f| self.step_ct(f, &mut st)).collect()
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::new();
        w.extend_from_slice(MAGIC);
        w.write_u32::<LE>(QUANT_VERSION).expect("vec write");
        w.write_u16::<LE>(self.preset.len() as u16)
            .expect("vec write");
        w.extend_from_slice(self.preset.as_bytes());
        w.write_u8(self.neuron.code()).expect("vec write");
        w.write_f64::<LE>(self.theta).expect("vec write");
        w.write_u8(self.bits).expect("vec write");
        w.write_u8(self.input_shape.len() as u8).expect("vec write");
        for &d in &self.input_shape {
            w.write_u32::<LE>(d as u32).expect("vec write");
        }
        w.write_u32::<LE>(self.layers.len() as u32)
            .expect("vec write");
        for l in &self.layers {
            w.write_u32::<LE>(l.out as u32).expect("vec write");
            w.write_u32::<LE>(l.fan_in as u32).expect("vec write");
            w.write_f64::<LE>(l.scale).expect("vec write");
            w.write_i64::<LE>(l.theta_q).expect("vec write");
            for &q in &l.weights_q {
                w.write_i8(q as i8).expect("vec write");
            }
            for &b in &l.bias_q {
                w.write_i32::<LE>(b).expect("vec write");
            }
        }
        w
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut c = Cursor::new(bytes);
        let trunc =
            |what: &str| Error::Format(format!("quantized model truncated while reading {what}"));
        let mut magic = [0u8; 8];
        c.read_exact(&mut magic).map_err(|_| trunc("magic"))?;
        if &magic != MAGIC {
            return Err(Error::Format(
                "not a quantized model file (bad magic)".into(),
            ));
        }
        let version = c.read_u32::<LE>().map_err(|_| trunc("version"))?;
        if version != QUANT_VERSION {
            return Err(Error::Format(format!(
                "quantized model version {version}, this build reads {QUANT_VERSION}"
            )));
        }
        let n = c.read_u16::<LE>().map_err(|_| trunc("preset id"))? as usize;
        let mut id = vec![0; n];
        c.read_exact(&mut id).map_err(|_| trunc("preset id"))?;
        let preset =
            String::from_utf8(id).map_err(|_| Error::Format("preset id is not UTF-8".into()))?;
        let neuron = NeuronModel::from_code(c.read_u8().map_err(|_| trunc("neuron model"))?)?;
        let theta = c.read_f64::<LE>().map_err(|_| trunc("theta"))?;
        let bits = c.read_u8().map_err(|_| trunc("bits"))?;
        let rank = c.read_u8().map_err(|_| trunc("input rank"))?;
        let input_shape = (0..rank)
            .map(|_| {
                c.read_u32::<LE>()
                    .map(|d| d as usize)
                    .map_err(|_| trunc("input shape"))
            })
            .collect::<Result<Vec<_>>>()?;
        let count = c.read_u32::<LE>().map_err(|_| trunc("layer count"))?;
        let mut layers = Vec::new();
        for i in 0..count {
            let what = format!("layer {i}");
            let out = c.read_u32::<LE>().map_err(|_| trunc(&what))? as usize;
            let fan_in = c.read_u32::<LE>().map_err(|_| trunc(&what))? as usize;
            let scale = c.read_f64::<LE>().map_err(|_| trunc(&what))?;
            let theta_q = c.read_i64::<LE>().map_err(|_| trunc(&what))?;
            let remaining = bytes.len() - c.position() as usize;
            if remaining < out * fan_in + 4 * out {
                return Err(trunc(&what));
            }
            let mut wq = vec![0i8; out * fan_in];
            c.read_i8_into(&mut wq).map_err(|_| trunc(&what))?;
            let mut bq = vec![0i32; out];
            c.read_i32_into::<LE>(&mut bq).map_err(|_| trunc(&what))?;
            let w = wq.into_iter().map(i32::from).collect();
            layers.push(
                QuantizedLayer::new(out, fan_in, w, bq, scale, theta_q, bits)
                    .map_err(|e| Error::Format(format!("{what}: {e}")))?,
            );
        }
        if c.position() as usize != bytes.len() {
            return Err(Error::Format("trailing bytes after the last layer".into()));
        }
        let m = Self {
            preset,
            neuron,
            theta,
            bits,
            input_shape,
            layers,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(neuron: NeuronModel) -> QuantizedModel {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let net = Network::dense("m", neuron, &[20, 12, 4], 1.0, &mut rng).unwrap();
        QuantizedModel::from_network(&net, 7).unwrap()
    }

    #[test]
    fn file_round_trip() {
        let m = model(NeuronModel::Ct);
        let bytes = m.to_bytes();
        assert_eq!(QuantizedModel::from_bytes(&bytes).unwrap(), m);
        assert!(matches!(
            QuantizedModel::from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn ct_with_cleared_state_matches_dc() {
        let dc = model(NeuronModel::Dc);
        let ct = QuantizedModel {
            neuron: NeuronModel::Ct,
            ..dc.clone()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 0..20 {
            let f = SpikeFrame::new((0..20).map(|_| rng.random_bool(0.4)).collect(), t);
            let mut st = ct.ct_states();
            assert_eq!(ct.step_ct(&f, &mut st).unwrap(), dc.forward_dc(&f).unwrap());
        }
    }
}
