//! Binary model checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic "DTSNNCKP" | version u32 | preset id (u16 length + UTF-8)
//! neuron u8 | theta f64 | input rank u8 + dims u32
//! epoch u64 | seed u64 | config hash [32]
//! layer count u32, then per layer:
//!   kind u8 | weight rank u8 + dims u32 | bias length u32
//!   weights f32 × n | bias f32 × m
//! ```

use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Network, NeuronModel, PresetSpec};
use crate::nn::{LayerKind, LayerParams};
use crate::tensor::Tensor;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"DTSNNCKP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckpointMeta {
    pub epoch: u64,
    pub seed: u64,
    pub config_hash: [u8; 32],
}

fn put_f32s(out: &mut Vec<u8>, data: &[f64]) {
    for &v in data {
        out.write_f32::<LE>(v as f32).expect("vec write");
    }
}

pub fn checkpoint_bytes(net: &Network, meta: &CheckpointMeta) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    let w = &mut out;
    w.write_u32::<LE>(CHECKPOINT_VERSION).expect("vec write");
    w.write_u16::<LE>(net.preset.len() as u16)
        .expect("vec write");
    w.extend_from_slice(net.preset.as_bytes());
    w.write_u8(net.neuron.code()).expect("vec write");
    w.write_f64::<LE>(net.theta).expect("vec write");
    w.write_u8(net.input_shape.len() as u8).expect("vec write");
    for &d in &net.input_shape {
        w.write_u32::<LE>(d as u32).expect("vec write");
    }
    w.write_u64::<LE>(meta.epoch).expect("vec write");
    w.write_u64::<LE>(meta.seed).expect("vec write");
    w.extend_from_slice(&meta.config_hash);
    w.write_u32::<LE>(net.layers.len() as u32)
        .expect("vec write");
    for l in &net.layers {
        w.write_u8(l.kind.code()).expect("vec write");
        w.write_u8(l.weights.shape().len() as u8)
            .expect("vec write");
        for &d in l.weights.shape() {
            w.write_u32::<LE>(d as u32).expect("vec write");
        }
        w.write_u32::<LE>(l.bias.len() as u32).expect("vec write");
        put_f32s(w, l.weights.data());
        put_f32s(w, l.bias.data());
    }
    out
}

pub fn save_checkpoint(net: &Network, meta: &CheckpointMeta, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_bytes(net, meta))?;
    Ok(())
}

struct Reader<'a>(Cursor<&'a [u8]>);

impl Reader<'_> {
    fn eof<T>(&self, what: &str, r: std::io::Result<T>) -> Result<T> {
        r.map_err(|_| Error::Format(format!("checkpoint truncated while reading {what}")))
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        let r = self.0.read_u8();
        self.eof(what, r)
    }
    fn u16(&mut self, what: &str) -> Result<u16> {
        let r = self.0.read_u16::<LE>();
        self.eof(what, r)
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        let r = self.0.read_u32::<LE>();
        self.eof(what, r)
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        let r = self.0.read_u64::<LE>();
        self.eof(what, r)
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        let r = self.0.read_f64::<LE>();
        self.eof(what, r)
    }
    fn bytes(&mut self, n: usize, what: &str) -> Result<Vec<u8>> {
        let mut buf = vec![0; n];
        let r = self.0.read_exact(&mut buf);
        self.eof(what, r)?;
        Ok(buf)
    }
    fn dims(&mut self, what: &str) -> Result<Vec<usize>> {
        let rank = self.u8(what)?;
        (0..rank)
            .map(|_| self.u32(what).map(|d| d as usize))
            .collect()
    }
    fn f32s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let remaining = self.0.get_ref().len() - self.0.position() as usize;
        if remaining < 4 * n {
            return Err(Error::Format(format!(
                "checkpoint truncated while reading {what}"
            )));
        }
        let mut v = vec![0f32; n];
        let r = self.0.read_f32_into::<LE>(&mut v);
        self.eof(what, r)?;
        Ok(v.into_iter().map(f64::from).collect())
    }
}

pub fn parse_checkpoint(bytes: &[u8]) -> Result<(Network, CheckpointMeta)> {
    let mut r = Reader(Cursor::new(bytes));
    if r.bytes(8, "magic")? != MAGIC {
        return Err(Error::Format("not a checkpoint file (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!(
            "checkpoint version {version}, this build reads {CHECKPOINT_VERSION}"
        )));
    }
    let n = r.u16("preset id")? as usize;
    let preset = String::from_utf8(r.bytes(n, "preset id")?)
        .map_err(|_| Error::Format("preset id is not UTF-8".into()))?;
    let neuron = NeuronModel::from_code(r.u8("neuron model")?)?;
    let theta = r.f64("theta")?;
    let input_shape = r.dims("input shape")?;
    let epoch = r.u64("epoch")?;
    let seed = r.u64("seed")?;
    let config_hash: [u8; 32] = r.bytes(32, "config hash")?.try_into().expect("32 bytes");
    let count = r.u32("layer count")?;
    let mut layers = Vec::new();
    for i in 0..count {
        let kind = LayerKind::from_code(r.u8("layer kind")?)?;
        let wshape = r.dims("weight shape")?;
        let blen = r.u32("bias length")? as usize;
        let wlen = wshape.iter().product();
        let w = r.f32s(wlen, &format!("layer {i} weights"))?;
        let b = r.f32s(blen, &format!("layer {i} bias"))?;
        let weights = Tensor::new(wshape, w).map_err(|e| Error::Format(e.to_string()))?;
        let bias = Tensor::vector(b);
        let params = match kind {
            LayerKind::Dense => LayerParams::dense(weights, bias),
            LayerKind::Conv5x5 => LayerParams::conv5x5(weights, bias),
            LayerKind::MaxPool2x2 => Ok(LayerParams::maxpool()),
        }
        .map_err(|e| Error::Format(format!("layer {i}: {e}")))?;
        layers.push(params);
    }
    if (r.0.position() as usize) != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last layer",
            bytes.len() - r.0.position() as usize
        )));
    }
    let net = Network::new(preset, neuron, input_shape, theta, layers)
        .map_err(|e| Error::Format(format!("inconsistent layer stack: {e}")))?;
    Ok((
        net,
        CheckpointMeta {
            epoch,
            seed,
            config_hash,
        },
    ))
}

pub fn load_checkpoint(path: &Path) -> Result<(Network, CheckpointMeta)> {
    parse_checkpoint(&std::fs::read(path)?)
}

/// Loads a checkpoint and checks it against the expected preset.
pub fn load_checkpoint_for(path: &Path, spec: &PresetSpec) -> Result<(Network, CheckpointMeta)> {
    let (net, meta) = load_checkpoint(path)?;
    if net.preset != spec.id {
        return Err(Error::Validation(format!(
            "checkpoint holds preset {:?}, expected {:?}",
            net.preset, spec.id
        )));
    }
    let expected = Network::init(spec, net.theta, &mut ChaCha8Rng::seed_from_u64(0))?;
    let shapes_match = net.neuron == spec.neuron
        && net.input_shape == spec.input_shape
        && net.layers.len() == expected.layers.len()
        && net.layers.iter().zip(&expected.layers).all(|(a, b)| {
            a.kind == b.kind
                && a.weights.shape() == b.weights.shape()
                && a.bias.shape() == b.bias.shape()
        });
    if !shapes_match {
        return Err(Error::Validation(format!(
            "checkpoint layer shapes do not match preset {:?}",
            spec.id
        )));
    }
    Ok((net, meta))
}
