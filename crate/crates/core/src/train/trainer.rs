//! Minibatch training loops.
//!
//! Every sample draws its encoding and dropout masks from its own ChaCha
//! stream, derived from a per-batch seed. Samples are processed in fixed
//! chunks whose gradients are summed in chunk order, so results do not
//! depend on the number of worker threads.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::TrainConfig;
use super::targets::{class_targets, group_argmax, image_classes, output_width, sequence_classes};
use crate::data::{bernoulli_encode, ImageSample, SpikeFrameSequence};
use crate::error::{Error, Result};
use crate::model::{
    ct_backward, ct_forward, dc_backward, dc_forward, CtTape, DcTape, Network, NeuronModel,
    PresetSpec, Task,
};
use crate::nn::{adam_step, squared_hinge_row, AdamState, DropoutMask, LayerGrads, LayerParams};
use crate::spiking::{Firing, SteConfig};

const CHUNK: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    /// Mean over batches of the per-sample loss.
    pub loss: f64,
    /// Fraction of correct task predictions on the training stream.
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct Trainer {
    pub net: Network,
    pub cfg: TrainConfig,
    pub tasks: Vec<Task>,
    /// Index of the next epoch to run.
    pub epoch: usize,
    adam: Vec<(AdamState, AdamState)>,
    input_widths: Vec<usize>,
}

struct ChunkResult {
    grads: Vec<LayerGrads>,
    loss: f64,
    correct: usize,
}

impl Trainer {
    pub fn new(net: Network, cfg: TrainConfig, tasks: Vec<Task>) -> Result<Self> {
        cfg.validate(net.neuron, net.layers.len())?;
        if output_width(&tasks) != net.output_dim() {
            return Err(Error::dim(
                "output width vs tasks",
                &[output_width(&tasks)],
                &[net.output_dim()],
            ));
        }
        if net.neuron == NeuronModel::Ct && !net.is_dense_only() {
            return Err(Error::Config(
                "continuous-integration models are dense-only".into(),
            ));
        }
        let adam = net
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                (
                    AdamState::new(format!("layer {i} weights"), l.weights.shape()),
                    AdamState::new(format!("layer {i} bias"), l.bias.shape()),
                )
            })
            .collect();
        let input_widths = net
            .activation_shapes()?
            .iter()
            .take(net.layers.len())
            .map(|s| s.iter().product())
            .collect();
        Ok(Self {
            net,
            cfg,
            tasks,
            epoch: 0,
            adam,
            input_widths,
        })
    }

    /// Fresh Glorot-initialized model seeded from `cfg.seed`.
    pub fn from_preset(spec: &PresetSpec, cfg: TrainConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let net = Network::init(spec, cfg.theta, &mut rng)?;
        Self::new(net, cfg, spec.tasks.clone())
    }

    pub fn lr(&self) -> f64 {
        self.cfg.schedule().lr(self.epoch)
    }

    fn masks(&self, rng: &mut ChaCha8Rng) -> Result<Vec<DropoutMask>> {
        self.input_widths
            .iter()
            .zip(&self.cfg.dropout)
            .map(|(&w, &r)| DropoutMask::sample(w, r, rng))
            .collect()
    }

    fn targets(&self, classes: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        classes
            .iter()
            .map(|c| class_targets(&self.tasks, c))
            .collect()
    }

    fn zero_grads(&self) -> Vec<LayerGrads> {
        self.net
            .layers
            .iter()
            .map(LayerParams::zero_grads)
            .collect()
    }

    pub fn train_epoch_dc(
        &mut self,
        data: &[ImageSample],
        rng: &mut impl Rng,
    ) -> Result<EpochStats> {
        if self.net.neuron != NeuronModel::Dc {
            return Err(Error::Config(
                "train_epoch_dc needs a single-step model".into(),
            ));
        }
        let classes = data
            .iter()
            .map(|s| image_classes(s, &self.tasks))
            .collect::<Result<Vec<_>>>()?;
        let targets = self.targets(&classes)?;
        self.run_epoch(&classes, rng, |tr, idx, srng, scale| {
            let sample = &data[idx];
            let x = bernoulli_encode(&sample.pixels, 0, srng).to_values();
            let masks = tr.masks(srng)?;
            let mut tape = DcTape::new();
            let y = dc_forward(&tr.net, &x, Some(&masks), Firing::Binary, Some(&mut tape))?;
            let mut gy = vec![0.0; y.len()];
            let loss = squared_hinge_row(&y, &targets[idx], scale, &mut gy);
            Ok((loss, y, gy, masks, Tape::Dc(tape)))
        })
    }

    pub fn train_epoch_ct(
        &mut self,
        data: &[SpikeFrameSequence],
        rng: &mut impl Rng,
    ) -> Result<EpochStats> {
        if self.net.neuron != NeuronModel::Ct {
            return Err(Error::Config(
                "train_epoch_ct needs a continuous-integration model".into(),
            ));
        }
        let t = self.cfg.t_train;
        if let Some(short) = data.iter().find(|s| s.steps() < t) {
            return Err(Error::Validation(format!(
                "sequence {} has {} steps, training unrolls {t}",
                short.meta.sample_id,
                short.steps()
            )));
        }
        let classes = data
            .iter()
            .map(|s| sequence_classes(&s.meta, &self.tasks))
            .collect::<Result<Vec<_>>>()?;
        let targets = self.targets(&classes)?;
        self.run_epoch(&classes, rng, |tr, idx, srng, scale| {
            let frames: Vec<Vec<f64>> = data[idx].frames[..t]
                .iter()
                .map(|f| f.to_values())
                .collect();
            let masks = tr.masks(srng)?;
            let mut tape = CtTape::default();
            let out = ct_forward(
                &tr.net,
                &frames,
                Some(&masks),
                Firing::Binary,
                Some(&mut tape),
            )?;
            let y = counts_to_margins(&out, t);
            let mut gy = vec![0.0; y.len()];
            let loss = squared_hinge_row(&y, &targets[idx], scale, &mut gy);
            Ok((loss, y, gy, masks, Tape::Ct(tape)))
        })
    }

    fn run_epoch<F>(
        &mut self,
        classes: &[Vec<usize>],
        rng: &mut impl Rng,
        sample: F,
    ) -> Result<EpochStats>
    where
        F: Fn(&Self, usize, &mut ChaCha8Rng, f64) -> Result<SampleOut> + Sync,
    {
        let n = classes.len();
        if n == 0 {
            return Err(Error::Validation("empty training set".into()));
        }
        let lr = self.lr();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let ste = SteConfig::new(self.cfg.theta, self.cfg.reset_grad)?;
        let t = self.cfg.t_train;
        let (mut loss_sum, mut correct, mut batches) = (0.0, 0usize, 0usize);
        for (b, batch) in order.chunks(self.cfg.batch_size).enumerate() {
            let batch_seed: u64 = rng.random();
            let scale = 1.0 / batch.len() as f64;
            let this = &*self;
            let chunks = batch
                .par_chunks(CHUNK)
                .enumerate()
                .map(|(c, ids)| {
                    let mut acc = ChunkResult {
                        grads: this.zero_grads(),
                        loss: 0.0,
                        correct: 0,
                    };
                    for (j, &idx) in ids.iter().enumerate() {
                        let mut srng = ChaCha8Rng::seed_from_u64(batch_seed);
                        srng.set_stream((c * CHUNK + j) as u64);
                        let (loss, y, gy, masks, tape) = sample(this, idx, &mut srng, scale)?;
                        acc.loss += loss;
                        acc.correct += group_argmax(&y, &this.tasks)
                            .iter()
                            .zip(&classes[idx])
                            .filter(|(p, c)| p == c)
                            .count();
                        match tape {
                            Tape::Dc(tape) => {
                                dc_backward(&this.net, &tape, &gy, Some(&masks), &mut acc.grads)?
                            }
                            Tape::Ct(tape) => {
                                // d y / d count = 2/T, identical at every step
                                let g: Vec<f64> = gy.iter().map(|g| g * 2.0 / t as f64).collect();
                                let per_step = vec![g; t];
                                ct_backward(
                                    &this.net,
                                    &tape,
                                    &per_step,
                                    &ste,
                                    Some(&masks),
                                    &mut acc.grads,
                                )?
                            }
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut grads = self.zero_grads();
            let mut batch_loss = 0.0;
            for c in chunks {
                batch_loss += c.loss;
                correct += c.correct;
                for (g, cg) in grads.iter_mut().zip(&c.grads) {
                    g.weights.add_assign(&cg.weights)?;
                    g.bias.add_assign(&cg.bias)?;
                }
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "loss at epoch {} batch {b}; {}",
                    self.epoch,
                    self.layer_stats()
                )));
            }
            self.apply(&grads, lr)?;
            loss_sum += batch_loss;
            batches += 1;
        }
        let stats = EpochStats {
            epoch: self.epoch,
            lr,
            loss: loss_sum / batches as f64,
            accuracy: correct as f64 / (n * self.tasks.len()) as f64,
        };
        self.epoch += 1;
        Ok(stats)
    }

    fn apply(&mut self, grads: &[LayerGrads], lr: f64) -> Result<()> {
        for ((layer, g), (aw, ab)) in self.net.layers.iter_mut().zip(grads).zip(&mut self.adam) {
            if layer.weights.is_empty() {
                continue;
            }
            adam_step(&mut layer.weights, &g.weights, aw, lr)?;
            adam_step(&mut layer.bias, &g.bias, ab, lr)?;
        }
        self.net.round_to_f32();
        if !self.net.all_finite() {
            return Err(Error::NonFinite(format!(
                "weights after update; {}",
                self.layer_stats()
            )));
        }
        Ok(())
    }

    /// `max|w|` and `max|b|` per layer, for diagnostics.
    pub fn layer_stats(&self) -> String {
        let max_abs = |d: &[f64]| d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.net
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                format!(
                    "layer {i}: max|w| {:.4e} max|b| {:.4e}",
                    max_abs(l.weights.data()),
                    max_abs(l.bias.data())
                )
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

enum Tape {
    Dc(DcTape),
    Ct(CtTape),
}

type SampleOut = (f64, Vec<f64>, Vec<f64>, Vec<DropoutMask>, Tape);

/// Spike counts over `t` steps mapped affinely from `[0, t]` to `[−1, 1]`.
pub fn counts_to_margins(out: &[Vec<f64>], t: usize) -> Vec<f64> {
    let width = out.first().map_or(0, Vec::len);
    let mut counts = vec![0.0; width];
    for step in out {
        for (c, s) in counts.iter_mut().zip(step) {
            *c += s;
        }
    }
    counts.iter().map(|c| 2.0 * c / t as f64 - 1.0).collect()
}
