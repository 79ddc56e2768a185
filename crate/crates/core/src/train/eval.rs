//! Accuracy as a function of the number of time steps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::targets::{argmax, group_argmax, image_classes, sequence_classes};
use crate::data::{bernoulli_encode, ImageSample, SpikeFrameSequence};
use crate::error::{Error, Result};
use crate::model::{ct_forward, dc_forward, Network, NeuronModel, Task};
use crate::spiking::Firing;

pub const DEFAULT_TRIALS: usize = 20;

/// How multi-step DC outputs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DcReadout {
    /// Running sum of output potentials.
    #[default]
    PotentialSum,
    /// Running count of output potentials above threshold.
    SpikeVote,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcEvalConfig {
    pub t_eval: usize,
    pub n_trials: usize,
    pub readout: DcReadout,
    pub seed: u64,
}

impl DcEvalConfig {
    pub fn new(t_eval: usize) -> Self {
        Self {
            t_eval,
            n_trials: DEFAULT_TRIALS,
            readout: DcReadout::PotentialSum,
            seed: 0,
        }
    }
}

/// Per-image encoder seed from the image content, so results do not depend
/// on sample order.
pub(crate) fn content_seed(seed: u64, sample: &ImageSample) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([sample.label]);
    h.update(&sample.pixels);
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Accuracy after `t = 1..=t_eval` steps (`result[t−1]`), averaged over
/// trials. Every step is a fresh Bernoulli encoding of the image.
pub fn evaluate_dc(net: &Network, images: &[ImageSample], cfg: &DcEvalConfig) -> Result<Vec<f64>> {
    if net.neuron != NeuronModel::Dc {
        return Err(Error::Config(
            "evaluate_dc needs a single-step model".into(),
        ));
    }
    if cfg.t_eval == 0 || cfg.n_trials == 0 {
        return Err(Error::Validation("t_eval and n_trials must be ≥ 1".into()));
    }
    if images.is_empty() {
        return Ok(vec![0.0; cfg.t_eval]);
    }
    let tasks = [Task::Digit];
    let correct = images
        .par_iter()
        .map(|img| -> Result<Vec<u64>> {
            let label = image_classes(img, &tasks)?[0];
            let mut hits = vec![0u64; cfg.t_eval];
            let seed = content_seed(cfg.seed, img);
            for trial in 0..cfg.n_trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial as u64);
                let mut acc = vec![0.0; net.output_dim()];
                for (t, hit) in hits.iter_mut().enumerate() {
                    let x = bernoulli_encode(&img.pixels, t, &mut rng).to_values();
                    let y = dc_forward(net, &x, None, Firing::Binary, None)?;
                    for (a, v) in acc.iter_mut().zip(&y) {
                        *a += match cfg.readout {
                            DcReadout::PotentialSum => *v,
                            DcReadout::SpikeVote => f64::from(u8::from(*v > net.theta)),
                        };
                    }
                    *hit += u64::from(argmax(&acc) == label);
                }
            }
            Ok(hits)
        })
        .try_reduce(
            || vec![0u64; cfg.t_eval],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let total = (images.len() * cfg.n_trials) as f64;
    Ok(correct.iter().map(|&c| c as f64 / total).collect())
}

/// Per-task accuracy of a CT model from cumulative output spike counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CtEvaluation {
    pub tasks: Vec<Task>,
    /// `accuracy[task][t]` after `t` steps, `t = 0..=t_eval`.
    pub accuracy: Vec<Vec<f64>>,
}

impl CtEvaluation {
    pub fn task(&self, task: Task) -> Option<&[f64]> {
        self.tasks
            .iter()
            .position(|&t| t == task)
            .map(|i| self.accuracy[i].as_slice())
    }

    /// Mean over tasks of the accuracy after the last step.
    pub fn final_mean(&self) -> f64 {
        let n = self.accuracy.len().max(1) as f64;
        self.accuracy.iter().filter_map(|a| a.last()).sum::<f64>() / n
    }
}

/// Runs every sequence once for `t_eval` steps. At `t = 0` all counts are
/// zero and every group predicts index 0.
pub fn evaluate_ct(
    net: &Network,
    sequences: &[SpikeFrameSequence],
    t_eval: usize,
    tasks: &[Task],
) -> Result<CtEvaluation> {
    if net.neuron != NeuronModel::Ct {
        return Err(Error::Config(
            "evaluate_ct needs a continuous-integration model".into(),
        ));
    }
    if let Some(short) = sequences.iter().find(|s| s.steps() < t_eval) {
        return Err(Error::Validation(format!(
            "sequence {} has {} steps, evaluation needs {t_eval}",
            short.meta.sample_id,
            short.steps()
        )));
    }
    let zero = || vec![vec![0u64; t_eval + 1]; tasks.len()];
    let hits = sequences
        .par_iter()
        .map(|seq| -> Result<Vec<Vec<u64>>> {
            let classes = sequence_classes(&seq.meta, tasks)?;
            let frames: Vec<Vec<f64>> =
                seq.frames[..t_eval].iter().map(|f| f.to_values()).collect();
            let out = ct_forward(net, &frames, None, Firing::Binary, None)?;
            let mut counts = vec![0.0; net.output_dim()];
            let mut hits = zero();
            for t in 0..=t_eval {
                if t > 0 {
                    counts
                        .iter_mut()
                        .zip(&out[t - 1])
                        .for_each(|(c, s)| *c += s);
                }
                for (k, (p, c)) in group_argmax(&counts, tasks)
                    .iter()
                    .zip(&classes)
                    .enumerate()
                {
                    hits[k][t] += u64::from(p == c);
                }
            }
            Ok(hits)
        })
        .try_reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            Ok(a)
        })?;
    let n = sequences.len().max(1) as f64;
    Ok(CtEvaluation {
        tasks: tasks.to_vec(),
        accuracy: hits
            .into_iter()
            .map(|h| h.into_iter().map(|c| c as f64 / n).collect())
            .collect(),
    })
}
