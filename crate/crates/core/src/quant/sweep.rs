//! Accuracy of integer inference and the precision sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::QuantizedModel;
use crate::data::{bernoulli_encode, ImageSample, SpikeFrameSequence};
use crate::error::{Error, Result};
use crate::model::{dc_forward, Network, NeuronModel, Task};
use crate::spiking::Firing;
use crate::train::content_seed;
use crate::train::{argmax, evaluate_ct, group_argmax, CtEvaluation, DcEvalConfig, DcReadout};

/// Integer-path counterpart of `evaluate_dc`, drawing the same encodings.
pub fn evaluate_quantized_dc(
    model: &QuantizedModel,
    images: &[ImageSample],
    cfg: &DcEvalConfig,
) -> Result<Vec<f64>> {
    if model.neuron != NeuronModel::Dc {
        return Err(Error::Config(
            "single-step evaluation of a temporal model".into(),
        ));
    }
    if cfg.t_eval == 0 || cfg.n_trials == 0 {
        return Err(Error::Validation("t_eval and n_trials must be ≥ 1".into()));
    }
    if images.is_empty() {
        return Ok(vec![0.0; cfg.t_eval]);
    }
    let correct = images
        .par_iter()
        .map(|img| -> Result<Vec<u64>> {
            let label = img.label as usize;
            let mut hits = vec![0u64; cfg.t_eval];
            let seed = content_seed(cfg.seed, img);
            for trial in 0..cfg.n_trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial as u64);
                let mut acc = vec![0i64; model.output_dim()];
                for (t, hit) in hits.iter_mut().enumerate() {
                    let x = bernoulli_encode(&img.pixels, t, &mut rng);
                    let step = model.forward_dc(&x)?;
                    let last = model.layers.last().expect("non-empty");
                    for (a, &v) in acc.iter_mut().zip(step.output_potentials()) {
                        *a += match cfg.readout {
                            DcReadout::PotentialSum => v,
                            DcReadout::SpikeVote => i64::from(v > last.theta_q),
                        };
                    }
                    *hit += u64::from(argmax_i64(&acc) == label);
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

fn argmax_i64(v: &[i64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Integer-path counterpart of `evaluate_ct`.
pub fn evaluate_quantized_ct(
    model: &QuantizedModel,
    sequences: &[SpikeFrameSequence],
    t_eval: usize,
    tasks: &[Task],
) -> Result<CtEvaluation> {
    if model.neuron != NeuronModel::Ct {
        return Err(Error::Config(
            "temporal evaluation of a single-step model".into(),
        ));
    }
    let per_seq = sequences
        .par_iter()
        .map(|seq| -> Result<Vec<Vec<bool>>> {
            if seq.steps() < t_eval {
                return Err(Error::Validation(format!(
                    "sequence {} has {} steps, evaluation needs {t_eval}",
                    seq.meta.sample_id,
                    seq.steps()
                )));
            }
            let classes = crate::train::sequence_classes(&seq.meta, tasks)?;
            let steps = model.run(&seq.frames[..t_eval])?;
            let mut counts = vec![0.0; model.output_dim()];
            let mut hits = vec![Vec::with_capacity(t_eval + 1); tasks.len()];
            for t in 0..=t_eval {
                if t > 0 {
                    for (c, b) in counts.iter_mut().zip(&steps[t - 1].output_frame().bits) {
                        *c += f64::from(u8::from(*b));
                    }
                }
                for (k, (p, c)) in group_argmax(&counts, tasks)
                    .iter()
                    .zip(&classes)
                    .enumerate()
                {
                    hits[k].push(p == c);
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = sequences.len().max(1) as f64;
    let accuracy = (0..tasks.len())
        .map(|k| {
            (0..=t_eval)
                .map(|t| per_seq.iter().filter(|h| h[k][t]).count() as f64 / n)
                .collect()
        })
        .collect();
    Ok(CtEvaluation {
        tasks: tasks.to_vec(),
        accuracy,
    })
}

/// Fraction of images on which float and integer inference predict the same
/// class from the same single-step encoding.
pub fn prediction_agreement(
    net: &Network,
    model: &QuantizedModel,
    images: &[ImageSample],
    seed: u64,
) -> Result<f64> {
    if images.is_empty() {
        return Ok(1.0);
    }
    let agree = images
        .par_iter()
        .map(|img| -> Result<u64> {
            let mut rng = ChaCha8Rng::seed_from_u64(content_seed(seed, img));
            let x = bernoulli_encode(&img.pixels, 0, &mut rng);
            let y = dc_forward(net, &x.to_values(), None, Firing::Binary, None)?;
            let q = model.forward_dc(&x)?;
            Ok(u64::from(argmax(&y) == argmax_i64(q.output_potentials())))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(agree as f64 / images.len() as f64)
}

/// Evaluation set of a sweep.
#[derive(Debug, Clone, Copy)]
pub enum SweepData<'a> {
    Images(&'a [ImageSample], DcEvalConfig),
    Sequences(&'a [SpikeFrameSequence], usize, &'a [Task]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub bits: u8,
    /// Accuracy after the last evaluated step (mean over tasks for temporal models).
    pub accuracy: f64,
}

/// Quantizes `net` at each bit width and evaluates it; one row per width.
pub fn precision_sweep(
    net: &Network,
    data: SweepData<'_>,
    bits_list: &[u8],
) -> Result<Vec<SweepRow>> {
    bits_list
        .par_iter()
        .map(|&bits| {
            let m = QuantizedModel::from_network(net, bits)?;
            let accuracy = match data {
                SweepData::Images(images, cfg) => *evaluate_quantized_dc(&m, images, &cfg)?
                    .last()
                    .expect("t_eval ≥ 1"),
                SweepData::Sequences(seqs, t, tasks) => {
                    evaluate_quantized_ct(&m, seqs, t, tasks)?.final_mean()
                }
            };
            Ok(SweepRow { bits, accuracy })
        })
        .collect()
}

/// Float accuracy on the same data, as the sweep's reference point.
pub fn float_accuracy(net: &Network, data: SweepData<'_>) -> Result<f64> {
    Ok(match data {
        SweepData::Images(images, cfg) => *crate::train::evaluate_dc(net, images, &cfg)?
            .last()
            .expect("t_eval ≥ 1"),
        SweepData::Sequences(seqs, t, tasks) => evaluate_ct(net, seqs, t, tasks)?.final_mean(),
    })
}
