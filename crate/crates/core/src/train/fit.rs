//! Multi-epoch driver that tracks the best-validation model alongside the
//! final one and emits metrics records.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eval::{evaluate_ct, evaluate_dc, DcEvalConfig};
use super::trainer::{EpochStats, Trainer};
use crate::data::{ImageSample, SpikeFrameSequence};
use crate::error::Result;
use crate::metrics::MetricsRecord;
use crate::model::Network;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub run_id: String,
    /// Bernoulli trials per validation image (single-step models).
    pub validation_trials: usize,
    /// Steps and trials of the final test sweep.
    pub test_steps: usize,
    pub test_trials: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            run_id: "run".into(),
            validation_trials: 1,
            test_steps: 1,
            test_trials: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub epochs: Vec<EpochStats>,
    pub validation: Vec<f64>,
    pub best_epoch: usize,
    pub best_net: Network,
    /// Test accuracy per step count for the best-validation and final models.
    pub test_best: Vec<f64>,
    pub test_final: Vec<f64>,
    pub records: Vec<MetricsRecord>,
}

impl FitReport {
    pub fn best_validation(&self) -> f64 {
        self.validation[self.best_epoch]
    }

    pub fn final_validation(&self) -> f64 {
        *self.validation.last().expect("at least one epoch")
    }
}

fn epoch_records(run: &str, s: &EpochStats, val: f64) -> [MetricsRecord; 4] {
    let e = s.epoch as u64;
    [
        MetricsRecord::new(run, "train", e, "loss", s.loss),
        MetricsRecord::new(run, "train", e, "accuracy", s.accuracy),
        MetricsRecord::new(run, "train", e, "lr", s.lr),
        MetricsRecord::new(run, "validation", e, "accuracy", val),
    ]
}

fn test_records(run: &str, which: &str, acc: &[f64], first_step: u64) -> Vec<MetricsRecord> {
    acc.iter()
        .enumerate()
        .map(|(t, &a)| MetricsRecord::new(run, which, first_step + t as u64, "accuracy", a))
        .collect()
}

fn drive<D, E, T>(
    trainer: &mut Trainer,
    opts: &FitOptions,
    mut train_epoch: E,
    mut validate: D,
    mut test: T,
    first_test_step: u64,
) -> Result<FitReport>
where
    E: FnMut(&mut Trainer, &mut ChaCha8Rng) -> Result<EpochStats>,
    D: FnMut(&Network) -> Result<f64>,
    T: FnMut(&Network) -> Result<Vec<f64>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(trainer.cfg.seed);
    rng.set_stream(1);
    let mut epochs = Vec::new();
    let mut validation = Vec::new();
    let mut records = Vec::new();
    let mut best: Option<(usize, f64, Network)> = None;
    while trainer.epoch < trainer.cfg.epochs {
        let stats = train_epoch(trainer, &mut rng)?;
        let val = validate(&trainer.net)?;
        records.extend(epoch_records(&opts.run_id, &stats, val));
        let i = epochs.len();
        if best.as_ref().is_none_or(|(_, b, _)| val > *b) {
            best = Some((i, val, trainer.net.clone()));
        }
        epochs.push(stats);
        validation.push(val);
    }
    let (best_epoch, _, best_net) = best.unwrap_or((0, 0.0, trainer.net.clone()));
    if validation.is_empty() {
        validation.push(validate(&trainer.net)?);
    }
    let test_best = test(&best_net)?;
    let test_final = test(&trainer.net)?;
    records.extend(test_records(
        &opts.run_id,
        "test_best",
        &test_best,
        first_test_step,
    ));
    records.extend(test_records(
        &opts.run_id,
        "test_final",
        &test_final,
        first_test_step,
    ));
    Ok(FitReport {
        epochs,
        validation,
        best_epoch,
        best_net,
        test_best,
        test_final,
        records,
    })
}

/// Trains a single-step model for the remaining epochs of `trainer.cfg`.
pub fn fit_dc(
    trainer: &mut Trainer,
    train: &[ImageSample],
    validation: &[ImageSample],
    test: &[ImageSample],
    opts: &FitOptions,
) -> Result<FitReport> {
    let seed = trainer.cfg.seed;
    let val_cfg = DcEvalConfig {
        n_trials: opts.validation_trials,
        seed,
        ..DcEvalConfig::new(1)
    };
    let test_cfg = DcEvalConfig {
        t_eval: opts.test_steps,
        n_trials: opts.test_trials,
        seed,
        ..DcEvalConfig::new(1)
    };
    drive(
        trainer,
        opts,
        |tr, rng| tr.train_epoch_dc(train, rng),
        |net| Ok(evaluate_dc(net, validation, &val_cfg)?[0]),
        |net| evaluate_dc(net, test, &test_cfg),
        1,
    )
}

/// Trains a temporal model; validation is the mean per-task accuracy after
/// `t_train` steps and the test sweep reports that mean for every step count.
pub fn fit_ct(
    trainer: &mut Trainer,
    train: &[SpikeFrameSequence],
    validation: &[SpikeFrameSequence],
    test: &[SpikeFrameSequence],
    opts: &FitOptions,
) -> Result<FitReport> {
    let tasks = trainer.tasks.clone();
    let t = trainer.cfg.t_train;
    let steps = opts.test_steps.max(1);
    drive(
        trainer,
        opts,
        |tr, rng| tr.train_epoch_ct(train, rng),
        |net| Ok(evaluate_ct(net, validation, t, &tasks)?.final_mean()),
        |net| {
            let e = evaluate_ct(net, test, steps, &tasks)?;
            Ok((0..=steps)
                .map(|s| e.accuracy.iter().map(|a| a[s]).sum::<f64>() / tasks.len() as f64)
                .collect())
        },
        0,
    )
}
