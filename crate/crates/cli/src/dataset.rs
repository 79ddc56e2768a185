//! Dataset selection for a preset.
//!
//! Single-step presets read an IDX directory (default `data/mnist-subset`),
//! `nmnist-mlp` reads an N-MNIST directory, `bar-mlp` synthesises moving-bar
//! sequences from the seed. Unset split sizes default to 10% validation,
//! 10% test and the rest for training (bar: 2000 / 500 / 500).

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use dtsnn::data::{
    augment_with_reversal, load_mnist_dir, load_nmnist_dir, moving_bar_dataset, nmnist_bin_spec,
    DatasetSplit, ImageSample, SpikeFrameSequence,
};
use dtsnn::model::{NeuronModel, PresetSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;

pub const DEFAULT_MNIST_DIR: &str = "data/mnist-subset";

pub enum Data {
    Images(DatasetSplit<ImageSample>),
    Sequences(DatasetSplit<SpikeFrameSequence>),
}

fn sizes(cfg: &RunConfig, pool: usize) -> Result<(usize, usize, usize)> {
    let n_val = cfg.parse_or("n_validation", pool / 10)?;
    let n_test = cfg.parse_or("n_test", pool / 10)?;
    let n_train = cfg.parse_or("n_train", pool.saturating_sub(n_val + n_test))?;
    Ok((n_train, n_val, n_test))
}

pub fn load(cfg: &RunConfig, spec: &PresetSpec) -> Result<Data> {
    match (spec.neuron, spec.id) {
        (NeuronModel::Dc, _) => {
            let dir = cfg
                .path("data")
                .unwrap_or_else(|| PathBuf::from(DEFAULT_MNIST_DIR));
            let pool = load_mnist_dir(&dir)
                .with_context(|| format!("loading dataset {}", dir.display()))?;
            let (a, b, c) = sizes(cfg, pool.len())?;
            Ok(Data::Images(DatasetSplit::consecutive(pool, a, b, c)?))
        }
        (NeuronModel::Ct, "bar-mlp") => {
            let grid = (spec.input_shape.iter().product::<usize>() as f64).sqrt() as usize;
            let a = cfg.parse_or("n_train", 2000)?;
            let b = cfg.parse_or("n_validation", 500)?;
            let c = cfg.parse_or("n_test", 500)?;
            let pool = moving_bar_dataset(cfg.seed()?, a + b + c, spec.steps, grid)?;
            Ok(Data::Sequences(DatasetSplit::consecutive(pool, a, b, c)?))
        }
        (NeuronModel::Ct, _) => {
            let Some(dir) = cfg.path("data") else {
                bail!("preset {} needs an N-MNIST directory (use --data)", spec.id);
            };
            let mut pool = load_nmnist_dir(&dir, &nmnist_bin_spec(spec.steps))
                .with_context(|| format!("loading dataset {}", dir.display()))?;
            pool.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed()?));
            let (a, b, c) = sizes(cfg, pool.len())?;
            let mut split = DatasetSplit::consecutive(pool, a, b, c)?;
            split.train = augment_with_reversal(&split.train);
            Ok(Data::Sequences(split))
        }
    }
}
