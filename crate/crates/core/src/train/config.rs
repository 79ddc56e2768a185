use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{LossTarget, NeuronModel, PresetSpec};
use crate::spiking::ResetGrad;

use super::schedule::LrSchedule;

pub const DEFAULT_BATCH_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub preset: String,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub theta: f64,
    /// Dropout ratio on the input of each layer.
    pub dropout: Vec<f64>,
    pub t_train: usize,
    pub loss_target: LossTarget,
    pub reset_grad: ResetGrad,
    pub seed: u64,
}

impl TrainConfig {
    pub fn from_preset(spec: &PresetSpec) -> Self {
        Self {
            preset: spec.id.to_owned(),
            epochs: spec.epochs,
            batch_size: DEFAULT_BATCH_SIZE,
            lr_start: spec.lr_start,
            lr_end: spec.lr_end,
            theta: 1.0,
            dropout: spec.dropout.clone(),
            t_train: spec.steps,
            loss_target: spec.loss_target,
            reset_grad: ResetGrad::Ste,
            seed: 0,
        }
    }

    pub fn schedule(&self) -> LrSchedule {
        LrSchedule::new(self.lr_start, self.lr_end, self.epochs)
    }

    pub fn validate(&self, neuron: NeuronModel, layers: usize) -> Result<()> {
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end) {
            return Err(Error::Config(format!(
                "need lr_start ≥ lr_end > 0, got {} and {}",
                self.lr_start, self.lr_end
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be ≥ 1".into()));
        }
        // the straight-through window [0, 2] is centred on a unit threshold
        if self.theta != 1.0 {
            return Err(Error::Config(format!(
                "training requires theta = 1, got {}",
                self.theta
            )));
        }
        if self.dropout.len() != layers {
            return Err(Error::Config(format!(
                "{} dropout ratios for {layers} layers",
                self.dropout.len()
            )));
        }
        if let Some(r) = self.dropout.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::Config(format!("dropout ratio {r} outside [0, 1)")));
        }
        match (neuron, self.loss_target) {
            (NeuronModel::Dc, LossTarget::OutputPotentials) if self.t_train == 1 => Ok(()),
            (NeuronModel::Dc, LossTarget::OutputPotentials) => Err(Error::Config(format!(
                "single-step models train with t_train = 1, got {}",
                self.t_train
            ))),
            (NeuronModel::Ct, LossTarget::SpikeCounts) if self.t_train >= 1 => Ok(()),
            (NeuronModel::Ct, LossTarget::SpikeCounts) => {
                Err(Error::Config("t_train must be ≥ 1".into()))
            }
            (n, t) => Err(Error::Config(format!(
                "loss target {t:?} does not fit a {n:?} model"
            ))),
        }
    }

    /// SHA-256 of the canonical debug rendering, stored in checkpoints.
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(format!("{self:?}").as_bytes()).into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;

    #[test]
    fn preset_defaults_validate() {
        for id in crate::model::PRESET_IDS {
            let spec = preset(id).unwrap();
            let cfg = TrainConfig::from_preset(&spec);
            assert_eq!(cfg.batch_size, 100);
            cfg.validate(spec.neuron, spec.layers.len()).unwrap();
        }
    }

    #[test]
    fn rejects_bad_values() {
        let spec = preset("mlp-256").unwrap();
        let base = TrainConfig::from_preset(&spec);
        let n = spec.layers.len();
        let mut c = base.clone();
        c.lr_end = 1e-2;
        assert!(c.validate(spec.neuron, n).is_err());
        let mut c = base.clone();
        c.batch_size = 0;
        assert!(c.validate(spec.neuron, n).is_err());
        let mut c = base.clone();
        c.theta = 0.5;
        assert!(c.validate(spec.neuron, n).is_err());
        let mut c = base;
        c.t_train = 4;
        assert!(c.validate(spec.neuron, n).is_err());
    }

    #[test]
    fn hash_tracks_changes() {
        let spec = preset("mlp-256").unwrap();
        let a = TrainConfig::from_preset(&spec);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
