//! Named architectures with their default training hyperparameters.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeuronModel {
    /// Discontinuous integration: membrane recomputed every step.
    Dc,
    /// Continuous integration: membrane carried across steps.
    Ct,
}

impl NeuronModel {
    pub fn code(self) -> u8 {
        match self {
            NeuronModel::Dc => 0,
            NeuronModel::Ct => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(NeuronModel::Dc),
            1 => Ok(NeuronModel::Ct),
            other => Err(Error::Format(format!("unknown neuron model code {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Dense(usize),
    Conv5x5(usize),
    MaxPool2x2,
}

/// Output readout group of a temporal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    /// Ten digit classes.
    Digit,
    /// Up / down motion.
    Motion,
}

impl Task {
    pub fn classes(self) -> usize {
        match self {
            Task::Digit => 10,
            Task::Motion => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Digit => "digit",
            Task::Motion => "motion",
        }
    }
}

/// What the loss is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTarget {
    /// Raw potentials of a non-firing output layer (DC models).
    OutputPotentials,
    /// Output spike counts over the sequence (CT models).
    SpikeCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetSpec {
    pub id: &'static str,
    pub neuron: NeuronModel,
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    /// Dropout ratio applied to the input of each entry of `layers`.
    pub dropout: Vec<f64>,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub steps: usize,
    pub loss_target: LossTarget,
    pub tasks: Vec<Task>,
}

pub const PRESET_IDS: [&str; 6] = [
    "mlp-128",
    "mlp-256",
    "mlp-1024",
    "conv",
    "nmnist-mlp",
    "bar-mlp",
];

fn dc_mlp(
    id: &'static str,
    hidden: usize,
    hidden_dropout: f64,
    epochs: usize,
    lr_end: f64,
) -> PresetSpec {
    PresetSpec {
        id,
        neuron: NeuronModel::Dc,
        input_shape: vec![784],
        layers: vec![
            LayerSpec::Dense(hidden),
            LayerSpec::Dense(hidden),
            LayerSpec::Dense(10),
        ],
        dropout: vec![0.2, hidden_dropout, hidden_dropout],
        epochs,
        lr_start: 1e-3,
        lr_end,
        steps: 1,
        loss_target: LossTarget::OutputPotentials,
        tasks: vec![Task::Digit],
    }
}

pub fn preset(id: &str) -> Result<PresetSpec> {
    Ok(match id {
        "mlp-128" => dc_mlp("mlp-128", 128, 0.1, 20, 1e-3),
        "mlp-256" => dc_mlp("mlp-256", 256, 0.1, 400, 1e-7),
        "mlp-1024" => dc_mlp("mlp-1024", 1024, 0.3, 400, 1e-7),
        "conv" => PresetSpec {
            id: "conv",
            neuron: NeuronModel::Dc,
            input_shape: vec![1, 28, 28],
            layers: vec![
                LayerSpec::Conv5x5(12),
                LayerSpec::MaxPool2x2,
                LayerSpec::Conv5x5(64),
                LayerSpec::MaxPool2x2,
                LayerSpec::Dense(512),
                LayerSpec::Dense(10),
            ],
            dropout: vec![0.0; 6],
            epochs: 200,
            lr_start: 1e-3,
            lr_end: 1e-5,
            steps: 1,
            loss_target: LossTarget::OutputPotentials,
            tasks: vec![Task::Digit],
        },
        "nmnist-mlp" => PresetSpec {
            id: "nmnist-mlp",
            neuron: NeuronModel::Ct,
            input_shape: vec![34 * 34],
            layers: vec![
                LayerSpec::Dense(256),
                LayerSpec::Dense(256),
                LayerSpec::Dense(12),
            ],
            dropout: vec![0.2, 0.1, 0.1],
            epochs: 200,
            lr_start: 1e-3,
            lr_end: 1e-5,
            steps: 16,
            loss_target: LossTarget::SpikeCounts,
            tasks: vec![Task::Digit, Task::Motion],
        },
        "bar-mlp" => PresetSpec {
            id: "bar-mlp",
            neuron: NeuronModel::Ct,
            input_shape: vec![16 * 16],
            layers: vec![
                LayerSpec::Dense(64),
                LayerSpec::Dense(64),
                LayerSpec::Dense(2),
            ],
            dropout: vec![0.0; 3],
            epochs: 30,
            lr_start: 1e-3,
            lr_end: 1e-4,
            steps: 16,
            loss_target: LossTarget::SpikeCounts,
            tasks: vec![Task::Motion],
        },
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (known: {})",
                PRESET_IDS.join(", ")
            )))
        }
    })
}

impl PresetSpec {
    pub fn output_dim(&self) -> usize {
        self.tasks.iter().map(|t| t.classes()).sum()
    }
}
