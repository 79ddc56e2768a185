//! Training loops, learning-rate schedule, evaluation sweeps and
//! checkpoints.

mod checkpoint;
mod config;
mod eval;
mod fit;
mod schedule;
mod targets;
mod trainer;

pub use checkpoint::{
    checkpoint_bytes, load_checkpoint, load_checkpoint_for, parse_checkpoint, save_checkpoint,
    CheckpointMeta, CHECKPOINT_VERSION,
};
pub use config::{TrainConfig, DEFAULT_BATCH_SIZE};
pub(crate) use eval::content_seed;
pub use eval::{evaluate_ct, evaluate_dc, CtEvaluation, DcEvalConfig, DcReadout, DEFAULT_TRIALS};
pub use fit::{fit_ct, fit_dc, FitOptions, FitReport};
pub use schedule::{lr_exponential_decay, LrSchedule};
pub use targets::{
    argmax, class_targets, group_argmax, image_classes, output_width, sequence_classes,
    DualTaskTargets,
};
pub use trainer::{counts_to_margins, EpochStats, Trainer};
