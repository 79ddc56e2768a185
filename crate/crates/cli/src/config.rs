//! Flat `key = value` run configuration.
//!
//! Precedence, lowest first: preset defaults, config file, command-line
//! flags, `--set key=value`. The resolved map is echoed into the output
//! directory so a run can be repeated from it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dtsnn::model::{preset, LossTarget, PresetSpec};
use dtsnn::spiking::ResetGrad;
use dtsnn::train::{DcReadout, TrainConfig, DEFAULT_TRIALS};

pub const KEYS: &[&str] = &[
    "preset",
    "data",
    "out",
    "seed",
    "run_id",
    "timing",
    "epochs",
    "batch_size",
    "lr_start",
    "lr_end",
    "theta",
    "dropout",
    "t_train",
    "loss_target",
    "reset_grad",
    "n_train",
    "n_validation",
    "n_test",
    "checkpoint",
    "steps",
    "trials",
    "readout",
    "bits",
    "sweep",
    "model",
    "samples",
    "coefficients",
    "trace",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{origin}:{}: expected key = value, got {line:?}", n + 1))?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Layers file entries and overrides, rejecting unknown keys.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut entries = Vec::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            entries.extend(parse_kv(&text, &path.display().to_string())?);
        }
        entries.extend(overrides.iter().cloned());
        let mut values = BTreeMap::new();
        for (k, v) in entries {
            if !KEYS.contains(&k.as_str()) {
                bail!("unknown configuration key {k:?}");
            }
            values.insert(k, v);
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn set_default(&mut self, key: &str, value: impl ToString) {
        self.values
            .entry(key.to_owned())
            .or_insert_with(|| value.to_string());
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow!("invalid value {v:?} for {key}: {e}"))
            })
            .transpose()
    }

    pub fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => bail!("invalid boolean {v:?} for {key}"),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn preset(&self) -> Result<PresetSpec> {
        let id = self
            .get("preset")
            .ok_or_else(|| anyhow!("no preset given (use --preset)"))?;
        Ok(preset(id)?)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.path("out").unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn seed(&self) -> Result<u64> {
        self.parse_or("seed", 0)
    }

    /// Training configuration: preset defaults with any overrides applied.
    pub fn train_config(&self, spec: &PresetSpec) -> Result<TrainConfig> {
        let mut c = TrainConfig::from_preset(spec);
        c.seed = self.seed()?;
        c.epochs = self.parse_or("epochs", c.epochs)?;
        c.batch_size = self.parse_or("batch_size", c.batch_size)?;
        c.lr_start = self.parse_or("lr_start", c.lr_start)?;
        c.lr_end = self.parse_or("lr_end", c.lr_end)?;
        c.theta = self.parse_or("theta", c.theta)?;
        c.t_train = self.parse_or("t_train", c.t_train)?;
        if let Some(d) = self.get("dropout") {
            c.dropout = d
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| anyhow!("invalid dropout {x:?}: {e}"))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(t) = self.get("loss_target") {
            c.loss_target = match t {
                "output_potentials" => LossTarget::OutputPotentials,
                "spike_counts" => LossTarget::SpikeCounts,
                other => bail!("invalid loss_target {other:?} (output_potentials | spike_counts)"),
            };
        }
        if let Some(r) = self.get("reset_grad") {
            c.reset_grad = match r {
                "ste" => ResetGrad::Ste,
                "detached" => ResetGrad::Detached,
                other => bail!("invalid reset_grad {other:?} (ste | detached)"),
            };
        }
        Ok(c)
    }

    pub fn readout(&self) -> Result<DcReadout> {
        Ok(match self.get("readout").unwrap_or("potential") {
            "potential" => DcReadout::PotentialSum,
            "vote" => DcReadout::SpikeVote,
            other => bail!("invalid readout {other:?} (potential | vote)"),
        })
    }

    pub fn trials(&self) -> Result<usize> {
        self.parse_or("trials", DEFAULT_TRIALS)
    }

    /// Records the effective training values so the echo is complete.
    pub fn resolve_training(&mut self, c: &TrainConfig) {
        let dropout: Vec<String> = c.dropout.iter().map(f64::to_string).collect();
        self.set_default("epochs", c.epochs);
        self.set_default("batch_size", c.batch_size);
        self.set_default("lr_start", c.lr_start);
        self.set_default("lr_end", c.lr_end);
        self.set_default("theta", c.theta);
        self.set_default("dropout", dropout.join(","));
        self.set_default("t_train", c.t_train);
        self.set_default(
            "loss_target",
            match c.loss_target {
                LossTarget::OutputPotentials => "output_potentials",
                LossTarget::SpikeCounts => "spike_counts",
            },
        );
        self.set_default(
            "reset_grad",
            match c.reset_grad {
                ResetGrad::Ste => "ste",
                ResetGrad::Detached => "detached",
            },
        );
        self.set_default("seed", c.seed);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
