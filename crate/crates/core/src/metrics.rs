//! Append-only metrics records, one per line, as CSV with a header row.
//!
//! Columns: `run_id, phase, step, metric, value, wall_clock`. Values are
//! written in shortest round-trip form, so parsing recovers them exactly.
//! `wall_clock` is optional and left empty unless timing is requested,
//! which keeps metrics files of seeded runs byte-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub run_id: String,
    pub phase: String,
    pub step: u64,
    pub metric: String,
    pub value: f64,
    pub wall_clock: Option<f64>,
}

impl MetricsRecord {
    pub fn new(run_id: &str, phase: &str, step: u64, metric: &str, value: f64) -> Self {
        Self {
            run_id: run_id.to_owned(),
            phase: phase.to_owned(),
            step,
            metric: metric.to_owned(),
            value,
            wall_clock: None,
        }
    }
}

const HEADER: [&str; 6] = ["run_id", "phase", "step", "metric", "value", "wall_clock"];

pub fn emit_metrics(records: &[MetricsRecord], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
