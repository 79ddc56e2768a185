//! Per-cycle trace file: CSV with one line per cycle per layer.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceLine {
    pub cycle: u64,
    pub layer: usize,
    pub phase: &'static str,
    /// Presynaptic index consumed in an integrating cycle.
    pub index: Option<usize>,
}

pub fn write_trace(lines: &[TraceLine], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for l in lines {
        w.serialize(l)?;
    }
    w.flush()?;
    Ok(())
}
