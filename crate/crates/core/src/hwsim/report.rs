//! Sparsity and linear energy estimates from activity counters.

use super::pipeline::ActivityCounters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityReport {
    /// Active fraction of each layer's presynaptic inputs, over all steps.
    pub per_layer: Vec<f64>,
    /// Active inputs over all layers and steps divided by total input slots.
    pub aggregate: f64,
}

/// `row fetches / (fan-in · steps)` per layer and overall.
pub fn report_sparsity(counters: &ActivityCounters) -> SparsityReport {
    let mut fetched = 0u64;
    let mut slots = 0u64;
    let per_layer = counters
        .layers
        .iter()
        .zip(&counters.fan_in)
        .map(|(l, &fan_in)| {
            let s = (fan_in * l.active_per_step.len()) as u64;
            fetched += l.weight_row_fetches;
            slots += s;
            if s == 0 {
                0.0
            } else {
                l.weight_row_fetches as f64 / s as f64
            }
        })
        .collect();
    SparsityReport {
        per_layer,
        aggregate: if slots == 0 {
            0.0
        } else {
            fetched as f64 / slots as f64
        },
    }
}

pub const DEFAULT_FREQUENCY_MHZ: f64 = 163.0;

/// Linear energy model coefficients. They are calibration inputs, not
/// measured silicon values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCoefficients {
    pub row_fetch_nj: f64,
    pub accumulate_nj: f64,
    pub fire_check_nj: f64,
    /// Charged for every stalled or idle engine cycle.
    pub idle_cycle_nj: f64,
    pub frequency_mhz: f64,
}

impl EnergyCoefficients {
    pub const ZERO: Self = Self {
        row_fetch_nj: 0.0,
        accumulate_nj: 0.0,
        fire_check_nj: 0.0,
        idle_cycle_nj: 0.0,
        frequency_mhz: DEFAULT_FREQUENCY_MHZ,
    };

    /// Illustrative placeholder values.
    pub fn illustrative() -> Self {
        Self {
            row_fetch_nj: 0.02,
            accumulate_nj: 0.0005,
            fire_check_nj: 0.0005,
            idle_cycle_nj: 0.001,
            frequency_mhz: DEFAULT_FREQUENCY_MHZ,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("row_fetch_nj", self.row_fetch_nj),
            ("accumulate_nj", self.accumulate_nj),
            ("fire_check_nj", self.fire_check_nj),
            ("idle_cycle_nj", self.idle_cycle_nj),
        ];
        for (name, v) in named {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "coefficient {name} = {v} must be ≥ 0"
                )));
            }
        }
        if !(self.frequency_mhz > 0.0 && self.frequency_mhz.is_finite()) {
            return Err(Error::Validation(format!(
                "frequency {} MHz must be > 0",
                self.frequency_mhz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub total_nj: f64,
    pub per_layer_nj: Vec<f64>,
    pub wall_time_us: f64,
}

/// `cycles / MHz` in microseconds.
pub fn wall_time_us(cycles: u64, frequency_mhz: f64) -> f64 {
    cycles as f64 / frequency_mhz
}

pub fn estimate_energy(
    counters: &ActivityCounters,
    c: &EnergyCoefficients,
) -> Result<EnergyReport> {
    c.validate()?;
    let per_layer_nj: Vec<f64> = counters
        .layers
        .iter()
        .map(|l| {
            l.weight_row_fetches as f64 * c.row_fetch_nj
                + l.accumulate_ops as f64 * c.accumulate_nj
                + l.neuron_fire_checks as f64 * c.fire_check_nj
                + (l.stall_cycles + l.idle_cycles) as f64 * c.idle_cycle_nj
        })
        .collect();
    Ok(EnergyReport {
        total_nj: per_layer_nj.iter().sum(),
        per_layer_nj,
        wall_time_us: wall_time_us(counters.total_cycles, c.frequency_mhz),
    })
}
