//! 5-byte address-event records as distributed with N-MNIST.
//!
//! Layout per event: `x`, `y`, then 24 bits where the top bit is the
//! polarity (1 = on) and the low 23 bits are the timestamp in µs, big-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const AER_RECORD_BYTES: usize = 5;
const TIMESTAMP_MASK: u32 = (1 << 23) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventRecord {
    pub x: u8,
    pub y: u8,
    pub polarity: Polarity,
    pub timestamp_us: u32,
}

pub fn parse_aer(bytes: &[u8]) -> Result<Vec<EventRecord>> {
    if bytes.len() % AER_RECORD_BYTES != 0 {
        return Err(Error::Format(format!(
            "AER stream of {} bytes is not a multiple of {AER_RECORD_BYTES}",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(AER_RECORD_BYTES)
        .map(|r| {
            let word = u32::from_be_bytes([0, r[2], r[3], r[4]]);
            EventRecord {
                x: r[0],
                y: r[1],
                polarity: if r[2] & 0x80 != 0 {
                    Polarity::On
                } else {
                    Polarity::Off
                },
                timestamp_us: word & TIMESTAMP_MASK,
            }
        })
        .collect())
}

/// Inverse of [`parse_aer`]; timestamps are truncated to 23 bits.
pub fn encode_aer(events: &[EventRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(events.len() * AER_RECORD_BYTES);
    for e in events {
        let mut word = e.timestamp_us & TIMESTAMP_MASK;
        if e.polarity == Polarity::On {
            word |= 1 << 23;
        }
        let [_, b2, b3, b4] = word.to_be_bytes();
        out.extend_from_slice(&[e.x, e.y, b2, b3, b4]);
    }
    out
}

pub fn load_aer_events(path: &Path) -> Result<Vec<EventRecord>> {
    parse_aer(&fs::read(path)?)
}
