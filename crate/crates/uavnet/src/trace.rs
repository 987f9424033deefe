//! Per-iteration trace records and their fixed CSV schema:
//! `iter,temperature,mover,accepted,sum_rate_bps,best_sum_rate_bps`.
//! The temperature/mover/accepted columns are empty for algorithms that
//! have no such notion.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: u64,
    pub temperature: Option<f64>,
    pub mover: Option<usize>,
    pub accepted: Option<bool>,
    pub sum_rate_bps: f64,
    pub best_sum_rate_bps: f64,
}

pub const CSV_HEADER: &str = "iter,temperature,mover,accepted,sum_rate_bps,best_sum_rate_bps";

/// Writes the trace in the fixed schema. Floats use the shortest
/// round-trip representation, so identical runs produce identical bytes.
pub fn write_csv<W: Write>(mut w: W, records: &[TraceRecord]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let temperature = r.temperature.map(|t| t.to_string()).unwrap_or_default();
        let mover = r.mover.map(|m| m.to_string()).unwrap_or_default();
        let accepted = r
            .accepted
            .map(|a| u8::from(a).to_string())
            .unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.iter, temperature, mover, accepted, r.sum_rate_bps, r.best_sum_rate_bps
        )?;
    }
    Ok(())
}
