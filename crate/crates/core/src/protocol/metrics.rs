use std::io::Write;

use super::engine::RoundRecord;
use crate::error::Result;

pub const METRICS_HEADER: [&str; 6] = ["round", "node", "jsd", "value", "disc_mean", "load_cum"];

/// One row per node and round; `jsd` is blank on rounds that were not scored.
pub fn write_metrics_csv<W: Write>(records: &[RoundRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for r in records {
        w.write_record([
            r.round.to_string(),
            r.node.to_string(),
            r.jsd.map(|j| j.to_string()).unwrap_or_default(),
            r.value.to_string(),
            r.disc_mean.to_string(),
            r.load_cum.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
