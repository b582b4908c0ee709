use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;

use super::estimation::{estimate_gain, received_pilot, ChannelMatrix};
use super::field::{true_gain, GroundTruthField};
use super::steering::Codebook;
use super::Vec3;
use crate::error::{Error, Result};

/// One CSI record `{u, v, t, estimated gain, direction}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub u: Vec3,
    pub v: Vec3,
    pub t: f64,
    pub gain_estimate: Complex64,
    /// 1-based codebook index.
    pub direction_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub u: Vec3,
    pub v: Vec3,
    pub t: f64,
}

/// Pilot-estimate every codebook direction at every trajectory point.
///
/// Output is ordered by trajectory point, then direction.
pub fn collect_dataset<R: Rng + ?Sized>(
    field: &GroundTruthField,
    codebook: &Codebook,
    trajectory: &[TrajectoryPoint],
    pilot_power: f64,
    noise_power: f64,
    rng: &mut R,
) -> Result<Vec<ChannelSample>> {
    if trajectory.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if field.num_directions() != codebook.len() {
        return Err(Error::ShapeMismatch(format!(
            "field has {} directions, codebook {}",
            field.num_directions(),
            codebook.len()
        )));
    }
    let mut out = Vec::with_capacity(trajectory.len() * codebook.len());
    for p in trajectory {
        for entry in codebook.entries() {
            let gain = true_gain(field, p.u, p.v, p.t, entry.index)?;
            let channel = ChannelMatrix::along(entry, gain);
            let pilot = received_pilot(&entry.beamformer, &entry.combiner, &channel, pilot_power, noise_power, rng)?;
            let estimate = estimate_gain(pilot, &entry.beamformer, &entry.combiner, entry, pilot_power)?;
            out.push(ChannelSample { u: p.u, v: p.v, t: p.t, gain_estimate: estimate, direction_index: entry.index });
        }
    }
    Ok(out)
}

pub const DATASET_HEADER: [&str; 10] =
    ["u_x", "u_y", "u_z", "v_x", "v_y", "v_z", "t", "gain_re", "gain_im", "dir_index"];

/// Write a dataset as CSV. Floats use shortest round-trip formatting.
pub fn write_dataset_csv<W: Write>(samples: &[ChannelSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DATASET_HEADER)?;
    for s in samples {
        let mut rec: Vec<String> = s.u.iter().chain(&s.v).map(|x| x.to_string()).collect();
        rec.push(s.t.to_string());
        rec.push(s.gain_estimate.re.to_string());
        rec.push(s.gain_estimate.im.to_string());
        rec.push(s.direction_index.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(reader: R) -> Result<Vec<ChannelSample>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(DATASET_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected dataset header: {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| Error::Parse(format!("column {}: {e}", DATASET_HEADER[i])))
        };
        out.push(ChannelSample {
            u: [f(0)?, f(1)?, f(2)?],
            v: [f(3)?, f(4)?, f(5)?],
            t: f(6)?,
            gain_estimate: Complex64::new(f(7)?, f(8)?),
            direction_index: rec[9].parse().map_err(|e| Error::Parse(format!("dir_index: {e}")))?,
        });
    }
    Ok(out)
}
