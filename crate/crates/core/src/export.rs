//! CSV writers for distributions, histograms and sweeps.
//!
//! Floats use Rust's shortest round-trip formatting, so identical inputs give
//! byte-identical files.

use std::io::Write;

use crate::shots::ShotRecord;
use crate::spectral::PhaseDistribution;
use crate::sweep::{SweepRow, TrotterRow};

pub fn write_distribution<W: Write>(out: W, dist: &PhaseDistribution) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["l", "l_over_2N", "P"])?;
    let m = dist.bins() as f64;
    for (l, p) in dist.probs.iter().enumerate() {
        w.write_record([l.to_string(), (l as f64 / m).to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram<W: Write>(out: W, rec: &ShotRecord) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["l", "count", "frequency"])?;
    for (l, &c) in rec.counts.iter().enumerate() {
        w.write_record([l.to_string(), c.to_string(), (c as f64 / rec.m as f64).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy",
        "t",
        "N",
        "N_min",
        "multiplier",
        "l_star",
        "energy",
        "error",
        "ground_fidelity",
        "chemically_accurate",
        "beyond_first_order",
    ])?;
    for r in rows {
        w.write_record([
            r.strategy.clone(),
            r.t.to_string(),
            r.n_phase.to_string(),
            r.n_min.to_string(),
            r.multiplier.map_or("exact".to_string(), |m| m.to_string()),
            r.l_star.to_string(),
            r.energy.to_string(),
            r.error.to_string(),
            r.ground_fidelity.to_string(),
            r.chemically_accurate.to_string(),
            r.beyond_first_order.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trotter<W: Write>(out: W, rows: &[TrotterRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "n", "q", "spectral_error", "bound", "max_phase_error"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.n.to_string(),
            r.q.to_string(),
            r.spectral_error.to_string(),
            r.bound.map_or(String::new(), |b| b.to_string()),
            r.max_phase_error.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-eigenstate weights before and after measuring `l`.
pub fn write_projection<W: Write>(out: W, energies: &[f64], before: &[f64], after: &[f64]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "energy", "weight_init", "weight_post"])?;
    for (j, ((e, b), a)) in energies.iter().zip(before).zip(after).enumerate() {
        w.write_record([j.to_string(), e.to_string(), b.to_string(), a.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
