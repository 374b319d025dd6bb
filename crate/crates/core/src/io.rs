//! Plain-text exchange formats.
//!
//! Complex vectors use CSV with header `index,re,im`. Power patterns use
//! `u,p_db`. Floats are written in Rust's shortest round-trip
//! form, so a write followed by a read is lossless.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::power_to_db;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row} has index {found}, expected {row}")]
    IndexOrder { row: usize, found: usize },
    #[error("u grid has {grid} points but the pattern has {values}")]
    LengthMismatch { grid: usize, values: usize },
}

#[derive(Debug, Serialize, Deserialize)]
struct ComplexRow {
    index: usize,
    re: f64,
    im: f64,
}

pub fn write_complex_csv<W: Write>(writer: W, values: &[Complex64]) -> Result<(), IoError> {
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for (index, v) in values.iter().enumerate() {
        csv.serialize(ComplexRow {
            index,
            re: v.re,
            im: v.im,
        })?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads an `index,re,im` file. Rows must be in index order starting at 0.
pub fn read_complex_csv<R: Read>(reader: R) -> Result<Vec<Complex64>, IoError> {
    let mut csv = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (row, record) in csv.deserialize::<ComplexRow>().enumerate() {
        let record = record?;
        if record.index != row {
            return Err(IoError::IndexOrder {
                row,
                found: record.index,
            });
        }
        out.push(Complex64::new(record.re, record.im));
    }
    Ok(out)
}

/// `u,p_db` rows for a peak-normalised power pattern.
pub fn write_power_pattern_csv<W: Write>(writer: W, u: &[f64], power: &[f64]) -> Result<(), IoError> {
    if u.len() != power.len() {
        return Err(IoError::LengthMismatch {
            grid: u.len(),
            values: power.len(),
        });
    }
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    csv.write_record(["u", "p_db"])?;
    for (&u, &p) in u.iter().zip(power) {
        csv.write_record([u.to_string(), power_to_db(p).to_string()])?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}
