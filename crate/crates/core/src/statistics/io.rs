//! Per-sample CSV: sample_index, seed, S_plus, S_minus, N_I.

use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::SampleValue;

pub const SAMPLE_COLUMNS: [&str; 5] = ["sample_index", "seed", "S_plus", "S_minus", "N_I"];

/// Fifteen significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn write_samples_csv<W: Write>(out: W, samples: &[SampleValue]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    w.write_record(SAMPLE_COLUMNS).map_err(io)?;
    for s in samples {
        w.write_record([
            s.sample_index.to_string(),
            s.seed.map(|v| v.to_string()).unwrap_or_default(),
            format_float(s.s_plus),
            format_float(s.s_minus),
            s.n_interval.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(())
}

/// One parsed CSV row; the polynomial is not part of the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub sample_index: u64,
    pub seed: Option<u64>,
    pub s_plus: f64,
    pub s_minus: f64,
    pub n_interval: Option<usize>,
}

fn opt(s: &str) -> Option<&str> {
    if s.is_empty() {
        None
    } else {
        Some(s)
    }
}

fn field(what: &str, v: &str) -> Error {
    Error::Parse(format!("bad {what} {v:?}"))
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<SampleRow>> {
    let mut r = csv::Reader::from_reader(input);
    let parse = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    let header = r.headers().map_err(parse)?;
    if header.iter().ne(SAMPLE_COLUMNS) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let rec = record.map_err(parse)?;
        if rec.len() != SAMPLE_COLUMNS.len() {
            return Err(Error::Parse(format!("row has {} fields", rec.len())));
        }
        rows.push(SampleRow {
            sample_index: rec[0].parse().map_err(|_| field("sample_index", &rec[0]))?,
            seed: opt(&rec[1])
                .map(|s| s.parse().map_err(|_| field("seed", s)))
                .transpose()?,
            s_plus: rec[2].parse().map_err(|_| field("S_plus", &rec[2]))?,
            s_minus: rec[3].parse().map_err(|_| field("S_minus", &rec[3]))?,
            n_interval: opt(&rec[4])
                .map(|s| s.parse().map_err(|_| field("N_I", s)))
                .transpose()?,
        });
    }
    Ok(rows)
}
