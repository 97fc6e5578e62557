//! CSV and JSON serialization of solver traces.
//!
//! Reals are written with 17 significant digits so that a CSV round trip
//! reproduces every value bit for bit. Fields a solver doesn't use are empty
//! in CSV and `null` in JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solvers::TraceRecord;

pub const TRACE_COLUMNS: [&str; 18] = [
    "k",
    "grad_calls",
    "f_calls",
    "trials",
    "l11",
    "l12",
    "l22",
    "mu",
    "beta",
    "gamma",
    "c",
    "d",
    "f_value",
    "gap_norm",
    "gap_x_norm",
    "gap_y_norm",
    "reg_gap_norm",
    "elapsed_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl FromStr for TraceFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TraceFormat::Csv),
            "json" => Ok(TraceFormat::Json),
            _ => Err(Error::Parameter(format!("unknown trace format '{s}' (csv or json)"))),
        }
    }
}

/// `{:.16e}` of the value widened to `f64`.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fields<T: Scalar>(r: &TraceRecord<T>) -> [Option<String>; 18] {
    let real = |v: T| Some(format_real(v.to_f64_lossy()));
    let opt = |v: Option<T>| v.map(|v| format_real(v.to_f64_lossy()));
    [
        Some(r.k.to_string()),
        Some(r.grad_calls.to_string()),
        Some(r.f_calls.to_string()),
        Some(r.trials.to_string()),
        opt(r.l11),
        opt(r.l12),
        opt(r.l22),
        opt(r.mu),
        opt(r.beta),
        opt(r.gamma),
        opt(r.c),
        opt(r.d),
        real(r.f_value),
        real(r.gap_norm),
        real(r.gap_x_norm),
        real(r.gap_y_norm),
        opt(r.reg_gap_norm),
        r.elapsed_ms.map(format_real),
    ]
}

pub fn write_csv<T: Scalar, W: Write>(records: &[TraceRecord<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Data(format!("writing trace: {e}"));
    w.write_record(TRACE_COLUMNS).map_err(io_err)?;
    for r in records {
        w.write_record(fields(r).iter().map(|f| f.as_deref().unwrap_or("")))
            .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Data(format!("writing trace: {e}")))?;
    Ok(())
}

pub fn write_json<T: Scalar, W: Write>(records: &[TraceRecord<T>], mut out: W) -> io::Result<()> {
    writeln!(out, "[")?;
    for (i, r) in records.iter().enumerate() {
        let body: Vec<String> = TRACE_COLUMNS
            .iter()
            .zip(fields(r))
            .map(|(name, v)| {
                let v = match v {
                    None => "null".to_string(),
                    // JSON has no literal for non-finite numbers
                    Some(s) if s == "NaN" || s.ends_with("inf") => format!("\"{s}\""),
                    Some(s) => s,
                };
                format!("\"{name}\": {v}")
            })
            .collect();
        let sep = if i + 1 < records.len() { "," } else { "" };
        writeln!(out, "  {{{}}}{sep}", body.join(", "))?;
    }
    writeln!(out, "]")?;
    Ok(())
}

/// Writes `records` to `path` in the given format.
pub fn write_trace<T: Scalar>(records: &[TraceRecord<T>], format: TraceFormat, path: impl AsRef<Path>) -> io::Result<()> {
    let file = BufWriter::new(File::create(path)?);
    match format {
        TraceFormat::Csv => write_csv(records, file).map_err(|e| io::Error::other(e.to_string())),
        TraceFormat::Json => write_json(records, file),
    }
}

fn parse_opt(s: &str, col: &str, row: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| Error::Data(format!("row {row}, column {col}: '{s}': {e}")))
}

/// Parses a CSV trace written by [`write_csv`].
pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<TraceRecord<f64>>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| Error::Data(e.to_string()))?.clone();
    if header.iter().ne(TRACE_COLUMNS.iter().copied()) {
        return Err(Error::Data(format!("unexpected trace header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Data(format!("row {row}: {e}")))?;
        let v = |j: usize| parse_opt(&rec[j], TRACE_COLUMNS[j], row);
        let req = |j: usize| v(j)?.ok_or_else(|| Error::Data(format!("row {row}: {} is empty", TRACE_COLUMNS[j])));
        let int = |j: usize| {
            rec[j]
                .parse::<u64>()
                .map_err(|e| Error::Data(format!("row {row}, column {}: {e}", TRACE_COLUMNS[j])))
        };
        out.push(TraceRecord {
            k: int(0)? as usize,
            grad_calls: int(1)?,
            f_calls: int(2)?,
            trials: int(3)? as usize,
            l11: v(4)?,
            l12: v(5)?,
            l22: v(6)?,
            mu: v(7)?,
            beta: v(8)?,
            gamma: v(9)?,
            c: v(10)?,
            d: v(11)?,
            f_value: req(12)?,
            gap_norm: req(13)?,
            gap_x_norm: req(14)?,
            gap_y_norm: req(15)?,
            reg_gap_norm: v(16)?,
            elapsed_ms: v(17)?,
        });
    }
    Ok(out)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord<f64>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    read_csv(file)
}
