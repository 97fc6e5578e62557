//! Two-column extraction from CSV traces, in gnuplot's whitespace format.

use std::io::Write;
use std::path::Path;

use crate::CliError;

pub struct PlotRequest<'a> {
    pub x: &'a str,
    pub y: &'a str,
    /// Replace `y` by its running minimum.
    pub min_so_far: bool,
}

/// Writes `x y` pairs, one per row. Rows where either field is empty (a
/// column that doesn't apply to the solver) are skipped.
pub fn plot_data(trace: &Path, req: &PlotRequest<'_>, out: &mut dyn Write) -> Result<usize, CliError> {
    let data = |e: csv::Error| CliError::Data(format!("{}: {e}", trace.display()));
    let mut reader = csv::Reader::from_path(trace).map_err(data)?;
    let header = reader.headers().map_err(data)?.clone();
    let column = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| {
            let names: Vec<&str> = header.iter().collect();
            CliError::Usage(format!("no column '{name}' in {} (columns: {})", trace.display(), names.join(", ")))
        })
    };
    let (xi, yi) = (column(req.x)?, column(req.y)?);

    let io = |e: std::io::Error| CliError::Io(e.to_string());
    writeln!(out, "# {} {}", req.x, req.y).map_err(io)?;
    let mut best = f64::INFINITY;
    let mut written = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(data)?;
        let (xs, ys) = (&record[xi], &record[yi]);
        if xs.is_empty() || ys.is_empty() {
            continue;
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| CliError::Data(format!("{} row {}: '{s}': {e}", trace.display(), row + 1)))
        };
        let mut y = num(ys)?;
        if req.min_so_far {
            best = best.min(y);
            y = best;
        }
        writeln!(out, "{xs} {y}").map_err(io)?;
        written += 1;
    }
    Ok(written)
}
