//! CSV and JSON output of sweep results.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{OutputFormat, SweepResult};

pub const CSV_HEADER: [&str; 12] = [
    "sweep_var",
    "sweep_value",
    "snr_db",
    "method",
    "nmse_h1",
    "nmse_h1_db",
    "nmse_h2",
    "nmse_h2_db",
    "trials",
    "discarded",
    "mean_iters",
    "converged_frac",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &result.rows {
        w.write_record([
            r.sweep_var.clone(),
            r.sweep_value.to_string(),
            r.snr_db.to_string(),
            r.method.to_string(),
            opt(r.nmse_h1),
            opt(r.nmse_h1_db),
            opt(r.nmse_h2),
            opt(r.nmse_h2_db),
            r.trials.to_string(),
            r.discarded.to_string(),
            opt(r.mean_iters),
            opt(r.converged_frac),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn write_json<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, result).map_err(|e| Error::Serialization(e.to_string()))?;
    writeln!(out).map_err(|e| Error::Serialization(e.to_string()))
}

/// Write to `path`, or stdout when `None`.
pub fn emit_results(result: &SweepResult, path: Option<&Path>, format: OutputFormat) -> Result<()> {
    let write = |w: &mut dyn Write| match format {
        OutputFormat::Csv => write_csv(result, w),
        OutputFormat::Json => write_json(result, w),
    };
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    }
}
