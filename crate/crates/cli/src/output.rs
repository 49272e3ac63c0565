//! CSV, JSON and PGM writers. All output is written in a fixed order so that
//! reruns are byte-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Where a command sends its tables.
#[derive(Debug, Clone)]
pub struct Sink {
    pub out_dir: Option<PathBuf>,
}

impl Sink {
    /// Writes `<stem>.csv` and `<stem>.json` into the output directory, or the
    /// CSV to stdout when no directory was given.
    pub fn emit<R: Serialize, J: Serialize>(&self, stem: &str, rows: &[R], report: &J) -> CliResult<()> {
        match &self.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                write_csv(&dir.join(format!("{stem}.csv")), rows)?;
                write_json(&dir.join(format!("{stem}.json")), report)
            }
            None => {
                let stdout = std::io::stdout();
                let mut w = csv::Writer::from_writer(stdout.lock());
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush().map_err(|e| CliError::io("<stdout>", e))
            }
        }
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// 16-bit binary PGM of a 2-D slice; higher dimensions use the slice through
/// the origin in the leading axes.
pub fn write_pgm(path: &Path, n: usize, m: usize, values: &[f64]) -> CliResult<()> {
    let (rows, cols) = if n == 1 { (1, m) } else { (m, m) };
    let slice = &values[..rows * cols];
    let (lo, hi) = slice.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| CliError::io(path, e);
    write!(w, "P5\n# min={lo:e} max={hi:e}\n{cols} {rows}\n65535\n").map_err(io)?;
    for v in slice {
        let q = (((v - lo) / span) * 65535.0).round() as u16;
        w.write_all(&q.to_be_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}
