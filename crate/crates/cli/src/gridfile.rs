//! Self-describing binary grid files.
//!
//! Line 1 is a JSON header terminated by `\n`; the rest is `M^n` little-endian
//! `f64` values in row-major order, last axis fastest.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "phg-grid";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub format: String,
    pub version: u32,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    pub kind: String,
    pub seed: Option<u64>,
    #[serde(default)]
    pub meta: Value,
}

impl GridHeader {
    pub fn new(n: usize, m: usize, kind: impl Into<String>) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            n,
            m,
            l: None,
            kind: kind.into(),
            seed: None,
            meta: Value::Object(Default::default()),
        }
    }

    pub fn len(&self) -> Option<usize> {
        self.m.checked_pow(self.n as u32)
    }
}

pub fn write_grid(path: &Path, header: &GridHeader, values: &[f64]) -> CliResult<()> {
    if header.len() != Some(values.len()) {
        return Err(CliError::GridFormat {
            path: path.display().to_string(),
            reason: format!("header declares {}^{} values, got {}", header.m, header.n, values.len()),
        });
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = serde_json::to_vec(header)?;
    line.push(b'\n');
    let io = |e| CliError::io(path, e);
    w.write_all(&line).map_err(io)?;
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_grid(path: &Path) -> CliResult<(GridHeader, Vec<f64>)> {
    let bad = |reason: String| CliError::GridFormat { path: path.display().to_string(), reason };
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line).map_err(|e| CliError::io(path, e))?;
    if line.pop() != Some(b'\n') {
        return Err(bad("missing header line".into()));
    }
    let header: GridHeader = serde_json::from_slice(&line).map_err(|e| bad(e.to_string()))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(bad(format!("unsupported format {} v{}", header.format, header.version)));
    }
    let len = header.len().ok_or_else(|| bad("declared size overflows".into()))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body).map_err(|e| CliError::io(path, e))?;
    if body.len() != 8 * len {
        return Err(bad(format!("expected {} bytes of data, found {}", 8 * len, body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    Ok((header, values))
}
