//! Input parsing and atomic output writing.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use kocodes::bits::BitWord;

use crate::args::SymbolFormat;

/// First line of every text output: tool version and the full invocation.
pub fn header_line() -> String {
    let argv: Vec<String> = std::env::args().collect();
    format!("# kocodes {} | {}", env!("CARGO_PKG_VERSION"), argv.join(" "))
}

/// Writes `body` through a temporary file in the target directory, so a
/// failed run never leaves a partial output behind.
pub fn write_atomic(path: &Path, body: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(body)?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Text output with the header comment line.
pub fn write_text(path: &Path, body: &str) -> Result<()> {
    write_atomic(path, format!("{}\n{body}", header_line()).as_bytes())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn read_messages(path: &Path, k: usize) -> Result<Vec<BitWord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    data_lines(&text)
        .map(|(no, l)| {
            let w: BitWord = l.parse().with_context(|| format!("{}:{no}: not a bit string", path.display()))?;
            if w.len() != k {
                bail!("{}:{no}: message has {} bits, code dimension is {k}", path.display(), w.len());
            }
            Ok(w)
        })
        .collect()
}

pub fn read_blocks(path: &Path, n: usize, format: SymbolFormat) -> Result<Vec<Vec<f64>>> {
    match format {
        SymbolFormat::Csv => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            data_lines(&text)
                .map(|(no, l)| {
                    let row = l
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<f64>, _>>()
                        .with_context(|| format!("{}:{no}: not a list of numbers", path.display()))?;
                    if row.len() != n {
                        bail!("{}:{no}: {} values, block length is {n}", path.display(), row.len());
                    }
                    Ok(row)
                })
                .collect()
        }
        SymbolFormat::F64le => {
            let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
            if bytes.len() % (8 * n) != 0 {
                bail!("{}: {} bytes is not a whole number of {n}-symbol blocks", path.display(), bytes.len());
            }
            let vals: Vec<f64> =
                bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            Ok(vals.chunks(n).map(<[f64]>::to_vec).collect())
        }
    }
}

pub fn write_blocks(path: &Path, rows: &[Vec<f64>], format: SymbolFormat) -> Result<()> {
    match format {
        SymbolFormat::Csv => {
            let mut s = String::new();
            for r in rows {
                let cells: Vec<String> = r.iter().map(f64::to_string).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            write_text(path, &s)
        }
        // raw binary has no room for a header line
        SymbolFormat::F64le => write_atomic(path, &rows.iter().flatten().flat_map(|v| v.to_le_bytes()).collect::<Vec<u8>>()),
    }
}

/// Inclusive `lo:step:hi` grid or a single value.
pub fn parse_snr_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad SNR value '{p}'"));
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [lo, step, hi] => {
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if !(step > 0.0) || hi < lo {
                return Err(format!("SNR grid '{s}' needs step > 0 and hi >= lo"));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(format!("SNR grid '{s}' has too many points"));
            }
            Ok((0..count).map(|i| lo + i as f64 * step).collect())
        }
        _ => Err(format!("SNR grid '{s}' must be 'lo:step:hi' or a single value")),
    }
}
