//! Bit-exact matrix file I/O and the truth sidecar format.
//!
//! Matrix files are little-endian: magic `AADM`, format version `u32 = 1`,
//! `rows: u32`, `cols: u32`, `sample_rate: f64`, then `rows * cols` `f64`
//! payload values in row-major order. No padding, no checksum.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::{Assignment, TimeSeries};
use ndarray::Array2;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"AADM";
const FORMAT_VERSION: u32 = 1;

pub fn write_matrix<F: Scalar>(ts: &TimeSeries<F>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(ts.len() as u32).to_le_bytes())?;
    w.write_all(&(ts.dim() as u32).to_le_bytes())?;
    w.write_all(&ts.sample_rate_hz().to_le_bytes())?;
    for v in ts.samples().iter() {
        w.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<F: Scalar>(path: &Path) -> Result<TimeSeries<F>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, path)?;
    if &magic != MAGIC {
        return Err(Error::MalformedFile(format!("{}: bad magic", path.display())));
    }
    let version = read_u32(&mut r, path)?;
    if version != FORMAT_VERSION {
        return Err(Error::MalformedFile(format!(
            "{}: unsupported format version {version}",
            path.display()
        )));
    }
    let rows = read_u32(&mut r, path)? as usize;
    let cols = read_u32(&mut r, path)? as usize;
    let mut rate = [0u8; 8];
    read_exact(&mut r, &mut rate, path)?;
    let sample_rate = f64::from_le_bytes(rate);
    let mut payload = vec![F::zero(); rows * cols];
    let mut buf = [0u8; 8];
    for v in payload.iter_mut() {
        read_exact(&mut r, &mut buf, path)?;
        *v = F::cast(f64::from_le_bytes(buf));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::MalformedFile(format!(
            "{}: trailing bytes after payload",
            path.display()
        )));
    }
    let samples = Array2::from_shape_vec((rows, cols), payload)
        .map_err(|e| Error::MalformedFile(format!("{}: {e}", path.display())))?;
    TimeSeries::new(samples, sample_rate)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::MalformedFile(format!("{}: truncated payload", path.display())))
}

fn read_u32<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, path)?;
    Ok(u32::from_le_bytes(buf))
}

/// Writes the planted-label sidecar: one `k,label` line per segment.
pub fn write_truth(truth: &Assignment, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, label) in truth.labels().iter().enumerate() {
        writeln!(w, "{k},{label}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth(path: &Path) -> Result<Assignment> {
    let mut contents = String::new();
    File::open(path)?.read_to_string(&mut contents)?;
    let mut labels = Vec::new();
    for (lineno, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, label) = line.split_once(',').ok_or_else(|| {
            Error::MalformedFile(format!("{}: line {} missing comma", path.display(), lineno + 1))
        })?;
        let k: usize = k.trim().parse().map_err(|_| {
            Error::MalformedFile(format!("{}: bad segment index on line {}", path.display(), lineno + 1))
        })?;
        if k != labels.len() {
            return Err(Error::MalformedFile(format!(
                "{}: segment indices must be consecutive from 0",
                path.display()
            )));
        }
        let label: u8 = label.trim().parse().map_err(|_| {
            Error::MalformedFile(format!("{}: bad label on line {}", path.display(), lineno + 1))
        })?;
        labels.push(label);
    }
    Assignment::new(labels)
}
