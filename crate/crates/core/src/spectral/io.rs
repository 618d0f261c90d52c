//! Binary field files.
//!
//! Layout (little-endian): the 8-byte magic `AIRYFLD1`, `u64 n_points`,
//! `f64 domain_length`, then `n_points` pairs of `f64` (real, imaginary).

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Field, GridSpec};
use crate::error::{LabError, Result};

pub const MAGIC: &[u8; 8] = b"AIRYFLD1";

/// Decoded contents of a field file. The time window is not stored, so the
/// caller supplies it when turning the record into a [`Field`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    pub n_points: usize,
    pub domain_length: f64,
    pub samples: Vec<Complex64>,
}

impl FieldRecord {
    pub fn into_field(self, t_count: usize, t_span: f64, band_fraction: f64) -> Result<Field> {
        let grid = GridSpec::new(self.n_points, self.domain_length, t_count, t_span, band_fraction)?;
        Field::new(grid, self.samples)
    }

    /// Uses the time window and band of `template`, which must share the
    /// record's spatial lattice.
    pub fn into_field_like(self, template: &GridSpec) -> Result<Field> {
        if self.n_points != template.n_points() || self.domain_length != template.domain_length() {
            return Err(LabError::GridMismatch(format!(
                "file holds n_points={} L={}, expected n_points={} L={}",
                self.n_points,
                self.domain_length,
                template.n_points(),
                template.domain_length()
            )));
        }
        Field::new(*template, self.samples)
    }
}

pub fn encode_field(f: &Field) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 16 * f.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(f.len() as u64).to_le_bytes());
    out.extend_from_slice(&f.grid().domain_length().to_le_bytes());
    for z in f.samples() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn write_field<W: Write>(mut w: W, f: &Field) -> Result<()> {
    w.write_all(&encode_field(f))?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R, what: &str) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| LabError::InvalidInput(format!("field file truncated in {what}: {e}")))?;
    Ok(buf)
}

pub fn read_field<R: Read>(mut r: R) -> Result<FieldRecord> {
    let magic: [u8; 8] = read_array(&mut r, "magic")?;
    if &magic != MAGIC {
        return Err(LabError::InvalidInput("not a field file (bad magic)".into()));
    }
    let n = u64::from_le_bytes(read_array(&mut r, "header")?);
    let domain_length = f64::from_le_bytes(read_array(&mut r, "header")?);
    let n_points = usize::try_from(n)
        .ok()
        .filter(|&n| (2..=1 << 32).contains(&n))
        .ok_or_else(|| LabError::InvalidInput(format!("implausible n_points {n}")))?;
    let mut body = vec![0u8; 16 * n_points];
    r.read_exact(&mut body)
        .map_err(|e| LabError::InvalidInput(format!("field file truncated in body: {e}")))?;
    let samples = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(FieldRecord {
        n_points,
        domain_length,
        samples,
    })
}
