//! `.stw` state files: one JSON header line, then little-endian `f64` pairs
//! `(re, im)` for every component in storage order (kx-major, then ky, then kz).

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FieldSet, ReducedState, Resolution, SpectralField, State, SymmetryClass};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StwHeader {
    pub format: String,
    pub version: u32,
    pub resolution: Resolution,
    pub components: Vec<String>,
    pub parities: Vec<SymmetryClass>,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// Writes named fields with an optional parameter echo.
pub fn write_fields<W: Write>(out: &mut W, names: &[&str], fields: &[&SpectralField], params: serde_json::Value) -> Result<()> {
    let res = fields.first().ok_or_else(|| Error::Format("no fields to write".into()))?.resolution();
    let header = StwHeader {
        format: "stw".into(),
        version: 1,
        resolution: res,
        components: names.iter().map(|s| s.to_string()).collect(),
        parities: fields.iter().map(|f| f.symmetry()).collect(),
        params,
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    let mut bytes = Vec::with_capacity(16 * res.n_coeffs() * fields.len());
    for f in fields {
        for c in f.coeffs() {
            bytes.extend_from_slice(&c.re.to_le_bytes());
            bytes.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out.write_all(&bytes)?;
    Ok(())
}

/// Reads a header and its fields.
pub fn read_fields<R: BufRead>(input: &mut R) -> Result<(StwHeader, Vec<SpectralField>)> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: StwHeader = serde_json::from_str(line.trim_end())?;
    if header.format != "stw" || header.components.len() != header.parities.len() {
        return Err(Error::Format("not an stw header".into()));
    }
    let res = header.resolution;
    let n = res.n_coeffs();
    let mut fields = Vec::with_capacity(header.parities.len());
    let mut buf = vec![0u8; 16 * n];
    for &sym in &header.parities {
        input.read_exact(&mut buf).map_err(|e| Error::Format(format!("truncated data block: {e}")))?;
        let coeffs = buf
            .chunks_exact(16)
            .map(|b| {
                let re = f64::from_le_bytes(b[..8].try_into().unwrap());
                let im = f64::from_le_bytes(b[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        fields.push(SpectralField::from_coeffs(res, sym, coeffs)?);
    }
    Ok((header, fields))
}

pub fn write_state<W: Write>(out: &mut W, s: &State, params: serde_json::Value) -> Result<()> {
    write_fields(out, &["q", "h", "v1", "v2", "w"], &s.fields(), params)
}

pub fn write_reduced<W: Write>(out: &mut W, s: &ReducedState, params: serde_json::Value) -> Result<()> {
    write_fields(out, &["h", "v1", "v2", "w"], &s.fields(), params)
}

/// Either kind of state read back from disk.
#[derive(Debug, Clone)]
pub enum StoredState {
    Full(State),
    Reduced(ReducedState),
}

pub fn read_state<R: BufRead>(input: &mut R) -> Result<(StwHeader, StoredState)> {
    let (h, mut f) = read_fields(input)?;
    let names: Vec<&str> = h.components.iter().map(|s| s.as_str()).collect();
    let st = match names.as_slice() {
        ["q", "h", "v1", "v2", "w"] => {
            let w = f.pop().unwrap();
            let v2 = f.pop().unwrap();
            let v1 = f.pop().unwrap();
            let hh = f.pop().unwrap();
            let q = f.pop().unwrap();
            StoredState::Full(State::new(q, hh, v1, v2, w)?)
        }
        ["h", "v1", "v2", "w"] => {
            let w = f.pop().unwrap();
            let v2 = f.pop().unwrap();
            let v1 = f.pop().unwrap();
            let hh = f.pop().unwrap();
            StoredState::Reduced(ReducedState { h: hh, v1, v2, w })
        }
        _ => return Err(Error::Format(format!("unknown component list {names:?}"))),
    };
    Ok((h, st))
}
