//! Minimal NPY v1.0 reader and writer for little-endian float arrays in C order.
//!
//! Layout: `\x93NUMPY`, major/minor version bytes, a little-endian `u16` header length, an ASCII
//! Python-literal dict padded with spaces and terminated by `\n` so that the payload starts on a
//! 64-byte boundary, then the raw array data.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn descr(self) -> &'static str {
        match self {
            Dtype::F32 => "<f4",
            Dtype::F64 => "<f8",
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// Array read from an NPY file, widened to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

pub fn read_npy(path: &Path) -> Result<NpyArray> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_npy(&bytes)
}

pub fn parse_npy(bytes: &[u8]) -> Result<NpyArray> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(Error::Format("missing NPY magic".into()));
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(Error::Format(format!(
            "unsupported NPY version {major}.{minor}, expected 1.0"
        )));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let header_end = 10 + header_len;
    if bytes.len() < header_end {
        return Err(Error::Format("truncated NPY header".into()));
    }
    let header =
        std::str::from_utf8(&bytes[10..header_end]).map_err(|_| Error::Format("NPY header is not ASCII".into()))?;
    let header = parse_header(header)?;

    let count = header
        .shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("NPY shape overflows".into()))?;
    let payload = &bytes[header_end..];
    let expected = count * header.dtype.size();
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "NPY payload has {} bytes, shape {:?} needs {expected}",
            payload.len(),
            header.shape
        )));
    }
    let data = match header.dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    Ok(NpyArray {
        dtype: header.dtype,
        shape: header.shape,
        data,
    })
}

/// Encode `data` (C order) with the given element type. `f32` output rounds each value.
pub fn encode_npy(dtype: Dtype, shape: &[usize], data: &[f64]) -> Vec<u8> {
    let expected: usize = shape.iter().product();
    assert_eq!(expected, data.len(), "shape does not match data length");

    let shape_str = match shape.len() {
        1 => format!("({},)", shape[0]),
        _ => format!(
            "({})",
            shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
        ),
    };
    let mut header = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': {}, }}",
        dtype.descr(),
        shape_str
    );
    // pad so that magic + version + len + header (incl. trailing newline) is aligned
    let unpadded = MAGIC.len() + 2 + 2 + header.len() + 1;
    let pad = (ALIGN - unpadded % ALIGN) % ALIGN;
    header.extend(std::iter::repeat_n(' ', pad));
    header.push('\n');

    let mut out = Vec::with_capacity(10 + header.len() + data.len() * dtype.size());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    match dtype {
        Dtype::F32 => data
            .iter()
            .for_each(|&v| out.extend_from_slice(&(v as f32).to_le_bytes())),
        Dtype::F64 => data.iter().for_each(|&v| out.extend_from_slice(&v.to_le_bytes())),
    }
    out
}

pub fn write_npy(path: &Path, dtype: Dtype, shape: &[usize], data: &[f64]) -> Result<()> {
    fs::write(path, encode_npy(dtype, shape, data)).map_err(|e| Error::io(path, e))
}

struct Header {
    dtype: Dtype,
    shape: Vec<usize>,
}

fn parse_header(raw: &str) -> Result<Header> {
    let s = raw.trim();
    let inner = s
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::Format(format!("NPY header is not a dict: {s}")))?;

    let mut descr = None;
    let mut fortran = None;
    let mut shape = None;
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let (key, after) = take_quoted(rest)?;
        let after = after
            .trim_start()
            .strip_prefix(':')
            .ok_or_else(|| Error::Format("expected ':' in NPY header".into()))?
            .trim_start();
        let after = match key {
            "descr" => {
                let (v, after) = take_quoted(after)?;
                descr = Some(v.to_string());
                after
            }
            "fortran_order" => {
                if let Some(a) = after.strip_prefix("False") {
                    fortran = Some(false);
                    a
                } else if let Some(a) = after.strip_prefix("True") {
                    fortran = Some(true);
                    a
                } else {
                    return Err(Error::Format("bad fortran_order value".into()));
                }
            }
            "shape" => {
                let close = after
                    .find(')')
                    .ok_or_else(|| Error::Format("unterminated shape tuple".into()))?;
                let tuple = after
                    .strip_prefix('(')
                    .ok_or_else(|| Error::Format("shape is not a tuple".into()))?;
                let dims = tuple[..close - 1]
                    .split(',')
                    .map(str::trim)
                    .filter(|d| !d.is_empty())
                    .map(|d| {
                        d.trim_end_matches('L')
                            .parse::<usize>()
                            .map_err(|_| Error::Format(format!("bad shape entry {d:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                shape = Some(dims);
                &after[close + 1..]
            }
            other => return Err(Error::Format(format!("unexpected NPY header key {other:?}"))),
        };
        rest = after.trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }

    let dtype = match descr.as_deref() {
        Some("<f4") => Dtype::F32,
        Some("<f8") => Dtype::F64,
        Some(d) => return Err(Error::Format(format!("unsupported dtype {d:?}"))),
        None => return Err(Error::Format("NPY header lacks descr".into())),
    };
    match fortran {
        Some(false) => {}
        Some(true) => return Err(Error::Format("fortran_order arrays are not supported".into())),
        None => return Err(Error::Format("NPY header lacks fortran_order".into())),
    }
    let shape = shape.ok_or_else(|| Error::Format("NPY header lacks shape".into()))?;
    Ok(Header { dtype, shape })
}

fn take_quoted(s: &str) -> Result<(&str, &str)> {
    let quote = s
        .chars()
        .next()
        .filter(|c| *c == '\'' || *c == '"')
        .ok_or_else(|| Error::Format(format!("expected quoted string at {s:?}")))?;
    let body = &s[1..];
    let end = body
        .find(quote)
        .ok_or_else(|| Error::Format("unterminated string in NPY header".into()))?;
    Ok((&body[..end], &body[end + 1..]))
}
