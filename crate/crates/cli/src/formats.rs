//! Binary container for 2-D coefficient arrays. Layout (little endian):
//!
//! | offset | type     | field                                        |
//! |--------|----------|----------------------------------------------|
//! | 0      | [u8; 8]  | magic `NDCWT2D\0`                            |
//! | 8      | u32      | format version (1)                           |
//! | 12     | u32      | precision in bits per component (64)         |
//! | 16     | u64      | m                                            |
//! | 24     | u64      | n                                            |
//! | 32     | u32      | p1                                           |
//! | 36     | u32      | p2                                           |
//! | 40     | i32      | J                                            |
//! | 44     | u32      | filter id (0 haar, 1 cdaub6, 0xFFFFFFFF other)|
//! | 48     | f64 pairs| B row-major, `(p1+1)m x (p2+1)n`, re then im |

use std::path::Path;

use ndcwt::{Coefficients2D, Complex64};

use crate::error::CliError;
use crate::io::write_atomic;

pub const MAGIC: [u8; 8] = *b"NDCWT2D\0";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;
const PRECISION: u32 = 64;
const CUSTOM_FILTER: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryCoefficients {
    pub m: usize,
    pub n: usize,
    pub p1: usize,
    pub p2: usize,
    pub max_level: i32,
    /// Registered filter name, `None` for a custom filter.
    pub filter: Option<&'static str>,
    pub data: Vec<Complex64>,
}

pub fn filter_id(name: &str) -> u32 {
    match name {
        "haar" => 0,
        "cdaub6" => 1,
        _ => CUSTOM_FILTER,
    }
}

fn filter_name(id: u32) -> Option<&'static str> {
    match id {
        0 => Some("haar"),
        1 => Some("cdaub6"),
        _ => None,
    }
}

pub fn encode(c: &Coefficients2D) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + c.data.len() * 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&PRECISION.to_le_bytes());
    out.extend_from_slice(&(c.m as u64).to_le_bytes());
    out.extend_from_slice(&(c.n as u64).to_le_bytes());
    out.extend_from_slice(&(c.p1 as u32).to_le_bytes());
    out.extend_from_slice(&(c.p2 as u32).to_le_bytes());
    out.extend_from_slice(&c.max_level.to_le_bytes());
    let id = if c.row_filter == c.col_filter {
        filter_id(&c.row_filter)
    } else {
        CUSTOM_FILTER
    };
    out.extend_from_slice(&id.to_le_bytes());
    for z in &c.data {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn field<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().expect("header length checked")
}

pub fn decode(bytes: &[u8]) -> Result<BinaryCoefficients, String> {
    if bytes.len() < HEADER_LEN || bytes[..8] != MAGIC {
        return Err("not an NDCWT2D file".into());
    }
    let version = u32::from_le_bytes(field(bytes, 8));
    if version != VERSION {
        return Err(format!("unsupported format version {version}"));
    }
    let precision = u32::from_le_bytes(field(bytes, 12));
    if precision != PRECISION {
        return Err(format!("unsupported precision {precision}"));
    }
    let m = u64::from_le_bytes(field(bytes, 16)) as usize;
    let n = u64::from_le_bytes(field(bytes, 24)) as usize;
    let p1 = u32::from_le_bytes(field(bytes, 32)) as usize;
    let p2 = u32::from_le_bytes(field(bytes, 36)) as usize;
    let max_level = i32::from_le_bytes(field(bytes, 40));
    let filter = filter_name(u32::from_le_bytes(field(bytes, 44)));
    let count = (p1 + 1)
        .checked_mul(m)
        .and_then(|r| r.checked_mul((p2 + 1) * n))
        .ok_or("header dimensions overflow")?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != count * 16 {
        return Err(format!(
            "payload holds {} bytes, header implies {}",
            payload.len(),
            count * 16
        ));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| Complex64::new(f64::from_le_bytes(field(c, 0)), f64::from_le_bytes(field(c, 8))))
        .collect();
    Ok(BinaryCoefficients {
        m,
        n,
        p1,
        p2,
        max_level,
        filter,
        data,
    })
}

pub fn write(path: &Path, c: &Coefficients2D) -> Result<(), CliError> {
    write_atomic(path, &encode(c))
}

pub fn read(path: &Path) -> Result<BinaryCoefficients, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|msg| CliError::validation("--input", format!("{}: {msg}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndcwt::filters::get_filter;
    use ndcwt::TransformPlan2D;

    #[test]
    fn round_trip() {
        let plan = TransformPlan2D::new(8, 7, 2, 1, &get_filter("cdaub6").unwrap()).unwrap();
        let a: Vec<f64> = (0..56).map(|i| (i as f64).sin()).collect();
        let c = plan.forward(&a, (8, 7)).unwrap();
        let bytes = encode(&c);
        assert_eq!(bytes.len(), HEADER_LEN + 24 * 14 * 16);
        let back = decode(&bytes).unwrap();
        assert_eq!((back.m, back.n, back.p1, back.p2, back.max_level), (8, 7, 2, 1, 3));
        assert_eq!(back.filter, Some("cdaub6"));
        assert_eq!(back.data, c.data);
        assert!(decode(&bytes[..40]).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(decode(&bad).is_err());
    }
}
