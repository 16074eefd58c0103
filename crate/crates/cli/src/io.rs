//! Reading inputs and writing outputs atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// A real 1-D signal or a row-major 2-D array.
#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    Signal(Vec<f64>),
    Image { rows: usize, cols: usize, data: Vec<f64> },
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("pnm"))
}

/// Loads a CSV (numbers separated by commas or whitespace, `#` comments, an
/// optional non-numeric header line) or a PGM image. A CSV with more than
/// one row and more than one column is an image.
pub fn read_data(path: &Path) -> Result<Data, CliError> {
    if is_pgm(path) {
        return read_pgm(path);
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(&text).map_err(|msg| CliError::validation("--input", format!("{}: {msg}", path.display())))
}

pub fn parse_csv(text: &str) -> Result<Data, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(format!("line {}: non-finite value {bad}", i + 1));
                }
                rows.push(v);
            }
            Err(e) if rows.is_empty() && i == 0 => {
                log::debug!("skipping header line: {e}");
            }
            Err(e) => return Err(format!("line {}: {e}", i + 1)),
        }
    }
    if rows.is_empty() {
        return Err("no numeric data".into());
    }
    let cols = rows[0].len();
    if rows.len() > 1 && cols > 1 {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(format!("row {} has {} columns, expected {cols}", i + 1, r.len()));
        }
        let n = rows.len();
        return Ok(Data::Image {
            rows: n,
            cols,
            data: rows.concat(),
        });
    }
    Ok(Data::Signal(rows.concat()))
}

fn read_pgm(path: &Path) -> Result<Data, CliError> {
    let img = image::ImageReader::open(path)
        .map_err(|e| CliError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| CliError::io(path, e))?
        .decode()
        .map_err(|e| CliError::validation("--input", format!("{}: {e}", path.display())))?
        .to_luma32f();
    let (cols, rows) = img.dimensions();
    Ok(Data::Image {
        rows: rows as usize,
        cols: cols as usize,
        data: img.into_raw().into_iter().map(f64::from).collect(),
    })
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// One value per line, or one row per line for images.
pub fn write_csv_data(path: &Path, data: &Data) -> Result<(), CliError> {
    let mut out = String::new();
    match data {
        Data::Signal(v) => {
            for x in v {
                out.push_str(&format!("{x}\n"));
            }
        }
        Data::Image { cols, data, .. } => {
            for row in data.chunks(*cols) {
                let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
    }
    write_atomic(path, out.as_bytes())
}

/// 16-bit PGM with the data range mapped linearly onto `0..=65535`.
pub fn write_pgm(path: &Path, rows: usize, cols: usize, data: &[f64]) -> Result<(), CliError> {
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels: Vec<u16> = data
        .iter()
        .map(|v| ((v - lo) / span * 65535.0).round() as u16)
        .collect();
    let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(cols as u32, rows as u32, pixels)
        .ok_or_else(|| CliError::validation("--shape", "image too large for PGM".into()))?;
    let mut bytes = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut bytes, image::ImageFormat::Pnm)
        .map_err(|e| CliError::validation("--out", e.to_string()))?;
    write_atomic(path, &bytes.into_inner())
}

pub fn write_data(path: &Path, data: &Data) -> Result<(), CliError> {
    match data {
        Data::Image { rows, cols, data } if is_pgm(path) => write_pgm(path, *rows, *cols, data),
        _ => write_csv_data(path, data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shapes() {
        assert_eq!(
            parse_csv("value\n1\n2\n3\n").unwrap(),
            Data::Signal(vec![1.0, 2.0, 3.0])
        );
        assert_eq!(parse_csv("1, 2, 3").unwrap(), Data::Signal(vec![1.0, 2.0, 3.0]));
        assert_eq!(
            parse_csv("# img\n1,2\n3,4\n5,6\n").unwrap(),
            Data::Image {
                rows: 3,
                cols: 2,
                data: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
            }
        );
        assert!(parse_csv("1,2\n3\n").is_err());
        assert!(parse_csv("1\nx\n").is_err());
        assert!(parse_csv("").is_err());
        assert!(parse_csv("1\nNaN\n").is_err());
    }

    #[test]
    fn atomic_write_and_pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("a.csv");
        write_data(&csv, &Data::Signal(vec![0.1, -2.5e-300])).unwrap();
        assert_eq!(read_data(&csv).unwrap(), Data::Signal(vec![0.1, -2.5e-300]));
        let pgm = dir.path().join("a.pgm");
        write_data(
            &pgm,
            &Data::Image {
                rows: 2,
                cols: 3,
                data: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            },
        )
        .unwrap();
        let Data::Image { rows, cols, data } = read_data(&pgm).unwrap() else {
            panic!("expected image");
        };
        assert_eq!((rows, cols), (2, 3));
        assert!((data[5] - 1.0).abs() < 1e-6 && data[0] == 0.0);
    }
}
