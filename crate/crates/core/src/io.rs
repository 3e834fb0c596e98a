//! File formats for features, hard labels and soft labels.
//!
//! * Feature CSV: one header line (its column count fixes the width), then
//!   one row of decimal reals per sample.
//! * Feature binary: magic `SLRF`, `u32` rows, `u32` cols, then rows x cols
//!   `f32` values, all little-endian, row-major.
//! * Label CSV: `sample_index,label`, label `-1` for noise.
//! * Soft-label CSV: `sample_index,p_0,...,p_{m-1}`; all-zero rows are masked.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, SlrError};
use crate::model::{FeatureMatrix, HardLabeling, SoftLabelMatrix};

pub const FEATURE_MAGIC: &[u8; 4] = b"SLRF";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFormat {
    Csv,
    Binary,
}

impl FeatureFormat {
    /// `.bin` and `.slrf` are binary, everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("bin") || ext.eq_ignore_ascii_case("slrf") => {
                FeatureFormat::Binary
            }
            _ => FeatureFormat::Csv,
        }
    }
}

impl FromStr for FeatureFormat {
    type Err = SlrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(FeatureFormat::Csv),
            "binary" | "bin" => Ok(FeatureFormat::Binary),
            other => Err(SlrError::InvalidParameter(format!(
                "unknown feature format {other:?} (expected csv or binary)"
            ))),
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| SlrError::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| SlrError::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| SlrError::io(path, e))
}

/// Non-empty lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_field<T: FromStr>(line_no: usize, field: &str, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| {
        SlrError::parse(
            format!("line {line_no}"),
            format!("invalid {what} {field:?}"),
        )
    })
}

pub fn parse_features_csv(text: &str) -> Result<FeatureMatrix> {
    let mut lines = content_lines(text);
    let (_, header) = lines
        .next()
        .ok_or_else(|| SlrError::parse("line 1", "missing header"))?;
    let n_dims = header.split(',').count();
    let mut data = Vec::new();
    let mut n_samples = 0;
    for (line_no, line) in lines {
        let row = n_samples;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_dims {
            return Err(SlrError::parse(
                format!("line {line_no} (row {row})"),
                format!("expected {n_dims} columns, found {}", fields.len()),
            ));
        }
        for field in fields {
            let v: f64 = parse_field(line_no, field, "number")?;
            if !v.is_finite() {
                return Err(SlrError::parse(
                    format!("line {line_no} (row {row})"),
                    format!("non-finite value {field:?}"),
                ));
            }
            data.push(v);
        }
        n_samples += 1;
    }
    if n_samples == 0 {
        return Err(SlrError::parse("end of file", "no samples"));
    }
    FeatureMatrix::new(n_samples, n_dims, data)
}

pub fn features_to_csv(features: &FeatureMatrix) -> String {
    let header: Vec<String> = (0..features.n_dims()).map(|j| format!("x{j}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for row in features.rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_features_binary(bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < 12 || &bytes[..4] != FEATURE_MAGIC {
        return Err(SlrError::parse("byte 0", "missing SLRF header"));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| SlrError::parse("byte 4", "declared shape overflows"))?;
    if body.len() != expected {
        return Err(SlrError::parse(
            "byte 12",
            format!(
                "declared {rows}x{cols} needs {expected} payload bytes, found {}",
                body.len()
            ),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (k, chunk) in body.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(SlrError::parse(
                format!("row {}", k / cols.max(1)),
                format!("non-finite value {v}"),
            ));
        }
        data.push(f64::from(v));
    }
    FeatureMatrix::new(rows, cols, data)
}

/// Serializes to the binary format. Values are narrowed to `f32`.
pub fn features_to_binary(features: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + features.as_slice().len() * 4);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&(features.n_samples() as u32).to_le_bytes());
    out.extend_from_slice(&(features.n_dims() as u32).to_le_bytes());
    for &v in features.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn load_features(path: &Path, format: FeatureFormat) -> Result<FeatureMatrix> {
    match format {
        FeatureFormat::Csv => parse_features_csv(&read_text(path)?),
        FeatureFormat::Binary => parse_features_binary(&read_bytes(path)?),
    }
}

pub fn save_features(features: &FeatureMatrix, path: &Path, format: FeatureFormat) -> Result<()> {
    match format {
        FeatureFormat::Csv => write_bytes(path, features_to_csv(features).as_bytes()),
        FeatureFormat::Binary => write_bytes(path, &features_to_binary(features)),
    }
}

pub fn labels_to_csv(labeling: &HardLabeling) -> String {
    let mut out = String::from("sample_index,label\n");
    for (i, v) in labeling.to_raw().into_iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

/// Collects `sample_index,...` rows into index order, requiring every index
/// in `0..n` exactly once.
fn index_rows<'a>(text: &'a str, kind: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = content_lines(text);
    let (_, header) = lines
        .next()
        .ok_or_else(|| SlrError::Validation(format!("{kind} file has no samples")))?;
    let width = header.split(',').count();
    let mut rows: Vec<Option<(usize, Vec<&str>)>> = Vec::new();
    let mut count = 0;
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(SlrError::parse(
                format!("line {line_no}"),
                format!("expected {width} columns, found {}", fields.len()),
            ));
        }
        let idx: usize = parse_field(line_no, fields[0], "sample index")?;
        if idx >= rows.len() {
            rows.resize(idx + 1, None);
        }
        if rows[idx].is_some() {
            return Err(SlrError::Validation(format!(
                "sample index {idx} appears more than once (line {line_no})"
            )));
        }
        rows[idx] = Some((line_no, fields[1..].to_vec()));
        count += 1;
    }
    if count == 0 {
        return Err(SlrError::Validation(format!("{kind} file has no samples")));
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| SlrError::Validation(format!("sample index {i} missing"))))
        .collect()
}

pub fn parse_labels_csv(text: &str) -> Result<HardLabeling> {
    if let Some((line_no, header)) = content_lines(text).next() {
        if header.split(',').count() != 2 {
            return Err(SlrError::parse(
                format!("line {line_no}"),
                "label files need exactly two columns: sample_index,label",
            ));
        }
    }
    let raw = index_rows(text, "label")?
        .into_iter()
        .map(|(line_no, fields)| parse_field::<i64>(line_no, fields[0], "label"))
        .collect::<Result<Vec<_>>>()?;
    HardLabeling::from_raw(&raw)
}

pub fn save_labels(labeling: &HardLabeling, path: &Path) -> Result<()> {
    write_bytes(path, labels_to_csv(labeling).as_bytes())
}

pub fn load_labels(path: &Path) -> Result<HardLabeling> {
    parse_labels_csv(&read_text(path)?)
}

pub fn soft_labels_to_csv(soft: &SoftLabelMatrix) -> String {
    let mut out = String::from("sample_index");
    for k in 0..soft.n_classes() {
        out.push_str(&format!(",p_{k}"));
    }
    out.push('\n');
    for i in 0..soft.n_samples() {
        out.push_str(&i.to_string());
        for v in soft.row(i) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_soft_labels_csv(text: &str) -> Result<SoftLabelMatrix> {
    let rows = index_rows(text, "soft label")?;
    let n_classes = rows[0].1.len();
    let rows = rows
        .into_iter()
        .map(|(line_no, fields)| {
            fields
                .into_iter()
                .map(|f| parse_field::<f64>(line_no, f, "probability"))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SoftLabelMatrix::from_rows(n_classes, &rows)
}

pub fn save_soft_labels(soft: &SoftLabelMatrix, path: &Path) -> Result<()> {
    write_bytes(path, soft_labels_to_csv(soft).as_bytes())
}

pub fn load_soft_labels(path: &Path) -> Result<SoftLabelMatrix> {
    parse_soft_labels_csv(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_small_csv() {
        let m = parse_features_csv("x0,x1\n0,0\n1,0\n0,1").unwrap();
        assert_eq!((m.n_samples(), m.n_dims()), (3, 2));
        assert_eq!(m.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn csv_nan_names_the_row() {
        let err = parse_features_csv("a,b\n0,0\n1,NaN\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn csv_ragged_row() {
        let err = parse_features_csv("a,b\n0,0\n1\n").unwrap_err();
        assert!(err.to_string().contains("expected 2 columns"));
    }

    #[test]
    fn csv_header_only_has_no_samples() {
        assert!(parse_features_csv("a,b\n").is_err());
        assert!(parse_features_csv("").is_err());
    }

    #[test]
    fn binary_bit_exact() {
        let vals: [f32; 6] = [0.1, -2.5, 3.25, 1e-7, 42.0, -0.0];
        let mut bytes = b"SLRF".to_vec();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes());
        for v in vals {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let m = parse_features_binary(&bytes).unwrap();
        assert_eq!((m.n_samples(), m.n_dims()), (2, 3));
        for (got, want) in m.as_slice().iter().zip(vals) {
            assert_eq!((*got as f32).to_bits(), want.to_bits());
        }
        assert_eq!(features_to_binary(&m), bytes);
    }

    #[test]
    fn binary_rejects_bad_header_and_length() {
        assert!(parse_features_binary(b"XXXX\0\0\0\0\0\0\0\0").is_err());
        let mut bytes = b"SLRF".to_vec();
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        assert!(parse_features_binary(&bytes).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let l = HardLabeling::from_raw(&[0, 0, -1, 1]).unwrap();
        let text = labels_to_csv(&l);
        assert_eq!(text, "sample_index,label\n0,0\n1,0\n2,-1\n3,1\n");
        assert_eq!(parse_labels_csv(&text).unwrap(), l);
    }

    #[test]
    fn labels_with_gap_fail_validation() {
        let err = parse_labels_csv("sample_index,label\n0,0\n1,2\n").unwrap_err();
        assert!(matches!(err, SlrError::Validation(_)));
    }

    #[test]
    fn labels_empty_file() {
        let err = parse_labels_csv("").unwrap_err();
        assert!(err.to_string().contains("no samples"));
        let err = parse_labels_csv("sample_index,label\n").unwrap_err();
        assert!(err.to_string().contains("no samples"));
    }

    #[test]
    fn labels_index_checks() {
        assert!(parse_labels_csv("sample_index,label\n0,0\n0,0\n").is_err());
        assert!(parse_labels_csv("sample_index,label\n0,0\n2,0\n").is_err());
        // rows may come in any order
        let l = parse_labels_csv("sample_index,label\n1,0\n0,-1\n").unwrap();
        assert_eq!(l.to_raw(), vec![-1, 0]);
    }

    #[test]
    fn soft_labels_round_trip() {
        let soft =
            SoftLabelMatrix::from_rows(3, &[vec![0.8 / 11.0, 0.9 + 0.3 / 11.0, 0.0], vec![0.0; 3]])
                .unwrap();
        let text = soft_labels_to_csv(&soft);
        assert!(text.starts_with("sample_index,p_0,p_1,p_2\n"));
        let back = parse_soft_labels_csv(&text).unwrap();
        assert_eq!(back, soft);
        assert!(back.is_masked(1));
    }

    #[test]
    fn format_from_path() {
        assert_eq!(
            FeatureFormat::from_path(Path::new("a.bin")),
            FeatureFormat::Binary
        );
        assert_eq!(
            FeatureFormat::from_path(Path::new("a.csv")),
            FeatureFormat::Csv
        );
    }
}
