//! CSV and LIBSVM file ingestion and emission.
//!
//! The CSV dialect is deliberately narrow: comma separator, '.' decimal
//! point, optional single header row, no quoting (a quote character is an
//! error). The LIBSVM format is the sparse text form `label idx:val idx:val`
//! with 1-based, strictly increasing indices per line; absent entries are 0.

use super::{Dataset, Provenance};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::path::Path;

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Header name (requires a header row).
    Name(String),
    /// Zero-based column index.
    Index(usize),
}

/// Reads a CSV file into a dataset.
///
/// Labels must form exactly two distinct values. When `positive_label` is
/// given, rows matching it map to +1 and the single other value to −1;
/// otherwise labels must already parse numerically to ±1.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    has_header: bool,
    positive_label: Option<&str>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = dataset_name(path);

    let mut lines = content.lines().enumerate();
    let label_idx;
    let mut ncols = None;
    if has_header {
        let (lineno, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
        let fields = split_row(path, lineno + 1, header)?;
        ncols = Some(fields.len());
        label_idx = match label_column {
            LabelColumn::Name(n) => fields.iter().position(|f| f == n).ok_or_else(|| {
                Error::parse(path, lineno + 1, format!("label column '{n}' not in header"))
            })?,
            LabelColumn::Index(i) => *i,
        };
    } else {
        label_idx = match label_column {
            LabelColumn::Name(n) => {
                return Err(Error::parse(
                    path,
                    1,
                    format!("label column '{n}' requires a header row"),
                ))
            }
            LabelColumn::Index(i) => *i,
        };
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_row(path, lineno, line)?;
        match ncols {
            None => ncols = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected {c} fields, found {}", fields.len()),
                ))
            }
            _ => {}
        }
        if label_idx >= fields.len() {
            return Err(Error::parse(
                path,
                lineno,
                format!("label column {label_idx} out of range"),
            ));
        }
        let mut feats = Vec::with_capacity(fields.len() - 1);
        for (j, f) in fields.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(f.to_string());
                continue;
            }
            let v: f64 = f.trim().parse().map_err(|_| {
                Error::parse(path, lineno, format!("non-numeric feature cell '{f}'"))
            })?;
            feats.push(v);
        }
        rows.push(feats);
    }

    if rows.is_empty() {
        return Err(Error::parse(path, 1, "no data rows"));
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::NoFeatureColumns);
    }

    let y = map_labels(path, &raw_labels, positive_label)?;
    let mut x = DMatrix::zeros(rows.len(), d);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Dataset::new(name, x, y, Provenance::Raw)
}

/// Splits a CSV row, rejecting quote characters (the dialect has no quoting).
fn split_row<'l>(path: &Path, lineno: usize, line: &'l str) -> Result<Vec<&'l str>> {
    if line.contains('"') {
        return Err(Error::parse(path, lineno, "quoting is not supported"));
    }
    Ok(line.split(',').map(|f| f.trim()).collect())
}

fn map_labels(path: &Path, raw: &[String], positive: Option<&str>) -> Result<Vec<i8>> {
    let mut distinct: Vec<&str> = Vec::new();
    for l in raw {
        if !distinct.contains(&l.as_str()) {
            distinct.push(l);
        }
    }
    if distinct.len() > 2 {
        return Err(Error::parse(
            path,
            1,
            format!("more than two distinct labels: {distinct:?}"),
        ));
    }
    match positive {
        Some(p) => {
            if !distinct.contains(&p) {
                return Err(Error::parse(
                    path,
                    1,
                    format!("positive label '{p}' does not occur"),
                ));
            }
            Ok(raw.iter().map(|l| if l == p { 1 } else { -1 }).collect())
        }
        None => raw
            .iter()
            .map(|l| match l.trim().parse::<f64>() {
                Ok(v) if v == 1.0 => Ok(1),
                Ok(v) if v == -1.0 => Ok(-1),
                _ => Err(Error::parse(
                    path,
                    1,
                    format!("label '{l}' is not ±1; pass an explicit positive label"),
                )),
            })
            .collect(),
    }
}

/// Reads a LIBSVM sparse-format file into a dense dataset.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = dataset_name(path);

    let mut rows: Vec<(i8, Vec<(usize, f64)>)> = Vec::new();
    let mut d = 0usize;
    for (lineno, line) in content.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let label = match label_tok.parse::<f64>() {
            Ok(v) if v == 1.0 => 1i8,
            Ok(v) if v == -1.0 => -1i8,
            _ => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("unparseable label '{label_tok}'"),
                ))
            }
        };
        let mut entries = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| {
                Error::parse(path, lineno, format!("malformed entry '{tok}'"))
            })?;
            let idx: usize = idx_s.parse().map_err(|_| {
                Error::parse(path, lineno, format!("bad feature index '{idx_s}'"))
            })?;
            if idx == 0 || idx <= prev {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("feature indices must be 1-based and strictly increasing (got {idx} after {prev})"),
                ));
            }
            let val: f64 = val_s.parse().map_err(|_| {
                Error::parse(path, lineno, format!("bad feature value '{val_s}'"))
            })?;
            prev = idx;
            d = d.max(idx);
            entries.push((idx, val));
        }
        rows.push((label, entries));
    }

    if rows.is_empty() {
        return Err(Error::parse(path, 1, "no data rows"));
    }
    if d == 0 {
        return Err(Error::NoFeatureColumns);
    }
    let mut x = DMatrix::zeros(rows.len(), d);
    let mut y = Vec::with_capacity(rows.len());
    for (i, (label, entries)) in rows.iter().enumerate() {
        y.push(*label);
        for &(idx, val) in entries {
            x[(i, idx - 1)] = val;
        }
    }
    Dataset::new(name, x, y, Provenance::Raw)
}

/// Writes a dataset as CSV with columns x0..x{d-1},y and a header row.
///
/// Floats use the shortest round-trip decimal form, so a read-back is exact.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let header: Vec<String> = (0..ds.d()).map(|j| format!("x{j}")).collect();
    let _ = writeln!(out, "{},y", header.join(","));
    for i in 0..ds.n() {
        for j in 0..ds.d() {
            let _ = write!(out, "{},", ds.x[(i, j)]);
        }
        let _ = writeln!(out, "{}", ds.y[i]);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes a dataset in LIBSVM format.
///
/// Every entry is written, zeros included, so the column count and exact
/// values survive a round trip.
pub fn write_libsvm(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for i in 0..ds.n() {
        let _ = write!(out, "{:+}", ds.y[i]);
        for j in 0..ds.d() {
            let _ = write!(out, " {}:{}", j + 1, ds.x[(i, j)]);
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}
