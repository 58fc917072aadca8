//! File formats and bit-stable report output.
//!
//! Floats are written with 17 significant digits in exponent form and object keys are
//! sorted, so equal inputs give byte-identical files. Every write goes to a temporary
//! file in the target directory that is then renamed over the destination.
//!
//! Tensor files list nonzero entries:
//!
//! * isometry `{"d": 2, "entries": [[l1, l2, u, re, im], ...]}` for `<l1 l2|V|u>`,
//! * top tensor `{"d": 2, "entries": [[l1, l2, re, im], ...]}` for `C[l1, l2]`,
//! * observable `{"matrix": [[[re, im], ...], ...]}`, row-major.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::tensor_core::{Isometry, Observable, TopTensor};

pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with fixed float formatting and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // Round-trip through Value so that map keys come out sorted.
    let value = serde_json::to_value(value)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json_string(value)?.as_bytes())
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_atomic(path, csv_string(header, rows).as_bytes())
}

#[derive(Serialize, Deserialize)]
struct IsometryFile {
    d: usize,
    entries: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ObservableFile {
    matrix: Vec<Vec<[f64; 2]>>,
}

fn index(x: f64, d: usize, what: &str) -> Result<usize> {
    if x.fract() != 0.0 || x < 0.0 || x >= d as f64 {
        return Err(Error::arg(format!(
            "{what} index {x} is not an integer in 0..{d}"
        )));
    }
    Ok(x as usize)
}

/// Reads the value part of an entry row; the imaginary part may be omitted.
fn entry_value(row: &[f64], at: usize) -> Result<crate::linalg::C64> {
    match row.len() - at {
        1 => Ok(c(row[at], 0.0)),
        2 => Ok(c(row[at], row[at + 1])),
        _ => Err(Error::arg(format!("entry {row:?} has the wrong length"))),
    }
}

pub fn parse_isometry(text: &str) -> Result<Isometry> {
    let f: IsometryFile = serde_json::from_str(text)?;
    let mut entries = Vec::with_capacity(f.entries.len());
    for row in &f.entries {
        if row.len() < 4 {
            return Err(Error::arg(format!("isometry entry {row:?} is too short")));
        }
        entries.push((
            index(row[0], f.d, "l1")?,
            index(row[1], f.d, "l2")?,
            index(row[2], f.d, "u")?,
            entry_value(row, 3)?,
        ));
    }
    Isometry::from_entries(f.d, &entries)
}

pub fn parse_top_tensor(text: &str) -> Result<TopTensor> {
    let f: IsometryFile = serde_json::from_str(text)?;
    let mut entries = Vec::with_capacity(f.entries.len());
    for row in &f.entries {
        if row.len() < 3 {
            return Err(Error::arg(format!("top tensor entry {row:?} is too short")));
        }
        entries.push((
            index(row[0], f.d, "l1")?,
            index(row[1], f.d, "l2")?,
            entry_value(row, 2)?,
        ));
    }
    TopTensor::from_entries(f.d, &entries)
}

pub fn parse_observable(text: &str) -> Result<Observable> {
    let f: ObservableFile = serde_json::from_str(text)?;
    let n = f.matrix.len();
    if f.matrix.iter().any(|r| r.len() != n) {
        return Err(Error::shape("observable matrix is not square"));
    }
    Observable::new(CMatrix::from_fn(n, n, |i, j| {
        c(f.matrix[i][j][0], f.matrix[i][j][1])
    }))
}

pub fn isometry_json(lam: &Isometry) -> serde_json::Value {
    let entries: Vec<Vec<f64>> = lam
        .entries()
        .into_iter()
        .map(|(l1, l2, u, z)| vec![l1 as f64, l2 as f64, u as f64, z.re, z.im])
        .collect();
    serde_json::json!({"d": lam.d(), "entries": entries})
}

pub fn top_tensor_json(top: &TopTensor) -> serde_json::Value {
    let entries: Vec<Vec<f64>> = top
        .entries()
        .into_iter()
        .map(|(l1, l2, z)| vec![l1 as f64, l2 as f64, z.re, z.im])
        .collect();
    serde_json::json!({"d": top.d(), "entries": entries})
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::Io)
}

pub fn read_isometry(path: &Path) -> Result<Isometry> {
    parse_isometry(&read(path)?)
}

pub fn read_top_tensor(path: &Path) -> Result<TopTensor> {
    parse_top_tensor(&read(path)?)
}

/// A built-in name (`x`, `y`, `z`, `p0`, `p1`, `id`) or a path to an observable file.
pub fn resolve_observable(spec: &str) -> Result<Observable> {
    match Observable::named(spec) {
        Ok(o) => Ok(o),
        Err(_) if Path::new(spec).exists() => parse_observable(&read(Path::new(spec))?),
        Err(e) => Err(e),
    }
}
