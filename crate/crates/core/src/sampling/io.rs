use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FieldSample, SiteSet};
use crate::kernels::Anisotropy;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Sidecar document describing how a sample was simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub format_version: u32,
    pub family: String,
    pub nu: f64,
    pub anisotropy: Anisotropy,
    pub phi: f64,
    pub p: usize,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n_side: Option<usize>,
    pub d: usize,
    pub delta: Option<f64>,
}

/// 17 significant digits: round-trips every `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text with header `x1,...,xd,y`.
pub fn sample_csv_string(sample: &FieldSample) -> String {
    let d = sample.sites.dim();
    let mut out = String::with_capacity(sample.len() * (d + 1) * 24);
    let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).chain(std::iter::once("y".into())).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (s, y) in sample.sites.iter().zip(&sample.y) {
        for v in s {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&fmt_f64(*y));
        out.push('\n');
    }
    out
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::InvalidParameter(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes the sample CSV and, when present, its provenance as
/// `<path>.json` beside it.
pub fn write_sample_csv(path: &Path, sample: &FieldSample) -> Result<()> {
    write_atomic(path, sample_csv_string(sample).as_bytes())?;
    if let Some(prov) = &sample.provenance {
        let json = serde_json::to_string_pretty(prov)?;
        write_atomic(&path.with_extension("json"), json.as_bytes())?;
    }
    Ok(())
}

/// Reads a sample CSV. Row numbers in errors count the header as row 1.
pub fn read_sample_csv(path: &Path) -> Result<FieldSample> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let header = reader.headers().map_err(|e| Error::Parse { row: 1, msg: e.to_string() })?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Empty(format!("{} has no header", path.display())));
    }
    let d = header.len().checked_sub(1).filter(|d| *d >= 1).ok_or_else(|| Error::Parse {
        row: 1,
        msg: "header must be x1,...,xd,y".into(),
    })?;
    let expected: Vec<String> = (1..=d).map(|i| format!("x{i}")).chain(std::iter::once("y".into())).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Parse { row: 1, msg: format!("header must be {}", expected.join(",")) });
    }
    let mut coords = Vec::new();
    let mut y = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| Error::Parse { row, msg: e.to_string() })?;
        if rec.len() != d + 1 {
            return Err(Error::Parse { row, msg: format!("expected {} fields, found {}", d + 1, rec.len()) });
        }
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse { row, msg: format!("not a number: {field:?}") })?;
            if !v.is_finite() {
                return Err(Error::Parse { row, msg: format!("non-finite value {field:?}") });
            }
            if i < d {
                coords.push(v);
            } else {
                y.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::Empty(format!("{} has no data rows", path.display())));
    }
    FieldSample::new(SiteSet::from_coords(d, coords)?, y)
}
