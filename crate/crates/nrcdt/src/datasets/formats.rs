//! On-disk formats: the exact atom format, PGM and CSV rasters, and JSON
//! manifests.
//!
//! The atom format is lossless for measures (positions and weights as
//! 64-bit floats); rasters exist for interoperability and quantize.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure2D, Point2};

/// Magic bytes opening an atom file.
pub const ATOM_MAGIC: &[u8; 7] = b"NRCDT1\0";

/// A grayscale intensity grid, row-major, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: width * height,
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::ParseError(format!(
                    "pixel {i}: intensity {v} must be finite and nonnegative"
                )));
            }
        }
        Ok(Raster {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Converts to a measure with one atom per positive pixel center:
    /// pixel `(i, j)` of an `H x W` grid maps to
    /// `((j + 0.5) / W - 0.5, 0.5 - (i + 0.5) / H)`, weight proportional
    /// to intensity.
    pub fn to_measure(&self) -> Result<DiscreteMeasure2D> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let (w, h) = (self.width as f64, self.height as f64);
        for i in 0..self.height {
            for j in 0..self.width {
                let v = self.values[i * self.width + j];
                if v > 0.0 {
                    points.push(Point2::new(
                        (j as f64 + 0.5) / w - 0.5,
                        0.5 - (i as f64 + 0.5) / h,
                    ));
                    weights.push(v);
                }
            }
        }
        DiscreteMeasure2D::new(points, weights)
    }
}

/// Bins the atoms of a measure onto a `size x size` grid, the inverse of
/// the pixel-center rule. Atoms outside the unit frame are clamped to the
/// nearest boundary pixel so no mass is lost.
pub fn rasterize(m: &DiscreteMeasure2D, size: usize) -> Raster {
    let mut values = vec![0.0; size * size];
    let s = size as f64;
    for (p, &w) in m.points().iter().zip(m.weights()) {
        let j = (((p.x + 0.5) * s).floor() as i64).clamp(0, size as i64 - 1) as usize;
        let i = (((0.5 - p.y) * s).floor() as i64).clamp(0, size as i64 - 1) as usize;
        values[i * size + j] += w;
    }
    Raster {
        width: size,
        height: size,
        values,
    }
}

/// Writes `bytes` to `path` atomically (temp file in the same directory,
/// then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("not a file path: {}", path.display())))?;
    let tmp = parent.join(format!(
        ".{}.tmp-{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let ctx = || path.display().to_string();
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(ctx(), e))?;
    f.write_all(bytes).map_err(|e| Error::io(ctx(), e))?;
    f.sync_all().map_err(|e| Error::io(ctx(), e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(ctx(), e))?;
    Ok(())
}

/// Serializes a measure in the atom format.
pub fn atoms_to_bytes(m: &DiscreteMeasure2D) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(ATOM_MAGIC.len() + 8 + 24 * m.len());
    bytes.extend_from_slice(ATOM_MAGIC);
    bytes.extend_from_slice(&(m.len() as u64).to_le_bytes());
    for (p, &w) in m.points().iter().zip(m.weights()) {
        bytes.extend_from_slice(&p.x.to_le_bytes());
        bytes.extend_from_slice(&p.y.to_le_bytes());
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    bytes
}

/// Parses a measure from atom-format bytes. `name` labels error messages.
pub fn atoms_from_bytes(bytes: &[u8], name: &str) -> Result<DiscreteMeasure2D> {
    if bytes.len() < ATOM_MAGIC.len() + 8 {
        return Err(Error::ParseError(format!("{name}: truncated atom header")));
    }
    if &bytes[..ATOM_MAGIC.len()] != ATOM_MAGIC {
        return Err(Error::UnsupportedFormat(format!(
            "{name}: bad magic, not an atom file"
        )));
    }
    let mut off = ATOM_MAGIC.len();
    let count = u64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes")) as usize;
    off += 8;
    if bytes.len() != off + 24 * count {
        return Err(Error::ParseError(format!(
            "{name}: expected {} atom bytes, found {}",
            24 * count,
            bytes.len() - off
        )));
    }
    let mut points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let read_f64 = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    for k in 0..count {
        let base = off + 24 * k;
        points.push(Point2::new(read_f64(base), read_f64(base + 8)));
        weights.push(read_f64(base + 16));
    }
    for (k, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::ParseError(format!(
                "{name}: atom {k} has invalid weight {w}"
            )));
        }
    }
    // Files we wrote carry normalized weights; keep them bit-exact so the
    // round trip is lossless. Foreign files with raw weights normalize.
    let total: f64 = weights.iter().sum();
    let result = if (total - 1.0).abs() <= 1e-9 {
        DiscreteMeasure2D::from_normalized(points, weights)
    } else {
        DiscreteMeasure2D::new(points, weights)
    };
    result.map_err(|e| match e {
        Error::ZeroMass(_) => Error::ZeroMass(name.to_string()),
        other => other,
    })
}

pub fn write_atoms(path: &Path, m: &DiscreteMeasure2D) -> Result<()> {
    write_atomic(path, &atoms_to_bytes(m))
}

pub fn read_atoms(path: &Path) -> Result<DiscreteMeasure2D> {
    let bytes = read_file(path)?;
    atoms_from_bytes(&bytes, &path.display().to_string())
}

/// Serializes a raster as binary PGM (P5, maxval 255), scaling intensities
/// so the brightest pixel maps to 255.
pub fn raster_to_pgm(r: &Raster) -> Vec<u8> {
    let max = r.values.iter().cloned().fold(0.0, f64::max);
    let mut bytes = format!("P5\n{} {}\n255\n", r.width, r.height).into_bytes();
    bytes.extend(r.values.iter().map(|&v| {
        if max > 0.0 {
            (255.0 * v / max).round() as u8
        } else {
            0
        }
    }));
    bytes
}

pub fn write_pgm(path: &Path, r: &Raster) -> Result<()> {
    write_atomic(path, &raster_to_pgm(r))
}

/// Parses a binary PGM (P5) image with maxval at most 255.
pub fn pgm_from_bytes(bytes: &[u8], name: &str) -> Result<Raster> {
    let mut pos = 0usize;

    // Header tokens are ASCII separated by whitespace; '#' starts a
    // comment running to end of line.
    let mut next_token = |bytes: &[u8]| -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::ParseError(format!("{name}: truncated PGM header")));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = next_token(bytes)?;
    if magic != "P5" {
        return Err(Error::UnsupportedFormat(format!(
            "{name}: magic {magic:?}, only binary PGM (P5) is supported"
        )));
    }
    let parse_dim = |tok: String, what: &str| -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| Error::ParseError(format!("{name}: bad {what} {tok:?}")))
    };
    let width = parse_dim(next_token(bytes)?, "width")?;
    let height = parse_dim(next_token(bytes)?, "height")?;
    let maxval = parse_dim(next_token(bytes)?, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "{name}: maxval {maxval}, only single-byte samples are supported"
        )));
    }
    // Exactly one whitespace byte separates the header from pixel data.
    pos += 1;
    let expected = width * height;
    let data = bytes.get(pos..).unwrap_or_default();
    if data.len() != expected {
        return Err(Error::ParseError(format!(
            "{name}: expected {expected} pixel bytes, found {}",
            data.len()
        )));
    }
    Raster::new(width, height, data.iter().map(|&b| b as f64).collect())
}

pub fn read_pgm(path: &Path) -> Result<Raster> {
    let bytes = read_file(path)?;
    pgm_from_bytes(&bytes, &path.display().to_string())
}

/// Parses a CSV grid: one row per line, comma-separated intensities.
pub fn csv_grid_from_str(text: &str, name: &str) -> Result<Raster> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (col, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::ParseError(format!(
                    "{name}:{}:{}: bad intensity {cell:?}",
                    lineno + 1,
                    col + 1
                ))
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::ParseError(format!(
                    "{name}:{}: row has {} cells, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::ParseError(format!("{name}: empty grid")));
    }
    let width = rows[0].len();
    let height = rows.len();
    Raster::new(width, height, rows.into_iter().flatten().collect()).map_err(|e| match e {
        Error::ParseError(msg) => Error::ParseError(format!("{name}: {msg}")),
        other => other,
    })
}

pub fn read_csv_grid(path: &Path) -> Result<Raster> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::ParseError(format!("{}: not valid UTF-8", path.display())))?;
    csv_grid_from_str(&text, &path.display().to_string())
}

/// The JSON manifest listing dataset items.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub class_count: usize,
    pub items: Vec<ManifestItem>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestItem {
    pub path: String,
    pub label: usize,
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.display().to_string()));
    }
    fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))
}
