//! One-field snapshot files in CSV or raw little-endian form.
//!
//! The raw layout is a 64-byte header followed by `count` little-endian `f64`
//! values in row-major order:
//!
//! | bytes   | content                          |
//! |---------|----------------------------------|
//! | 0..8    | magic `GRANSNAP`                 |
//! | 8..12   | format version, `u32`            |
//! | 12..16  | dimension, `u32`                 |
//! | 16..24  | field name, NUL padded           |
//! | 24..32  | time, `f64`                      |
//! | 32..40  | `nx`, `ny` as `u32`              |
//! | 40..56  | `lx`, `ly` as `f64`              |
//! | 56..64  | value count, `u64`               |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Grid, Species, State};

pub const SNAPSHOT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"GRANSNAP";
const HEADER_BYTES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    Csv,
    Raw,
}

impl SnapshotFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SnapshotFormat::Csv => "csv",
            SnapshotFormat::Raw => "bin",
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(SnapshotFormat::Csv),
            Some("bin") => Ok(SnapshotFormat::Raw),
            _ => Err(Error::Snapshot {
                path: path.to_path_buf(),
                reason: "expected a .csv or .bin extension".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub field: String,
    pub t: f64,
    pub grid: Grid,
    pub version: u32,
    pub values: Vec<f64>,
}

impl SnapshotFile {
    pub fn new(field: &str, t: f64, grid: Grid, values: Vec<f64>) -> Result<Self> {
        grid.check(&values)?;
        if field.is_empty() || field.len() > 8 || !field.is_ascii() {
            return Err(Error::validation(
                "field",
                "snapshot field names are 1 to 8 ASCII bytes",
            ));
        }
        Ok(SnapshotFile {
            field: field.to_string(),
            t,
            grid,
            version: SNAPSHOT_VERSION,
            values,
        })
    }

    pub fn write(&self, path: &Path, format: SnapshotFormat) -> Result<()> {
        let bytes = match format {
            SnapshotFormat::Csv => self.to_csv().into_bytes(),
            SnapshotFormat::Raw => self.to_raw(),
        };
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let format = SnapshotFormat::from_path(path)?;
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        match format {
            SnapshotFormat::Csv => {
                let text = String::from_utf8(bytes).map_err(|_| Error::Snapshot {
                    path: path.to_path_buf(),
                    reason: "not UTF-8".into(),
                })?;
                Self::from_csv(&text, path)
            }
            SnapshotFormat::Raw => Self::from_raw(&bytes, path),
        }
    }

    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut s = String::new();
        s.push_str(&format!("# field = {}\n", self.field));
        s.push_str(&format!("# t = {:.16e}\n", self.t));
        s.push_str(&format!("# dim = {}\n", g.dim()));
        s.push_str(&format!("# cells = {} {}\n", g.nx(), g.ny()));
        s.push_str(&format!(
            "# lengths = {:.16e} {:.16e}\n",
            g.lengths()[0],
            lengths_y(g)
        ));
        s.push_str(&format!("# version = {}\n", self.version));
        for row in self.values.chunks(g.nx()) {
            let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Snapshot {
            path: path.to_path_buf(),
            reason,
        };
        let mut header = std::collections::BTreeMap::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| bad(format!("line {}: header without '='", lineno + 1)))?;
                header.insert(k.trim().to_string(), v.trim().to_string());
            } else if !line.trim().is_empty() {
                for tok in line.split(',') {
                    values.push(
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?,
                    );
                }
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .ok_or_else(|| bad(format!("missing header `{k}`")))
        };
        let field = get("field")?.clone();
        let t: f64 = get("t")?.parse().map_err(|e| bad(format!("t: {e}")))?;
        let dim: usize = get("dim")?.parse().map_err(|e| bad(format!("dim: {e}")))?;
        let cells: Vec<usize> = get("cells")?
            .split_whitespace()
            .map(|x| x.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("cells: {e}")))?;
        let lengths: Vec<f64> = get("lengths")?
            .split_whitespace()
            .map(|x| x.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("lengths: {e}")))?;
        let version: u32 = get("version")?
            .parse()
            .map_err(|e| bad(format!("version: {e}")))?;
        if cells.len() != 2 || lengths.len() != 2 {
            return Err(bad("cells and lengths need two entries".into()));
        }
        let grid = grid_from_header(dim, [cells[0], cells[1]], [lengths[0], lengths[1]])
            .map_err(|e| bad(e.to_string()))?;
        finish(field, t, grid, version, values, path)
    }

    pub fn to_raw(&self) -> Vec<u8> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(HEADER_BYTES + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
        let mut name = [0u8; 8];
        name[..self.field.len()].copy_from_slice(self.field.as_bytes());
        out.extend_from_slice(&name);
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&(g.nx() as u32).to_le_bytes());
        out.extend_from_slice(&(g.ny() as u32).to_le_bytes());
        out.extend_from_slice(&g.lengths()[0].to_le_bytes());
        out.extend_from_slice(&lengths_y(g).to_le_bytes());
        out.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for x in &self.values {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_raw(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::Snapshot {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if bytes.len() < HEADER_BYTES || &bytes[..8] != MAGIC {
            return Err(bad("missing GRANSNAP header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        let dim = u32_at(12) as usize;
        let name_end = bytes[16..24].iter().position(|&b| b == 0).unwrap_or(8);
        let field = std::str::from_utf8(&bytes[16..16 + name_end])
            .map_err(|_| bad("field name is not UTF-8"))?
            .to_string();
        let t = f64_at(24);
        let cells = [u32_at(32) as usize, u32_at(36) as usize];
        let lengths = [f64_at(40), f64_at(48)];
        let count = u64::from_le_bytes(bytes[56..64].try_into().unwrap()) as usize;
        let payload = &bytes[HEADER_BYTES..];
        if payload.len() != 8 * count {
            return Err(bad("payload length disagrees with the header count"));
        }
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let grid = grid_from_header(dim, cells, lengths).map_err(|e| bad(&e.to_string()))?;
        finish(field, t, grid, version, values, path)
    }
}

fn lengths_y(g: &Grid) -> f64 {
    if g.dim() == 2 {
        g.lengths()[1]
    } else {
        0.0
    }
}

fn grid_from_header(dim: usize, cells: [usize; 2], lengths: [f64; 2]) -> Result<Grid> {
    match dim {
        1 => Grid::new_1d(cells[0], lengths[0]),
        2 => Grid::new_2d(cells[0], cells[1], lengths[0], lengths[1]),
        _ => Err(Error::validation(
            "dim",
            format!("must be 1 or 2, got {dim}"),
        )),
    }
}

fn finish(
    field: String,
    t: f64,
    grid: Grid,
    version: u32,
    values: Vec<f64>,
    path: &Path,
) -> Result<SnapshotFile> {
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot {
            path: path.to_path_buf(),
            reason: format!("unsupported version {version}"),
        });
    }
    if values.len() != grid.len() {
        return Err(Error::Snapshot {
            path: path.to_path_buf(),
            reason: format!("expected {} values, found {}", grid.len(), values.len()),
        });
    }
    Ok(SnapshotFile {
        field,
        t,
        grid,
        version,
        values,
    })
}

/// `{dir}/{field}_{index:06}.{ext}`
pub fn snapshot_path(dir: &Path, field: &str, index: usize, format: SnapshotFormat) -> PathBuf {
    dir.join(format!("{field}_{index:06}.{}", format.extension()))
}

/// Writes the four species of `state` and returns their paths.
pub fn write_state(
    dir: &Path,
    index: usize,
    state: &State,
    grid: &Grid,
    format: SnapshotFormat,
) -> Result<[PathBuf; 4]> {
    let mut paths: [PathBuf; 4] = Default::default();
    for sp in Species::ALL {
        let snap = SnapshotFile::new(sp.name(), state.t, *grid, state.field(sp).to_vec())?;
        let path = snapshot_path(dir, sp.name(), index, format);
        snap.write(&path, format)?;
        paths[sp.index()] = path;
    }
    Ok(paths)
}

/// Reads four snapshot files into a state; they must share time and grid.
pub fn read_state(paths: &[PathBuf; 4]) -> Result<(State, Grid)> {
    let snaps: Vec<SnapshotFile> = paths
        .iter()
        .map(|p| SnapshotFile::read(p))
        .collect::<Result<_>>()?;
    let grid = snaps[0].grid;
    let t = snaps[0].t;
    for (sp, (snap, path)) in Species::ALL.iter().zip(snaps.iter().zip(paths)) {
        if snap.grid != grid || snap.t != t {
            return Err(Error::Snapshot {
                path: path.clone(),
                reason: "time or grid differs from the u snapshot".into(),
            });
        }
        if snap.field != sp.name() {
            return Err(Error::Snapshot {
                path: path.clone(),
                reason: format!("holds field `{}`, expected `{}`", snap.field, sp.name()),
            });
        }
    }
    let [u, v, w, z]: [SnapshotFile; 4] = snaps.try_into().unwrap();
    let state = State::from_fields(&grid, t, [u.values, v.values, w.values, z.values])?;
    Ok((state, grid))
}

/// The four sibling paths of a `u_NNNNNN` snapshot.
pub fn sibling_paths(u_path: &Path) -> Result<[PathBuf; 4]> {
    let name = u_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Snapshot {
            path: u_path.to_path_buf(),
            reason: "not a file path".into(),
        })?;
    let rest = name.strip_prefix("u_").ok_or_else(|| Error::Snapshot {
        path: u_path.to_path_buf(),
        reason: "expected a file named u_NNNNNN.*".into(),
    })?;
    let dir = u_path.parent().unwrap_or(Path::new(""));
    Ok(Species::ALL.map(|sp| dir.join(format!("{}_{rest}", sp.name()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SnapshotFile {
        let g = Grid::new_2d(5, 4, 1.5, 0.75).unwrap();
        let values = g.sample(|x, y| (x * 7.3).sin() + y / 3.0 + 1e-300);
        SnapshotFile::new("w", 0.1 + 0.2, g, values).unwrap()
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = sample();
        let text = s.to_csv();
        assert!(text.starts_with("# field = w\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
        let back = SnapshotFile::from_csv(&text, Path::new("w.csv")).unwrap();
        assert_eq!(back, s);
        for (a, b) in back.values.iter().zip(&s.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn raw_round_trip_and_layout() {
        let s = sample();
        let bytes = s.to_raw();
        assert_eq!(bytes.len(), 64 + 8 * 20);
        assert_eq!(&bytes[..8], b"GRANSNAP");
        assert_eq!(&bytes[16..18], b"w\0");
        assert_eq!(u64::from_le_bytes(bytes[56..64].try_into().unwrap()), 20);
        assert_eq!(
            SnapshotFile::from_raw(&bytes, Path::new("w.bin")).unwrap(),
            s
        );
        assert!(SnapshotFile::from_raw(&bytes[..100], Path::new("w.bin")).is_err());
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::unit(1, 6).unwrap();
        let mut st = State::homogeneous(&g, [1.0, 2.0, 3.0, 4.0]).unwrap();
        st.t = 0.25;
        for format in [SnapshotFormat::Csv, SnapshotFormat::Raw] {
            let paths = write_state(dir.path(), 3, &st, &g, format).unwrap();
            assert!(paths[2].ends_with(format!("w_000003.{}", format.extension())));
            let (back, g2) = read_state(&sibling_paths(&paths[0]).unwrap()).unwrap();
            assert_eq!(back, st);
            assert_eq!(g2, g);
        }
        let missing = dir.path().join("u_000099.csv");
        assert!(matches!(
            SnapshotFile::read(&missing),
            Err(Error::Io { .. })
        ));
    }
}
