//! `diagnostics.csv`: one header line, then one row per output time.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::functionals::DiagnosticsRow;

pub fn header_line() -> String {
    DiagnosticsRow::COLUMNS.join(",")
}

/// Seventeen significant digits, enough to round-trip every `f64`.
pub fn format_row(row: &DiagnosticsRow) -> String {
    let cells: Vec<String> = row.values().iter().map(|x| format!("{x:.16e}")).collect();
    cells.join(",")
}

pub fn parse_row(line: &str) -> Option<DiagnosticsRow> {
    let vals: Vec<f64> = line
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .ok()?;
    let arr: [f64; 21] = vals.try_into().ok()?;
    Some(DiagnosticsRow::from_values(arr))
}

/// Streaming writer; the header is written on creation.
pub struct DiagnosticsWriter {
    out: BufWriter<fs::File>,
    path: PathBuf,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = DiagnosticsWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        w.line(&header_line())?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn write_row(&mut self, row: &DiagnosticsRow) -> Result<()> {
        self.line(&format_row(row))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    let mut w = DiagnosticsWriter::create(path)?;
    for r in rows {
        w.write_row(r)?;
    }
    w.finish()
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(header_line().as_str()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("{}: unexpected diagnostics header", path.display()),
        });
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            parse_row(l).ok_or_else(|| Error::Parse {
                line: i + 2,
                message: format!("{}: expected 21 numeric columns", path.display()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Grid, Params, SigmaSpec, State};

    #[test]
    fn header_has_fixed_column_order() {
        assert_eq!(
            header_line(),
            "t,mass_u,mass_v,mass_w,mass_z,y_mass,linf_u,linf_v,linf_w,linf_z,energy1,energy2,\
             diss_grad_u,diss_hess_v,diss_sigv_u,diss_grad_z,diss_hess_w,diss_sigw_z,\
             diss_quartic_v,diss_quartic_w,dt"
        );
    }

    #[test]
    fn empty_and_single_row_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("diagnostics.csv");
        write_diagnostics(&p, &[]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), header_line() + "\n");
        assert!(read_diagnostics(&p).unwrap().is_empty());

        let g = Grid::new_2d(8, 8, 2.0, 1.0).unwrap();
        let s = State::homogeneous(&g, [1.0; 4]).unwrap();
        let row =
            DiagnosticsRow::compute(&s, &Params::unit(), SigmaSpec::Identity, &g, 1e-3).unwrap();
        write_diagnostics(&p, &[row]).unwrap();
        let back = read_diagnostics(&p).unwrap();
        assert_eq!(back, vec![row]);
        assert!((back[0].y_mass - 6.0 * g.measure()).abs() < 1e-13);
        let line = fs::read_to_string(&p).unwrap();
        let second = line.lines().nth(1).unwrap();
        assert!(second.starts_with("0.0000000000000000e0,"));
    }
}
