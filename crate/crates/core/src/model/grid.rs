use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 4;

/// Uniform cell-centred mesh on a box `[0, L_x]` or `[0, L_x] × [0, L_y]`.
///
/// Cells are stored row-major: index `j * nx + i`, with `i` along x. A 1D grid
/// has `ny = 1` and its measure is `L_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    cells: [usize; 2],
    lengths: [f64; 2],
}

impl Grid {
    pub fn new_1d(nx: usize, lx: f64) -> Result<Self> {
        Self::new(&[nx], &[lx])
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(&[nx, ny], &[lx, ly])
    }

    /// Unit interval or unit square with `n` cells per axis.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        match dim {
            1 => Self::new_1d(n, 1.0),
            2 => Self::new_2d(n, n, 1.0, 1.0),
            _ => Err(Error::validation(
                "dim",
                format!("must be 1 or 2, got {dim}"),
            )),
        }
    }

    pub fn new(cells: &[usize], lengths: &[f64]) -> Result<Self> {
        let dim = cells.len();
        if !(dim == 1 || dim == 2) {
            return Err(Error::validation(
                "dim",
                format!("must be 1 or 2, got {dim}"),
            ));
        }
        if lengths.len() != dim {
            return Err(Error::validation(
                "lengths",
                format!("expected {dim} entries, got {}", lengths.len()),
            ));
        }
        for &n in cells {
            if n < MIN_CELLS {
                return Err(Error::validation(
                    "cells",
                    format!("need at least {MIN_CELLS} cells per axis, got {n}"),
                ));
            }
        }
        for &l in lengths {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::validation(
                    "lengths",
                    format!("must be positive, got {l}"),
                ));
            }
        }
        let mut g = Grid {
            dim,
            cells: [cells[0], 1],
            lengths: [lengths[0], 1.0],
        };
        if dim == 2 {
            g.cells[1] = cells[1];
            g.lengths[1] = lengths[1];
        }
        Ok(g)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    pub fn nx(&self) -> usize {
        self.cells[0]
    }
    #[inline]
    pub fn ny(&self) -> usize {
        self.cells[1]
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    /// Spacing along `axis` (0 = x, 1 = y).
    #[inline]
    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.cells[axis] as f64
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        self.spacing(0)
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        self.spacing(1)
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.hx()
        } else {
            self.hx() * self.hy()
        }
    }

    /// |Ω|.
    pub fn measure(&self) -> f64 {
        self.lengths().iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells[0] + i
    }

    /// Cell centre of cell `(i, j)`; the y coordinate is 0 in 1D.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let x = (i as f64 + 0.5) * self.hx();
        let y = if self.dim == 2 {
            (j as f64 + 0.5) * self.hy()
        } else {
            0.0
        };
        (x, y)
    }

    /// Samples `f(x, y)` at every cell centre.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny() {
            for i in 0..self.nx() {
                let (x, y) = self.center(i, j);
                out.push(f(x, y));
            }
        }
        out
    }

    pub fn check(&self, field: &[f64]) -> Result<()> {
        if field.len() == self.len() {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.len(),
                actual: field.len(),
            })
        }
    }
}
