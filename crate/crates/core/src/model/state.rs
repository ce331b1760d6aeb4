use std::fmt;

use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};

/// The four model species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    /// Healthy macrophages.
    U,
    /// Extracellular bacteria.
    V,
    /// Infected macrophages.
    W,
    /// Lymphocytes.
    Z,
}

impl Species {
    pub const ALL: [Species; 4] = [Species::U, Species::V, Species::W, Species::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::U => "u",
            Species::V => "v",
            Species::W => "w",
            Species::Z => "z",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "u" => Ok(Species::U),
            "v" => Ok(Species::V),
            "w" => Ok(Species::W),
            "z" => Ok(Species::Z),
            _ => Err(Error::Unknown {
                kind: "species",
                name: name.to_string(),
            }),
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cell averages of the four species at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.len();
        State {
            t: 0.0,
            u: vec![0.0; n],
            v: vec![0.0; n],
            w: vec![0.0; n],
            z: vec![0.0; n],
        }
    }

    /// Builds a state after checking shapes and nonnegativity.
    pub fn from_fields(grid: &Grid, t: f64, fields: [Vec<f64>; 4]) -> Result<Self> {
        let [u, v, w, z] = fields;
        let s = State { t, u, v, w, z };
        s.validate(grid)?;
        Ok(s)
    }

    pub fn homogeneous(grid: &Grid, values: [f64; 4]) -> Result<Self> {
        let n = grid.len();
        Self::from_fields(grid, 0.0, values.map(|c| vec![c; n]))
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for sp in Species::ALL {
            let f = self.field(sp);
            grid.check(f)?;
            if let Some((cell, &value)) = f
                .iter()
                .enumerate()
                .find(|(_, x)| !(**x >= 0.0 && x.is_finite()))
            {
                return Err(Error::NotPositive {
                    field: sp.name().to_string(),
                    cell,
                    value,
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn field(&self, sp: Species) -> &[f64] {
        match sp {
            Species::U => &self.u,
            Species::V => &self.v,
            Species::W => &self.w,
            Species::Z => &self.z,
        }
    }

    #[inline]
    pub fn field_mut(&mut self, sp: Species) -> &mut Vec<f64> {
        match sp {
            Species::U => &mut self.u,
            Species::V => &mut self.v,
            Species::W => &mut self.w,
            Species::Z => &mut self.z,
        }
    }

    pub fn fields(&self) -> [&[f64]; 4] {
        [&self.u, &self.v, &self.w, &self.z]
    }

    /// Smallest entry over all four fields, with its species and cell.
    pub fn min_entry(&self) -> (Species, usize, f64) {
        let mut best = (Species::U, 0, f64::INFINITY);
        for sp in Species::ALL {
            for (i, &x) in self.field(sp).iter().enumerate() {
                if x < best.2 || x.is_nan() {
                    best = (sp, i, x);
                }
            }
        }
        best
    }
}
