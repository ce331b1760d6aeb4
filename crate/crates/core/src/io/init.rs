//! Initial-condition presets. All are nonnegative and Neumann-compatible.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::snapshot::{read_state, snapshot_path, SnapshotFormat};
use crate::error::{Error, Result};
use crate::model::{Grid, Params, Species, State};

/// Default lymphocyte level of `gaussian_infection`.
pub const DEFAULT_Z_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitPreset {
    Homogeneous {
        c_u: f64,
        c_v: f64,
        c_w: f64,
        c_z: f64,
    },
    /// `(β_u/δ_u, 0, 0, 0)`.
    DiseaseFree,
    /// Homogeneous `u` and `z`, a centred Gaussian `amplitude · exp(−r²/(2 width²))`
    /// in `v` and `w`.
    GaussianInfection {
        amplitude: f64,
        width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_u: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_z: Option<f64>,
    },
    /// `1 + amplitude · Π cos(π x_i / L_i)` in every species.
    CosineMms { amplitude: f64 },
    /// `background + peak · exp(−|x − center|²/(2 width²))` per species.
    GaussianBumps {
        background: [f64; 4],
        peak: [f64; 4],
        width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// The four snapshot files `{field}_{index:06}` in `directory`.
    Snapshot {
        directory: PathBuf,
        index: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        format: Option<SnapshotFormat>,
    },
}

fn nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            name,
            format!("must be finite and nonnegative, got {x}"),
        ))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            name,
            format!("must be finite and positive, got {x}"),
        ))
    }
}

fn gaussian(grid: &Grid, center: (f64, f64), width: f64) -> Vec<f64> {
    let two_w2 = 2.0 * width * width;
    let dim2 = grid.dim() == 2;
    grid.sample(|x, y| {
        let dx = x - center.0;
        let dy = if dim2 { y - center.1 } else { 0.0 };
        (-(dx * dx + dy * dy) / two_w2).exp()
    })
}

fn domain_center(grid: &Grid) -> (f64, f64) {
    let l = grid.lengths();
    (0.5 * l[0], if grid.dim() == 2 { 0.5 * l[1] } else { 0.0 })
}

impl InitPreset {
    pub fn name(&self) -> &'static str {
        match self {
            InitPreset::Homogeneous { .. } => "homogeneous",
            InitPreset::DiseaseFree => "disease_free",
            InitPreset::GaussianInfection { .. } => "gaussian_infection",
            InitPreset::CosineMms { .. } => "cosine_mms",
            InitPreset::GaussianBumps { .. } => "gaussian_bumps",
            InitPreset::Snapshot { .. } => "snapshot",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitPreset::Homogeneous { c_u, c_v, c_w, c_z } => {
                for (n, x) in [("c_u", c_u), ("c_v", c_v), ("c_w", c_w), ("c_z", c_z)] {
                    nonneg(n, *x)?;
                }
            }
            InitPreset::DiseaseFree | InitPreset::Snapshot { .. } => {}
            InitPreset::GaussianInfection {
                amplitude,
                width,
                c_u,
                c_z,
            } => {
                nonneg("amplitude", *amplitude)?;
                positive("width", *width)?;
                if let Some(c) = c_u {
                    nonneg("c_u", *c)?;
                }
                if let Some(c) = c_z {
                    nonneg("c_z", *c)?;
                }
            }
            InitPreset::CosineMms { amplitude } => {
                if !(*amplitude >= 0.0 && *amplitude < 1.0) {
                    return Err(Error::validation(
                        "amplitude",
                        "cosine_mms needs amplitude in [0, 1)",
                    ));
                }
            }
            InitPreset::GaussianBumps {
                background,
                peak,
                width,
                center,
            } => {
                for (b, p) in background.iter().zip(peak) {
                    nonneg("background", *b)?;
                    nonneg("peak", *p)?;
                }
                positive("width", *width)?;
                if let Some(c) = center {
                    if c.iter().any(|x| !x.is_finite()) {
                        return Err(Error::validation("center", "must be finite"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the initial state on `grid` at `t = 0` (or the stored time of a snapshot).
    pub fn build(&self, grid: &Grid, params: &Params) -> Result<State> {
        self.validate()?;
        let n = grid.len();
        match self {
            InitPreset::Homogeneous { c_u, c_v, c_w, c_z } => {
                State::homogeneous(grid, [*c_u, *c_v, *c_w, *c_z])
            }
            InitPreset::DiseaseFree => {
                State::homogeneous(grid, [params.beta_u / params.delta_u, 0.0, 0.0, 0.0])
            }
            InitPreset::GaussianInfection {
                amplitude,
                width,
                c_u,
                c_z,
            } => {
                let bump: Vec<f64> = gaussian(grid, domain_center(grid), *width)
                    .into_iter()
                    .map(|g| amplitude * g)
                    .collect();
                let u = c_u.unwrap_or(params.beta_u / params.delta_u);
                let z = c_z.unwrap_or(DEFAULT_Z_LEVEL);
                State::from_fields(grid, 0.0, [vec![u; n], bump.clone(), bump, vec![z; n]])
            }
            InitPreset::CosineMms { amplitude } => {
                let l = grid.lengths().to_vec();
                let dim2 = grid.dim() == 2;
                let f = grid.sample(|x, y| {
                    let mut c = (PI * x / l[0]).cos();
                    if dim2 {
                        c *= (PI * y / l[1]).cos();
                    }
                    1.0 + amplitude * c
                });
                State::from_fields(grid, 0.0, [f.clone(), f.clone(), f.clone(), f])
            }
            InitPreset::GaussianBumps {
                background,
                peak,
                width,
                center,
            } => {
                let c = match center {
                    Some(c) if c.len() == grid.dim() => (c[0], c.get(1).copied().unwrap_or(0.0)),
                    Some(c) => {
                        return Err(Error::validation(
                            "center",
                            format!("expected {} coordinates, got {}", grid.dim(), c.len()),
                        ))
                    }
                    None => domain_center(grid),
                };
                let g = gaussian(grid, c, *width);
                let fields = std::array::from_fn(|s| {
                    g.iter().map(|x| background[s] + peak[s] * x).collect()
                });
                State::from_fields(grid, 0.0, fields)
            }
            InitPreset::Snapshot {
                directory,
                index,
                format,
            } => {
                let format = match format {
                    Some(f) => *f,
                    None if snapshot_path(directory, "u", *index, SnapshotFormat::Raw).exists() => {
                        SnapshotFormat::Raw
                    }
                    None => SnapshotFormat::Csv,
                };
                let paths =
                    Species::ALL.map(|sp| snapshot_path(directory, sp.name(), *index, format));
                let (state, g) = read_state(&paths)?;
                if g != *grid {
                    return Err(Error::Snapshot {
                        path: paths[0].clone(),
                        reason: "snapshot grid differs from the configured domain".into(),
                    });
                }
                Ok(state)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_presets() {
        let g = Grid::unit(2, 8).unwrap();
        let p = Params::unit();
        let s = InitPreset::DiseaseFree.build(&g, &p).unwrap();
        assert!(s.u.iter().all(|&x| x == 1.0));
        assert!(s.v.iter().chain(&s.w).chain(&s.z).all(|&x| x == 0.0));

        let h = InitPreset::Homogeneous {
            c_u: 1.0,
            c_v: 1.0,
            c_w: 1.0,
            c_z: 1.0,
        };
        assert_eq!(
            h.build(&g, &p).unwrap(),
            State::homogeneous(&g, [1.0; 4]).unwrap()
        );
    }

    #[test]
    fn gaussian_infection_peaks_at_the_centre() {
        let g = Grid::unit(2, 65).unwrap();
        let preset = InitPreset::GaussianInfection {
            amplitude: 2.0,
            width: 0.1,
            c_u: None,
            c_z: None,
        };
        let s = preset.build(&g, &Params::unit()).unwrap();
        let max = s.w.iter().cloned().fold(0.0, f64::max);
        // odd cell count puts a cell centre exactly at (1/2, 1/2)
        assert_eq!(max, 2.0);
        assert_eq!(s.w[g.index(32, 32)], 2.0);

        let g = Grid::unit(2, 64).unwrap();
        let s = preset.build(&g, &Params::unit()).unwrap();
        let max = s.w.iter().cloned().fold(0.0, f64::max);
        let h = g.hx();
        let expected = 2.0 * (-(2.0 * (0.5 * h).powi(2)) / 0.02f64).exp();
        assert!((max - expected).abs() < 1e-15);
        assert!(s.z.iter().all(|&z| z == DEFAULT_Z_LEVEL));
    }

    #[test]
    fn cosine_preset_is_positive_and_symmetric() {
        let g = Grid::unit(1, 16).unwrap();
        let s = InitPreset::CosineMms { amplitude: 0.5 }
            .build(&g, &Params::unit())
            .unwrap();
        for i in 0..16 {
            assert!((s.u[i] - 1.0 + (s.u[15 - i] - 1.0)).abs() < 1e-14);
        }
        assert!(InitPreset::CosineMms { amplitude: 1.5 }
            .build(&g, &Params::unit())
            .is_err());
    }
}
