//! Run configuration in TOML.
//!
//! ```toml
//! [domain]
//! dim = 2
//! cells = [64, 64]
//! lengths = [1.0, 1.0]
//!
//! [params]
//! preset = "unit"      # or list all seventeen constants
//! chi_u = 2.0          # optional overrides on top of the preset
//!
//! [kinetics]
//! variant = "identity" # or "log_sigmoidal" with beta_z
//!
//! [regularization]
//! variant = "mollified"
//! epsilon = 0.1
//!
//! [time]
//! t_end = 2.0
//! dt_init = 1e-4
//! dt_min = 1e-10
//! dt_max = 1e-2
//! cfl_safety = 0.5
//! mode = "imex"
//!
//! [init]
//! preset = "gaussian_infection"
//! amplitude = 2.0
//! width = 0.1
//!
//! [output]
//! diagnostics_interval = 0.02
//! snapshot_stride = 10
//! snapshot_format = "csv"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::init::InitPreset;
use super::snapshot::SnapshotFormat;
use crate::error::{Error, Result};
use crate::model::{Grid, Kinetics, Params, SigmaSpec};
use crate::timestepper::{Problem, StepConfig};

/// Environment variable naming the root of default output directories.
pub const OUTPUT_ROOT_ENV: &str = "GRANULOMA_OUTPUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl DomainConfig {
    pub fn grid(&self) -> Result<Grid> {
        if self.cells.len() != self.dim {
            return Err(Error::validation(
                "cells",
                format!("expected {} entries for dim = {}", self.dim, self.dim),
            ));
        }
        Grid::new(&self.cells, &self.lengths)
    }

    pub fn from_grid(grid: &Grid) -> Self {
        DomainConfig {
            dim: grid.dim(),
            cells: grid.cells().to_vec(),
            lengths: grid.lengths().to_vec(),
        }
    }
}

fn default_interval() -> f64 {
    0.1
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    /// Time between diagnostics rows.
    #[serde(default = "default_interval")]
    pub diagnostics_interval: f64,
    /// A snapshot is written at every `snapshot_stride`-th diagnostics time.
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_format")]
    pub snapshot_format: SnapshotFormat,
}

fn default_format() -> SnapshotFormat {
    SnapshotFormat::Csv
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: None,
            diagnostics_interval: default_interval(),
            snapshot_stride: default_stride(),
            snapshot_format: default_format(),
        }
    }
}

impl OutputConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.diagnostics_interval > 0.0 && self.diagnostics_interval.is_finite()) {
            return Err(Error::validation(
                "diagnostics_interval",
                "must be positive",
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::validation("snapshot_stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Configured directory, else `$GRANULOMA_OUTPUT_ROOT/{run_name}` (root defaults to `out`).
    pub fn resolve_directory(&self, run_name: &str) -> PathBuf {
        match &self.directory {
            Some(d) => d.clone(),
            None => {
                let root = std::env::var_os(OUTPUT_ROOT_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("out"));
                root.join(run_name)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub params: Params,
    pub kinetics: Kinetics,
    pub regularization: SigmaSpec,
    pub time: StepConfig,
    pub init: InitPreset,
    pub output: OutputConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: DomainConfig,
    params: toml::Table,
    #[serde(default)]
    kinetics: Kinetics,
    #[serde(default)]
    regularization: SigmaSpec,
    time: StepConfig,
    init: InitPreset,
    #[serde(default)]
    output: OutputConfig,
}

#[derive(Serialize)]
struct RenderConfig<'a> {
    domain: &'a DomainConfig,
    params: &'a Params,
    kinetics: &'a Kinetics,
    regularization: &'a SigmaSpec,
    time: &'a StepConfig,
    init: &'a InitPreset,
    output: &'a OutputConfig,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn params_from_table(table: &toml::Table) -> Result<Params> {
    let mut values: [Option<f64>; 17] = [None; 17];
    let mut preset = None;
    for (key, value) in table {
        if key == "preset" {
            match value.as_str() {
                Some("unit") => preset = Some(Params::unit()),
                Some(other) => {
                    return Err(Error::Unknown {
                        kind: "parameter preset",
                        name: other.to_string(),
                    })
                }
                None => return Err(Error::validation("preset", "must be a string")),
            }
            continue;
        }
        let idx = Params::NAMES
            .iter()
            .position(|n| n == key)
            .ok_or_else(|| Error::Unknown {
                kind: "parameter",
                name: key.clone(),
            })?;
        let x = match value {
            toml::Value::Float(f) => *f,
            toml::Value::Integer(i) => *i as f64,
            _ => return Err(Error::validation(key.clone(), "must be a number")),
        };
        values[idx] = Some(x);
    }
    let mut params = preset.unwrap_or_else(Params::unit);
    for (i, name) in Params::NAMES.iter().enumerate() {
        match values[i] {
            Some(x) => params.set(name, x)?,
            None if preset.is_some() => {}
            None => {
                return Err(Error::validation(
                    *name,
                    "missing; list all seventeen constants or set preset = \"unit\"",
                ))
            }
        }
    }
    params.validate()?;
    Ok(params)
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        self.domain.grid()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.params.validate()?;
        self.kinetics.validate()?;
        self.regularization.validate()?;
        self.time.validate()?;
        self.init.validate()?;
        self.output.validate()
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(
            self.grid()?,
            self.params,
            self.kinetics,
            self.regularization,
        )
    }

    /// TOML text listing every parameter explicitly.
    pub fn render(&self) -> String {
        let r = RenderConfig {
            domain: &self.domain,
            params: &self.params,
            kinetics: &self.kinetics,
            regularization: &self.regularization,
            time: &self.time,
            init: &self.init,
            output: &self.output,
        };
        toml::to_string(&r).expect("configuration types serialize to TOML")
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let cfg = RunConfig {
        domain: raw.domain,
        params: params_from_table(&raw.params)?,
        kinetics: raw.kinetics,
        regularization: raw.regularization,
        time: raw.time,
        init: raw.init,
        output: raw.output,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[domain]
dim = 2
cells = [16, 16]
lengths = [1.0, 1.0]

[params]
preset = "unit"

[time]
t_end = 1.0
dt_init = 1e-3
dt_min = 1e-9
dt_max = 1e-2
cfl_safety = 0.5

[init]
preset = "homogeneous"
c_u = 1.0
c_v = 1.0
c_w = 1.0
c_z = 1.0
"#;

    #[test]
    fn unit_preset_and_defaults() {
        let c = parse_config(BASE).unwrap();
        assert_eq!(c.params, Params::unit());
        assert_eq!(c.kinetics, Kinetics::Identity);
        assert_eq!(c.regularization, SigmaSpec::Identity);
        assert_eq!(c.output, OutputConfig::default());
        assert_eq!(c.grid().unwrap(), Grid::unit(2, 16).unwrap());
    }

    #[test]
    fn overrides_and_validation() {
        let text = BASE.replace("preset = \"unit\"", "preset = \"unit\"\nchi_u = 2");
        assert_eq!(parse_config(&text).unwrap().params.chi_u, 2.0);

        let text = BASE.replace("preset = \"unit\"", "preset = \"unit\"\ndelta_u = 0.0");
        match parse_config(&text) {
            Err(Error::Validation { name, .. }) => assert_eq!(name, "delta_u"),
            other => panic!("{other:?}"),
        }

        let text = BASE.replace("preset = \"unit\"", "d_u = 1.0");
        match parse_config(&text) {
            Err(Error::Validation { name, .. }) => assert_eq!(name, "d_v"),
            other => panic!("{other:?}"),
        }

        let text = format!("{BASE}\n[kinetics]\nvariant = \"log_sigmoidal\"\nbeta_z = 0.5\n");
        match parse_config(&text) {
            Err(Error::Validation { name, .. }) => assert_eq!(name, "beta_z"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let text = BASE.replace("cfl_safety = 0.5", "cfl_safety = 0.5\nbogus = 1");
        match parse_config(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 16),
            other => panic!("{other:?}"),
        }
        let text = BASE.replace("c_z = 1.0", "c_z = 1.0\nwidth = 3.0");
        assert!(matches!(parse_config(&text), Err(Error::Parse { .. })));
        let text = BASE.replace("preset = \"unit\"", "preset = \"unit\"\nkappa = 1.0");
        assert!(matches!(parse_config(&text), Err(Error::Unknown { .. })));
        assert!(matches!(
            parse_config("[domain\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn render_round_trips() {
        let mut c = parse_config(BASE).unwrap();
        c.params.chi_z = 0.1 + 0.2;
        c.regularization = SigmaSpec::Mollified { epsilon: 0.05 };
        c.kinetics = Kinetics::LogSigmoidal { beta_z: 3.0 };
        c.init = InitPreset::GaussianInfection {
            amplitude: 2.0,
            width: 0.1,
            c_u: None,
            c_z: Some(0.2),
        };
        c.output.directory = Some("runs/a".into());
        let text = c.render();
        for name in Params::NAMES {
            assert!(text.contains(&format!("{name} = ")), "{name}");
        }
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn output_directory_resolution() {
        let mut o = OutputConfig::default();
        o.directory = Some("here".into());
        assert_eq!(o.resolve_directory("x"), PathBuf::from("here"));
    }
}
