//! The `simulate` driver: integrate a configuration and write its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::diagnostics::DiagnosticsWriter;
use super::snapshot::{write_state, SnapshotFormat};
use crate::error::{Error, Result};
use crate::functionals::{mass, DiagnosticsRow};
use crate::model::{Grid, Params, SigmaSpec, State};
use crate::timestepper::{integrate, KineticLedger, Sink, StepReport};

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub final_t: f64,
    pub steps: u64,
    pub rejections: u64,
    pub rows: usize,
    pub snapshots: usize,
    pub mass_initial: [f64; 4],
    pub mass_final: [f64; 4],
    pub ledger: KineticLedger,
}

struct OutputSink {
    dir: PathBuf,
    writer: Option<DiagnosticsWriter>,
    grid: Grid,
    params: Params,
    sigma: SigmaSpec,
    interval: f64,
    stride: usize,
    format: SnapshotFormat,
    t_end: f64,
    rows: usize,
    snapshots: usize,
    steps: u64,
    rejections: u64,
}

impl Sink for OutputSink {
    fn interval(&self) -> Option<f64> {
        Some(self.interval)
    }

    fn observe(
        &mut self,
        state: &State,
        last: Option<&StepReport>,
        _: &KineticLedger,
    ) -> Result<()> {
        let dt = last.map_or(0.0, |r| r.dt);
        let row = DiagnosticsRow::compute(state, &self.params, self.sigma, &self.grid, dt)?;
        let index = self.rows;
        self.writer.as_mut().expect("writer open").write_row(&row)?;
        self.rows += 1;
        if index % self.stride == 0 || state.t >= self.t_end {
            write_state(&self.dir, index, state, &self.grid, self.format)?;
            self.snapshots += 1;
        }
        Ok(())
    }

    fn after_step(&mut self, report: &StepReport) {
        self.steps += 1;
        self.rejections += u64::from(report.rejections);
    }
}

fn masses(state: &State, grid: &Grid) -> Result<[f64; 4]> {
    Ok([
        mass(&state.u, grid)?,
        mass(&state.v, grid)?,
        mass(&state.w, grid)?,
        mass(&state.z, grid)?,
    ])
}

/// Runs `cfg` and writes `config.toml`, `diagnostics.csv`, snapshots and
/// `summary.json` into `out_dir`.
///
/// Snapshot `k` holds the state of diagnostics row `k`.
pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let config_path = out_dir.join("config.toml");
    fs::write(&config_path, cfg.render()).map_err(|e| Error::io(&config_path, e))?;

    let problem = cfg.problem()?;
    let grid = problem.grid;
    let state0 = cfg.init.build(&grid, &cfg.params)?;
    let step_cfg = cfg.time;
    let mass_initial = masses(&state0, &grid)?;

    let mut sink = OutputSink {
        dir: out_dir.to_path_buf(),
        writer: Some(DiagnosticsWriter::create(&out_dir.join("diagnostics.csv"))?),
        grid,
        params: cfg.params,
        sigma: cfg.regularization,
        interval: cfg.output.diagnostics_interval,
        stride: cfg.output.snapshot_stride,
        format: cfg.output.snapshot_format,
        t_end: step_cfg.t_end,
        rows: 0,
        snapshots: 0,
        steps: 0,
        rejections: 0,
    };
    let mut ledger = LedgerSink::default();
    let result = integrate(state0, &problem, &step_cfg, &mut [&mut sink, &mut ledger]);
    sink.writer.take().expect("writer open").finish()?;
    let state = result?;

    let summary = RunSummary {
        output_dir: out_dir.to_path_buf(),
        final_t: state.t,
        steps: sink.steps,
        rejections: sink.rejections,
        rows: sink.rows,
        snapshots: sink.snapshots,
        mass_initial,
        mass_final: masses(&state, &grid)?,
        ledger: ledger.totals,
    };
    let summary_path = out_dir.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&summary_path, json + "\n").map_err(|e| Error::io(&summary_path, e))?;
    Ok(summary)
}

/// Keeps the running kinetic ledger.
#[derive(Default)]
struct LedgerSink {
    totals: KineticLedger,
}

impl Sink for LedgerSink {
    fn interval(&self) -> Option<f64> {
        None
    }

    fn observe(&mut self, _: &State, _: Option<&StepReport>, totals: &KineticLedger) -> Result<()> {
        self.totals = *totals;
        Ok(())
    }
}
