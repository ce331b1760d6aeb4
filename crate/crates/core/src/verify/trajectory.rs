//! In-memory recording of a run for the suites.

use crate::error::Result;
use crate::functionals::{mass, trapezoid, DiagnosticsRow, SpaceTimeIntegrands};
use crate::model::{Grid, Params, SigmaSpec, State};
use crate::timestepper::{integrate, KineticLedger, Problem, Sink, StepConfig, StepReport};

#[derive(Debug, Clone, Default)]
pub struct RecordOptions {
    /// Time between recorded samples.
    pub interval: f64,
    /// Keep a copy of the state at every sample.
    pub keep_states: bool,
    /// Evaluate the space-time integrands at these exponent shifts η.
    pub etas: Vec<f64>,
    /// Skip the diagnostics rows (masses are still recorded).
    pub skip_rows: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub rows: Vec<DiagnosticsRow>,
    pub masses: Vec<[f64; 4]>,
    pub states: Vec<State>,
    /// `integrands[k][e]` at sample `k` and exponent shift `etas[e]`.
    pub integrands: Vec<Vec<SpaceTimeIntegrands>>,
    pub ledger: KineticLedger,
    pub final_state: State,
    pub steps: u64,
    pub rejections: u64,
}

impl Trajectory {
    /// Trapezoid-in-time integral of a per-sample quantity.
    pub fn time_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        let y: Vec<f64> = (0..self.times.len()).map(f).collect();
        trapezoid(&self.times, &y)
    }

    /// Time-accumulated dissipation entries.
    pub fn accumulated_dissipation(&self) -> [f64; 8] {
        std::array::from_fn(|e| self.time_integral(|k| self.rows[k].dissipation.values()[e]))
    }
}

struct Recorder<'a> {
    opts: &'a RecordOptions,
    grid: Grid,
    params: Params,
    sigma: SigmaSpec,
    traj_times: Vec<f64>,
    rows: Vec<DiagnosticsRow>,
    masses: Vec<[f64; 4]>,
    states: Vec<State>,
    integrands: Vec<Vec<SpaceTimeIntegrands>>,
    ledger: KineticLedger,
    steps: u64,
    rejections: u64,
}

impl Sink for Recorder<'_> {
    fn interval(&self) -> Option<f64> {
        Some(self.opts.interval)
    }

    fn observe(
        &mut self,
        state: &State,
        last: Option<&StepReport>,
        totals: &KineticLedger,
    ) -> Result<()> {
        self.traj_times.push(state.t);
        let g = &self.grid;
        self.masses.push([
            mass(&state.u, g)?,
            mass(&state.v, g)?,
            mass(&state.w, g)?,
            mass(&state.z, g)?,
        ]);
        if !self.opts.skip_rows {
            let dt = last.map_or(0.0, |r| r.dt);
            self.rows.push(DiagnosticsRow::compute(
                state,
                &self.params,
                self.sigma,
                g,
                dt,
            )?);
        }
        if self.opts.keep_states {
            self.states.push(state.clone());
        }
        if !self.opts.etas.is_empty() {
            let per_eta = self
                .opts
                .etas
                .iter()
                .map(|&eta| SpaceTimeIntegrands::compute(state, g, eta))
                .collect::<Result<Vec<_>>>()?;
            self.integrands.push(per_eta);
        }
        self.ledger = *totals;
        Ok(())
    }

    fn after_step(&mut self, report: &StepReport) {
        self.steps += 1;
        self.rejections += u64::from(report.rejections);
    }
}

pub fn run_trajectory(
    problem: &Problem,
    state0: State,
    cfg: &StepConfig,
    opts: &RecordOptions,
) -> Result<Trajectory> {
    let mut rec = Recorder {
        opts,
        grid: problem.grid,
        params: problem.params,
        sigma: problem.sigma,
        traj_times: Vec::new(),
        rows: Vec::new(),
        masses: Vec::new(),
        states: Vec::new(),
        integrands: Vec::new(),
        ledger: KineticLedger::default(),
        steps: 0,
        rejections: 0,
    };
    let final_state = integrate(state0, problem, cfg, &mut [&mut rec])?;
    Ok(Trajectory {
        grid: problem.grid,
        times: rec.traj_times,
        rows: rec.rows,
        masses: rec.masses,
        states: rec.states,
        integrands: rec.integrands,
        ledger: rec.ledger,
        final_state,
        steps: rec.steps,
        rejections: rec.rejections,
    })
}
