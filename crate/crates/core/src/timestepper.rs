//! IMEX time integration with a positivity-guarding step controller.
//!
//! One step of size `dt` in [`StepMode::Imex`] is the symmetric splitting
//!
//! ```text
//! E(dt/2) ∘ D(dt) ∘ E(dt/2)
//! ```
//!
//! where `E` advances upwind taxis plus kinetics with the two-stage SSP
//! Runge–Kutta (Heun) method and `D` is Crank–Nicolson diffusion applied axis
//! by axis with Neumann tridiagonal solves. A step that produces a negative
//! value anywhere is rejected and retried with half the step; values are never
//! clamped.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{
    laplacian_accumulate, max_face_velocity, mobility_into, taxis_accumulate,
};
use crate::error::{Error, Result};
use crate::model::{Grid, KineticTerms, Kinetics, Params, SigmaSpec, Species, State};
use crate::tridiag::NeumannFactor;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    #[default]
    Imex,
    FullyExplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub cfl_safety: f64,
    #[serde(default)]
    pub mode: StepMode,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            t_end: 1.0,
            dt_init: 1e-3,
            dt_min: 1e-10,
            dt_max: 1e-2,
            cfl_safety: 0.5,
            mode: StepMode::Imex,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0) {
            return Err(Error::validation("dt_min", "must be positive"));
        }
        if !(self.dt_min <= self.dt_init) {
            return Err(Error::validation("dt_init", "must be at least dt_min"));
        }
        if !(self.dt_init <= self.dt_max && self.dt_max.is_finite()) {
            return Err(Error::validation(
                "dt_max",
                "must be finite and at least dt_init",
            ));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::validation("cfl_safety", "must lie in (0, 1]"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::validation("t_end", "must be positive"));
        }
        Ok(())
    }

    /// A fixed-step configuration: every step has size `dt` unless positivity
    /// forces a rejection.
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        StepConfig {
            t_end,
            dt_init: dt,
            dt_min: dt * 1e-6,
            dt_max: dt,
            cfl_safety: 1.0,
            mode: StepMode::Imex,
        }
    }
}

/// Manufactured source terms appended to the equations.
pub trait Forcing: Send + Sync {
    /// Overwrites `out` with the source of every species at time `t`.
    fn source(&self, t: f64, grid: &Grid, out: &mut [Vec<f64>; 4]);
}

/// Everything that defines the right-hand side.
#[derive(Clone)]
pub struct Problem {
    pub grid: Grid,
    pub params: Params,
    pub kinetics: Kinetics,
    pub sigma: SigmaSpec,
    /// `false` switches the kinetic terms off (verification mode).
    pub reactions: bool,
    pub forcing: Option<Arc<dyn Forcing>>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("kinetics", &self.kinetics)
            .field("sigma", &self.sigma)
            .field("reactions", &self.reactions)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl Problem {
    pub fn new(grid: Grid, params: Params, kinetics: Kinetics, sigma: SigmaSpec) -> Result<Self> {
        params.validate()?;
        kinetics.validate()?;
        sigma.validate()?;
        Ok(Problem {
            grid,
            params,
            kinetics,
            sigma,
            reactions: true,
            forcing: None,
        })
    }

    pub fn without_reactions(mut self) -> Self {
        self.reactions = false;
        self
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }
}

/// Volume- and time-integrated kinetic terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KineticLedger {
    pub terms: KineticTerms,
    /// Integrated manufactured sources per species.
    pub forcing: [f64; 4],
}

impl KineticLedger {
    /// Net integrated production per species.
    pub fn species_totals(&self) -> [f64; 4] {
        let r = self.terms.rates();
        [
            r[0] + self.forcing[0],
            r[1] + self.forcing[1],
            r[2] + self.forcing[2],
            r[3] + self.forcing[3],
        ]
    }

    pub fn add(&mut self, other: &KineticLedger) {
        self.terms.add_scaled(&other.terms, 1.0);
        for (a, b) in self.forcing.iter_mut().zip(other.forcing) {
            *a += b;
        }
    }

    fn add_scaled(&mut self, terms: &KineticTerms, forcing: &[f64; 4], factor: f64) {
        self.terms.add_scaled(terms, factor);
        for (a, b) in self.forcing.iter_mut().zip(forcing) {
            *a += factor * b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    pub rejections: u32,
    pub min_values: [f64; 4],
    pub ledger: KineticLedger,
}

/// Outcome of [`stable_dt`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtProposal {
    pub dt: f64,
    /// The controller wanted less than `dt_min` and was held at the floor.
    pub floored: bool,
    pub advective: f64,
    pub kinetic: f64,
    pub diffusive: f64,
}

/// Step-size proposal.
///
/// `dt = min(cfl_safety · min(advective, kinetic[, diffusive]), dt_max)`, floored
/// at `dt_min`, with
///
/// * advective limit `1 / Σ_axes (2 · max χ|∇s| / h)` over both taxis terms,
/// * kinetic limit `min value / loss` over cells and species, where the loss is
///   the sum of the negative kinetic terms of that species,
/// * diffusive limit `h² / (2 · dim · D_max)` in fully explicit mode only.
pub fn stable_dt(state: &State, problem: &Problem, cfg: &StepConfig) -> DtProposal {
    let grid = &problem.grid;
    let p = &problem.params;
    let vu = max_face_velocity(&state.v, p.chi_u, grid);
    let vz = max_face_velocity(&state.w, p.chi_z, grid);
    let mut rate = 0.0;
    for axis in 0..grid.dim() {
        rate += 2.0 * vu[axis].max(vz[axis]) / grid.spacing(axis);
    }
    let advective = if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    };

    let mut kinetic = f64::INFINITY;
    if problem.reactions {
        for c in 0..grid.len() {
            let k = KineticTerms::at(
                [state.u[c], state.v[c], state.w[c], state.z[c]],
                p,
                problem.kinetics,
                problem.sigma,
            );
            let losses = [
                -(k.u_infection + k.u_death),
                -k.v_uptake,
                -(k.w_necrosis + k.w_death),
                -k.z_death,
            ];
            let values = [state.u[c], state.v[c], state.w[c], state.z[c]];
            for (value, loss) in values.into_iter().zip(losses) {
                if loss > 0.0 {
                    kinetic = kinetic.min(value / loss);
                }
            }
        }
    }

    let diffusive = match cfg.mode {
        StepMode::Imex => f64::INFINITY,
        StepMode::FullyExplicit => {
            let h = (0..grid.dim())
                .map(|a| grid.spacing(a))
                .fold(f64::INFINITY, f64::min);
            h * h / (2.0 * grid.dim() as f64 * p.max_diffusivity())
        }
    };

    let raw = (cfg.cfl_safety * advective.min(kinetic).min(diffusive)).min(cfg.dt_max);
    let floored = raw < cfg.dt_min;
    DtProposal {
        dt: raw.max(cfg.dt_min),
        floored,
        advective,
        kinetic,
        diffusive,
    }
}

struct Rejected {
    species: Species,
    cell: usize,
}

/// Reusable integrator with scratch buffers for one [`Problem`].
pub struct Stepper {
    problem: Problem,
    cfg: StepConfig,
    rates: [Vec<f64>; 4],
    stage: [Vec<f64>; 4],
    backup: [Vec<f64>; 4],
    sources: [Vec<f64>; 4],
    mobility: Vec<f64>,
    column: Vec<f64>,
    factors: Option<(f64, Vec<[NeumannFactor; 2]>)>,
}

fn fields_of(state: &State) -> [&[f64]; 4] {
    [&state.u, &state.v, &state.w, &state.z]
}

fn first_negative(fields: [&[f64]; 4]) -> Option<Rejected> {
    for sp in Species::ALL {
        if let Some(cell) = fields[sp.index()].iter().position(|x| !(*x >= 0.0)) {
            return Some(Rejected { species: sp, cell });
        }
    }
    None
}

impl Stepper {
    pub fn new(problem: Problem, cfg: StepConfig) -> Self {
        let n = problem.grid.len();
        let zeros = || [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let column = vec![0.0; problem.grid.ny()];
        Stepper {
            problem,
            cfg,
            rates: zeros(),
            stage: zeros(),
            backup: zeros(),
            sources: zeros(),
            mobility: vec![0.0; n],
            column,
            factors: None,
        }
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    /// Fills `self.rates` with the explicit operator at `fields`, time `t`, and
    /// returns the volume-integrated kinetic terms and sources.
    fn explicit_rates(
        &mut self,
        fields: [&[f64]; 4],
        t: f64,
        with_diffusion: bool,
    ) -> (KineticTerms, [f64; 4]) {
        let Problem {
            grid,
            params: p,
            kinetics,
            sigma,
            reactions,
            forcing,
        } = &self.problem;
        let n = grid.len();
        let vol = grid.cell_volume();
        for r in self.rates.iter_mut() {
            r.iter_mut().for_each(|x| *x = 0.0);
        }
        let mut integral = KineticTerms::default();
        if *reactions {
            let [ru, rv, rw, rz] = &mut self.rates;
            for c in 0..n {
                let k = KineticTerms::at(
                    [fields[0][c], fields[1][c], fields[2][c], fields[3][c]],
                    p,
                    *kinetics,
                    *sigma,
                );
                let r = k.rates();
                ru[c] = r[0];
                rv[c] = r[1];
                rw[c] = r[2];
                rz[c] = r[3];
                integral.add_scaled(&k, 1.0);
            }
            integral = scale_terms(integral, vol);
        }

        mobility_into(fields[0], *sigma, &mut self.mobility);
        taxis_accumulate(
            &self.mobility,
            fields[1],
            p.chi_u,
            grid,
            1.0,
            &mut self.rates[0],
        );
        mobility_into(fields[3], *sigma, &mut self.mobility);
        taxis_accumulate(
            &self.mobility,
            fields[2],
            p.chi_z,
            grid,
            1.0,
            &mut self.rates[3],
        );

        if with_diffusion {
            for (sp, d) in p.diffusivities().into_iter().enumerate() {
                laplacian_accumulate(fields[sp], grid, d, &mut self.rates[sp]);
            }
        }

        let mut sources = [0.0; 4];
        if let Some(f) = forcing {
            f.source(t, grid, &mut self.sources);
            for (s, (rate, src)) in self.rates.iter_mut().zip(&self.sources).enumerate() {
                for (r, x) in rate.iter_mut().zip(src) {
                    *r += x;
                }
                sources[s] = src.iter().sum::<f64>() * vol;
            }
        }
        (integral, sources)
    }

    /// Heun step of the explicit operator over `tau`, in place.
    fn explicit_substep(
        &mut self,
        state: &mut State,
        t: f64,
        tau: f64,
        with_diffusion: bool,
        ledger: &mut KineticLedger,
    ) -> std::result::Result<(), Rejected> {
        let (k1, s1) = self.explicit_rates(fields_of(state), t, with_diffusion);
        for sp in 0..4 {
            let c = state.field(Species::ALL[sp]);
            for ((out, &x), &r) in self.stage[sp].iter_mut().zip(c).zip(&self.rates[sp]) {
                *out = x + tau * r;
            }
        }
        if let Some(bad) = first_negative(std::array::from_fn(|s| self.stage[s].as_slice())) {
            return Err(bad);
        }
        let stage = std::mem::take(&mut self.stage);
        let (k2, s2) = self.explicit_rates(
            std::array::from_fn(|s| stage[s].as_slice()),
            t + tau,
            with_diffusion,
        );
        for sp in 0..4 {
            let c = state.field_mut(Species::ALL[sp]);
            for ((x, &y), &r) in c.iter_mut().zip(&stage[sp]).zip(&self.rates[sp]) {
                *x = 0.5 * *x + 0.5 * (y + tau * r);
            }
        }
        self.stage = stage;
        if let Some(bad) = first_negative(fields_of(state)) {
            return Err(bad);
        }
        ledger.add_scaled(&k1, &s1, 0.5 * tau);
        ledger.add_scaled(&k2, &s2, 0.5 * tau);
        Ok(())
    }

    fn diffusion_factors(&mut self, dt: f64) -> &[[NeumannFactor; 2]] {
        let stale = match &self.factors {
            Some((cached, _)) => *cached != dt,
            None => true,
        };
        if stale {
            let grid = self.problem.grid;
            let built = self
                .problem
                .params
                .diffusivities()
                .into_iter()
                .map(|d| {
                    let rx = 0.5 * dt * d / (grid.hx() * grid.hx());
                    let ry = 0.5 * dt * d / (grid.hy() * grid.hy());
                    [
                        NeumannFactor::new(grid.nx(), rx),
                        NeumannFactor::new(grid.ny(), ry),
                    ]
                })
                .collect();
            self.factors = Some((dt, built));
        }
        &self.factors.as_ref().unwrap().1
    }

    /// Crank–Nicolson diffusion over `dt`, one tridiagonal sweep per axis.
    fn diffusion_substep(
        &mut self,
        state: &mut State,
        dt: f64,
    ) -> std::result::Result<(), Rejected> {
        let grid = self.problem.grid;
        let (nx, ny) = (grid.nx(), grid.ny());
        let diffusivities = self.problem.params.diffusivities();
        self.diffusion_factors(dt);
        let factors = &self.factors.as_ref().unwrap().1;
        for sp in Species::ALL {
            let s = sp.index();
            let field = state.field_mut(sp);
            let work = &mut self.stage[s];

            // x sweep
            let rx = 0.5 * dt * diffusivities[s] / (grid.hx() * grid.hx());
            for j in 0..ny {
                let row = &field[j * nx..(j + 1) * nx];
                let out = &mut work[j * nx..(j + 1) * nx];
                explicit_half(row, rx, out);
                factors[s][0].solve_in_place(out);
            }
            if grid.dim() == 2 {
                let ry = 0.5 * dt * diffusivities[s] / (grid.hy() * grid.hy());
                let col = &mut self.column;
                let mut tmp = vec![0.0; ny];
                for i in 0..nx {
                    for j in 0..ny {
                        col[j] = work[j * nx + i];
                    }
                    explicit_half(col, ry, &mut tmp);
                    factors[s][1].solve_in_place(&mut tmp);
                    for j in 0..ny {
                        field[j * nx + i] = tmp[j];
                    }
                }
            } else {
                field.copy_from_slice(work);
            }
            if let Some(cell) = field.iter().position(|x| !(*x >= 0.0)) {
                return Err(Rejected { species: sp, cell });
            }
        }
        Ok(())
    }

    fn attempt(
        &mut self,
        state: &mut State,
        dt: f64,
    ) -> std::result::Result<KineticLedger, Rejected> {
        let mut ledger = KineticLedger::default();
        let t = state.t;
        match self.cfg.mode {
            StepMode::Imex => {
                let tau = 0.5 * dt;
                self.explicit_substep(state, t, tau, false, &mut ledger)?;
                self.diffusion_substep(state, dt)?;
                self.explicit_substep(state, t + tau, tau, false, &mut ledger)?;
            }
            StepMode::FullyExplicit => {
                self.explicit_substep(state, t, dt, true, &mut ledger)?;
            }
        }
        Ok(ledger)
    }

    /// Advances `state` by at most `dt`, halving on positivity failure.
    pub fn step(&mut self, state: &mut State, dt: f64) -> Result<StepReport> {
        for sp in Species::ALL {
            self.backup[sp.index()].copy_from_slice(state.field(sp));
        }
        let t0 = state.t;
        let floor = self.cfg.dt_min.min(dt);
        let mut dt = dt;
        let mut rejections = 0;
        loop {
            match self.attempt(state, dt) {
                Ok(ledger) => {
                    state.t = t0 + dt;
                    let min_values = Species::ALL.map(|sp| {
                        state
                            .field(sp)
                            .iter()
                            .copied()
                            .fold(f64::INFINITY, f64::min)
                    });
                    return Ok(StepReport {
                        dt,
                        rejections,
                        min_values,
                        ledger,
                    });
                }
                Err(bad) => {
                    for sp in Species::ALL {
                        state
                            .field_mut(sp)
                            .copy_from_slice(&self.backup[sp.index()]);
                    }
                    state.t = t0;
                    rejections += 1;
                    dt *= 0.5;
                    if dt < floor {
                        return Err(Error::PositivityFailure {
                            species: bad.species,
                            cell: bad.cell,
                            dt: 2.0 * dt,
                        });
                    }
                }
            }
        }
    }
}

fn scale_terms(mut k: KineticTerms, factor: f64) -> KineticTerms {
    let zero = KineticTerms::default();
    let copy = k;
    k = zero;
    k.add_scaled(&copy, factor);
    k
}

/// `out = (I + r Δ₁) row` with mirror ghosts.
#[inline]
fn explicit_half(row: &[f64], r: f64, out: &mut [f64]) {
    let n = row.len();
    out[0] = row[0] + r * (row[1] - row[0]);
    for i in 1..n - 1 {
        out[i] = row[i] + r * (row[i - 1] - 2.0 * row[i] + row[i + 1]);
    }
    out[n - 1] = row[n - 1] + r * (row[n - 2] - row[n - 1]);
}

/// One step of size `dt` from `state`.
pub fn step(
    state: &State,
    problem: &Problem,
    cfg: &StepConfig,
    dt: f64,
) -> Result<(State, StepReport)> {
    state.validate(&problem.grid)?;
    let mut stepper = Stepper::new(problem.clone(), *cfg);
    let mut next = state.clone();
    let report = stepper.step(&mut next, dt)?;
    Ok((next, report))
}

/// Receives the state at regular output times.
pub trait Sink {
    /// Time between observations; `None` observes only the initial and final states.
    fn interval(&self) -> Option<f64>;

    /// Called with the current state, the last accepted step (absent at the
    /// initial time), and the kinetic ledger accumulated since the start.
    fn observe(
        &mut self,
        state: &State,
        last: Option<&StepReport>,
        totals: &KineticLedger,
    ) -> Result<()>;

    /// Called after every accepted step.
    fn after_step(&mut self, _report: &StepReport) {}
}

/// Sink that records nothing.
pub struct NullSink;

impl Sink for NullSink {
    fn interval(&self) -> Option<f64> {
        None
    }
    fn observe(&mut self, _: &State, _: Option<&StepReport>, _: &KineticLedger) -> Result<()> {
        Ok(())
    }
}

/// Runs from `state0.t` to `cfg.t_end`, calling every sink at its cadence.
///
/// Steps are clipped so that every output time is hit exactly; between two
/// output times the remaining interval is split into equal steps no larger
/// than the current proposal. The run is deterministic for fixed inputs.
pub fn integrate(
    state0: State,
    problem: &Problem,
    cfg: &StepConfig,
    sinks: &mut [&mut dyn Sink],
) -> Result<State> {
    state0.validate(&problem.grid)?;
    let t0 = state0.t;
    let t_end = cfg.t_end;
    let mut state = state0;
    let mut totals = KineticLedger::default();
    let mut counters = vec![0u64; sinks.len()];
    for s in sinks.iter_mut() {
        s.observe(&state, None, &totals)?;
    }
    if !(t_end > t0) {
        return Ok(state);
    }

    let next_time = |interval: Option<f64>, k: u64| -> f64 {
        match interval {
            Some(dt) if dt > 0.0 => (t0 + (k + 1) as f64 * dt).min(t_end),
            _ => t_end,
        }
    };

    let mut stepper = Stepper::new(problem.clone(), *cfg);
    let mut first = true;
    let wrap = |t: f64, e: Error| Error::Integration {
        last_good_t: t,
        source: Box::new(e),
    };

    while state.t < t_end {
        let stop = sinks
            .iter()
            .zip(&counters)
            .map(|(s, &k)| next_time(s.interval(), k))
            .fold(t_end, f64::min);
        let proposal = stable_dt(&state, problem, cfg);
        let mut target = proposal.dt;
        if first {
            target = target.min(cfg.dt_init);
            first = false;
        }
        let remaining = stop - state.t;
        let pieces = (remaining / target * (1.0 - 1e-12)).ceil().max(1.0);
        let dt = remaining / pieces;
        let t_before = state.t;
        let report = stepper
            .step(&mut state, dt)
            .map_err(|e| wrap(t_before, e))?;
        if report.rejections == 0 && pieces == 1.0 {
            state.t = stop;
        }
        totals.add(&report.ledger);
        for s in sinks.iter_mut() {
            s.after_step(&report);
        }

        for (s, k) in sinks.iter_mut().zip(counters.iter_mut()) {
            let due = next_time(s.interval(), *k);
            if state.t >= due {
                s.observe(&state, Some(&report), &totals)
                    .map_err(|e| wrap(state.t, e))?;
                *k += 1;
            }
        }
    }
    Ok(state)
}
