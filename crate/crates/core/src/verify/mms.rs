//! Manufactured solutions.
//!
//! Every species is `φ_s = a_s + b_s e^{−λt} c(x)` with
//! `c = Π cos(π x_i / L_i)`, which satisfies the Neumann condition. Spatial
//! orders use the analytic source of the PDE; the temporal order uses the
//! source of the semi-discrete system, so that the cell samples of `φ` solve
//! the method-of-lines ODE exactly and only time-stepping error remains.

use std::f64::consts::PI;
use std::sync::Arc;

use super::thresholds::{MMS_DIFFUSION_ORDER, MMS_TAXIS_ORDER, MMS_TEMPORAL_ORDER};
use super::VerificationReport;
use crate::discretization::{laplacian_accumulate, mobility_into, taxis_accumulate};
use crate::error::Result;
use crate::model::{Grid, KineticTerms, Kinetics, Params, SigmaSpec, State};
use crate::timestepper::{integrate, Forcing, Problem, StepConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub a: [f64; 4],
    pub b: [f64; 4],
    /// Decay rate λ.
    pub decay: f64,
}

impl Manufactured {
    pub fn zero() -> Self {
        Manufactured {
            a: [0.0; 4],
            b: [0.0; 4],
            decay: 1.0,
        }
    }

    /// `(c, |∇c|², k²)` where `Δc = −k² c`.
    fn shape(grid: &Grid, x: f64, y: f64) -> (f64, f64, f64) {
        let l = grid.lengths();
        let kx = PI / l[0];
        let (cx, sx) = ((kx * x).cos(), (kx * x).sin());
        if grid.dim() == 1 {
            return (cx, kx * kx * sx * sx, kx * kx);
        }
        let ky = PI / l[1];
        let (cy, sy) = ((ky * y).cos(), (ky * y).sin());
        (
            cx * cy,
            kx * kx * sx * sx * cy * cy + ky * ky * cx * cx * sy * sy,
            kx * kx + ky * ky,
        )
    }

    pub fn state(&self, grid: &Grid, t: f64) -> Result<State> {
        let g = (-self.decay * t).exp();
        let fields = std::array::from_fn(|s| {
            grid.sample(|x, y| self.a[s] + self.b[s] * g * Self::shape(grid, x, y).0)
        });
        State::from_fields(grid, t, fields)
    }
}

/// Pointwise source of the continuous problem with σ = id.
pub struct AnalyticForcing {
    pub m: Manufactured,
    pub params: Params,
    pub kinetics: Kinetics,
}

impl Forcing for AnalyticForcing {
    fn source(&self, t: f64, grid: &Grid, out: &mut [Vec<f64>; 4]) {
        let p = &self.params;
        let Manufactured { a, b, decay } = self.m;
        let g = (-decay * t).exp();
        let d = p.diffusivities();
        let mut c = 0;
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x, y) = grid.center(i, j);
                let (shape, grad_sq, k2) = Manufactured::shape(grid, x, y);
                let phi: [f64; 4] = std::array::from_fn(|s| a[s] + b[s] * g * shape);
                let kin = KineticTerms::at(phi, p, self.kinetics, SigmaSpec::Identity).rates();
                // ∇·(c ∇s) = ∇c·∇s + c Δs
                let div = |carrier: usize, signal: usize| {
                    b[carrier] * b[signal] * g * g * grad_sq
                        - phi[carrier] * k2 * b[signal] * g * shape
                };
                let taxis = [p.chi_u * div(0, 1), 0.0, 0.0, p.chi_z * div(3, 2)];
                for s in 0..4 {
                    let dt_phi = -decay * b[s] * g * shape;
                    let lap = -k2 * b[s] * g * shape;
                    out[s][c] = dt_phi - d[s] * lap + taxis[s] - kin[s];
                }
                c += 1;
            }
        }
    }
}

/// Source that makes the cell samples of the manufactured solution an exact
/// solution of the semi-discrete scheme.
pub struct DiscreteForcing {
    pub m: Manufactured,
    pub params: Params,
    pub kinetics: Kinetics,
    pub sigma: SigmaSpec,
}

impl Forcing for DiscreteForcing {
    fn source(&self, t: f64, grid: &Grid, out: &mut [Vec<f64>; 4]) {
        let p = &self.params;
        let state = self
            .m
            .state(grid, t)
            .expect("manufactured data is nonnegative");
        let fields = state.fields();
        let g = (-self.m.decay * t).exp();
        let n = grid.len();
        let shape = grid.sample(|x, y| Manufactured::shape(grid, x, y).0);
        let mut op = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (s, d) in p.diffusivities().into_iter().enumerate() {
            laplacian_accumulate(fields[s], grid, d, &mut op[s]);
        }
        let mut mobility = vec![0.0; n];
        mobility_into(fields[0], self.sigma, &mut mobility);
        taxis_accumulate(&mobility, fields[1], p.chi_u, grid, 1.0, &mut op[0]);
        mobility_into(fields[3], self.sigma, &mut mobility);
        taxis_accumulate(&mobility, fields[2], p.chi_z, grid, 1.0, &mut op[3]);
        for c in 0..n {
            let phi = [fields[0][c], fields[1][c], fields[2][c], fields[3][c]];
            let kin = KineticTerms::at(phi, p, self.kinetics, self.sigma).rates();
            for s in 0..4 {
                let dt_phi = -self.m.decay * self.m.b[s] * g * shape[c];
                out[s][c] = dt_phi - op[s][c] - kin[s];
            }
        }
    }
}

/// Least-squares slope of `log err` against `log step`.
pub fn observed_order(steps: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone)]
pub struct MmsOptions {
    /// Cells per axis for the spatial studies, coarse to fine.
    pub grids: Vec<usize>,
    pub dim: usize,
    pub t_end: f64,
    /// Largest step of the spatial studies.
    pub spatial_dt: f64,
    /// Steps of the temporal study, coarse to fine.
    pub dts: Vec<f64>,
    pub temporal_cells: usize,
}

impl Default for MmsOptions {
    fn default() -> Self {
        MmsOptions {
            grids: vec![32, 64, 128],
            dim: 1,
            t_end: 0.5,
            spatial_dt: 2e-4,
            dts: vec![0.02, 0.01, 0.005],
            temporal_cells: 16,
        }
    }
}

/// Discrete L² error over all four species at the final time.
fn run_error(problem: &Problem, m: &Manufactured, cfg: &StepConfig) -> Result<f64> {
    let grid = problem.grid;
    let state0 = m.state(&grid, 0.0)?;
    let end = integrate(state0, problem, cfg, &mut [])?;
    let exact = m.state(&grid, cfg.t_end)?;
    let mut sum = 0.0;
    for (a, b) in end.fields().iter().zip(exact.fields()) {
        sum += a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    }
    Ok((sum * grid.cell_volume()).sqrt())
}

fn spatial_study(
    report: &mut VerificationReport,
    label: &str,
    opts: &MmsOptions,
    params: Params,
    m: Manufactured,
    target: f64,
) {
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for &n in &opts.grids {
        let result = Grid::unit(opts.dim, n).and_then(|grid| {
            let forcing = Arc::new(AnalyticForcing {
                m,
                params,
                kinetics: Kinetics::Identity,
            });
            let problem = Problem::new(grid, params, Kinetics::Identity, SigmaSpec::Identity)?
                .with_forcing(forcing);
            let cfg = StepConfig {
                t_end: opts.t_end,
                dt_init: opts.spatial_dt,
                dt_min: 1e-12,
                dt_max: opts.spatial_dt,
                cfl_safety: 0.5,
                mode: Default::default(),
            };
            run_error(&problem, &m, &cfg)
        });
        match result {
            Ok(e) => {
                report.record(format!("{label} L2 error [n={n}]"), e);
                hs.push(1.0 / n as f64);
                errs.push(e);
            }
            Err(e) => {
                report.fail(format!("{label} run [n={n}]"), e.to_string());
                return;
            }
        }
    }
    let order = observed_order(&hs, &errs);
    report.check_ge(
        format!("{label} observed order"),
        order,
        target,
        format!("{}d grids {:?}", opts.dim, opts.grids),
    );
}

pub fn mms_suite(opts: &MmsOptions) -> VerificationReport {
    let mut report = VerificationReport::new("mms");

    // zero solution: sources cancel the production term exactly
    for &n in &opts.grids {
        let result = Grid::unit(opts.dim, n).and_then(|grid| {
            let m = Manufactured::zero();
            let params = Params::unit();
            let problem = Problem::new(grid, params, Kinetics::Identity, SigmaSpec::Identity)?
                .with_forcing(Arc::new(AnalyticForcing {
                    m,
                    params,
                    kinetics: Kinetics::Identity,
                }));
            run_error(
                &problem,
                &m,
                &StepConfig::fixed(opts.t_end / 10.0, opts.t_end),
            )
        });
        match result {
            Ok(e) => report.check_le(format!("zero solution error [n={n}]"), e, 0.0, ""),
            Err(e) => report.fail(format!("zero solution [n={n}]"), e.to_string()),
        }
    }

    let smooth = Manufactured {
        a: [1.0, 1.5, 1.0, 1.2],
        b: [0.3, 0.4, 0.2, 0.3],
        decay: 1.0,
    };
    let diffusive = Params {
        chi_u: 1e-3,
        chi_z: 1e-3,
        ..Params::unit()
    };
    spatial_study(
        &mut report,
        "diffusion-dominated",
        opts,
        diffusive,
        smooth,
        MMS_DIFFUSION_ORDER,
    );

    let taxis = Params {
        d_u: 0.01,
        d_v: 0.01,
        d_w: 0.01,
        d_z: 0.01,
        chi_u: 5.0,
        chi_z: 5.0,
        ..Params::unit()
    };
    spatial_study(
        &mut report,
        "taxis-dominated",
        opts,
        taxis,
        smooth,
        MMS_TAXIS_ORDER,
    );

    // temporal
    let params = Params::unit();
    let mut errs = Vec::new();
    for &dt in &opts.dts {
        let result = Grid::unit(1, opts.temporal_cells).and_then(|grid| {
            let forcing = Arc::new(DiscreteForcing {
                m: smooth,
                params,
                kinetics: Kinetics::Identity,
                sigma: SigmaSpec::Identity,
            });
            let problem = Problem::new(grid, params, Kinetics::Identity, SigmaSpec::Identity)?
                .with_forcing(forcing);
            run_error(&problem, &smooth, &StepConfig::fixed(dt, 1.0))
        });
        match result {
            Ok(e) => {
                report.record(format!("temporal L2 error [dt={dt}]"), e);
                errs.push(e);
            }
            Err(e) => {
                report.fail(format!("temporal run [dt={dt}]"), e.to_string());
                return report;
            }
        }
    }
    report.check_ge(
        "temporal observed order",
        observed_order(&opts.dts, &errs),
        MMS_TEMPORAL_ORDER,
        format!("dt {:?}, {} cells", opts.dts, opts.temporal_cells),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e = h.map(|x: f64| 3.0 * x * x);
        assert!((observed_order(&h, &e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn discrete_forcing_makes_samples_stationary_residual_free() {
        // with the discrete source, the method-of-lines residual vanishes
        let grid = Grid::unit(2, 8).unwrap();
        let m = Manufactured {
            a: [1.0, 2.0, 1.5, 1.0],
            b: [0.2, 0.5, 0.3, 0.1],
            decay: 0.7,
        };
        let f = DiscreteForcing {
            m,
            params: Params::unit(),
            kinetics: Kinetics::Identity,
            sigma: SigmaSpec::Identity,
        };
        let n = grid.len();
        let mut src = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        f.source(0.3, &grid, &mut src);
        let s = m.state(&grid, 0.3).unwrap();
        let fields = s.fields();
        let p = Params::unit();
        let mut op = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for sp in 0..4 {
            laplacian_accumulate(fields[sp], &grid, 1.0, &mut op[sp]);
        }
        taxis_accumulate(fields[0], fields[1], p.chi_u, &grid, 1.0, &mut op[0]);
        taxis_accumulate(fields[3], fields[2], p.chi_z, &grid, 1.0, &mut op[3]);
        let shape = grid.sample(|x, y| (PI * x).cos() * (PI * y).cos());
        for c in 0..n {
            let kin = KineticTerms::at(
                [fields[0][c], fields[1][c], fields[2][c], fields[3][c]],
                &p,
                Kinetics::Identity,
                SigmaSpec::Identity,
            )
            .rates();
            for sp in 0..4 {
                let dphi = -0.7 * m.b[sp] * (-0.7f64 * 0.3).exp() * shape[c];
                let resid = dphi - (op[sp][c] + kin[sp] + src[sp][c]);
                assert!(resid.abs() < 1e-12, "{resid}");
            }
        }
    }
}
