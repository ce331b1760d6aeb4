//! Homogeneous runs against an independent RK4 integration of the kinetics.

use super::thresholds::{ODE_HALVING_RATIO, ODE_RELATIVE_ERROR};
use super::trajectory::{run_trajectory, RecordOptions};
use super::VerificationReport;
use crate::error::Result;
use crate::model::{Grid, Kinetics, Params, SigmaSpec, Species, State};
use crate::timestepper::{Problem, StepConfig};

/// Samples of the kinetic ODE at `t = k · interval`.
#[derive(Debug, Clone)]
pub struct OdeOracle {
    pub times: Vec<f64>,
    pub values: Vec<[f64; 4]>,
}

fn kinetics_rhs(p: &Params, f: Kinetics, sigma: SigmaSpec, y: [f64; 4]) -> [f64; 4] {
    let [u, v, w, z] = y;
    let su = sigma.value(u.max(0.0));
    let sz = sigma.value(z.max(0.0));
    [
        p.beta_u - p.gamma_u * su * v - p.delta_u * u,
        p.rho_v * v - p.gamma_v * su * v + p.mu_v * w,
        p.gamma_w * su * v - p.alpha_w * w * sz - p.mu_w * w,
        p.alpha_z * f.apply(w.max(0.0)) * sz - p.delta_z * z,
    ]
}

fn axpy(y: [f64; 4], a: f64, k: [f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| y[i] + a * k[i])
}

/// Classical RK4 with `substeps` equal steps per sample interval.
pub fn rk4_kinetics(
    params: &Params,
    kinetics: Kinetics,
    sigma: SigmaSpec,
    y0: [f64; 4],
    horizon: f64,
    samples: usize,
    substeps: usize,
) -> OdeOracle {
    let interval = horizon / samples as f64;
    let h = interval / substeps as f64;
    let f = |y| kinetics_rhs(params, kinetics, sigma, y);
    let mut y = y0;
    let mut times = vec![0.0];
    let mut values = vec![y0];
    for k in 1..=samples {
        for _ in 0..substeps {
            let k1 = f(y);
            let k2 = f(axpy(y, 0.5 * h, k1));
            let k3 = f(axpy(y, 0.5 * h, k2));
            let k4 = f(axpy(y, h, k3));
            y = std::array::from_fn(|i| {
                y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            });
        }
        times.push(if k == samples {
            horizon
        } else {
            k as f64 * interval
        });
        values.push(y);
    }
    OdeOracle { times, values }
}

const SAMPLES: usize = 100;

/// Per-species relative L∞ error of a homogeneous run with step `dt`, and the
/// largest spread between cells.
fn homogeneous_error(
    params: &Params,
    kinetics: Kinetics,
    initial: [f64; 4],
    horizon: f64,
    dt: f64,
    oracle: &OdeOracle,
) -> Result<([f64; 4], f64)> {
    let grid = Grid::new_1d(4, 1.0)?;
    let problem = Problem::new(grid, *params, kinetics, SigmaSpec::Identity)?;
    let state0 = State::homogeneous(&grid, initial)?;
    let cfg = StepConfig::fixed(dt, horizon);
    let opts = RecordOptions {
        interval: horizon / SAMPLES as f64,
        keep_states: true,
        etas: Vec::new(),
        skip_rows: true,
    };
    let traj = run_trajectory(&problem, state0, &cfg, &opts)?;
    let mut err = [0.0f64; 4];
    let mut scale = [0.0f64; 4];
    let mut spread = 0.0f64;
    for (state, exact) in traj.states.iter().zip(&oracle.values) {
        for sp in Species::ALL {
            let f = state.field(sp);
            let s = sp.index();
            err[s] = err[s].max((f[0] - exact[s]).abs());
            scale[s] = scale[s].max(exact[s].abs());
            for x in f {
                spread = spread.max((x - f[0]).abs());
            }
        }
    }
    let rel = std::array::from_fn(|s| {
        if scale[s] > 0.0 {
            err[s] / scale[s]
        } else {
            err[s]
        }
    });
    Ok((rel, spread))
}

/// Homogeneous PDE runs at `dt` and `dt/2` against RK4 at `dt/10`.
pub fn ode_oracle_check(
    params: &Params,
    kinetics: Kinetics,
    initial: [f64; 4],
    horizon: f64,
    dt: f64,
) -> VerificationReport {
    let mut report = VerificationReport::new("ode_oracle");
    let substeps = ((horizon / SAMPLES as f64) / (dt / 10.0)).round().max(1.0) as usize;
    let oracle = rk4_kinetics(
        params,
        kinetics,
        SigmaSpec::Identity,
        initial,
        horizon,
        SAMPLES,
        substeps,
    );

    let coarse = homogeneous_error(params, kinetics, initial, horizon, dt, &oracle);
    let fine = homogeneous_error(params, kinetics, initial, horizon, 0.5 * dt, &oracle);
    let ((e1, spread), (e2, _)) = match (coarse, fine) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            report.fail("homogeneous run", e.to_string());
            return report;
        }
    };
    for sp in Species::ALL {
        let s = sp.index();
        report.record(format!("rel_linf_{}[dt]", sp.name()), e1[s]);
        report.record(format!("rel_linf_{}[dt/2]", sp.name()), e2[s]);
    }
    let worst = e1.iter().cloned().fold(0.0, f64::max);
    let worst_half = e2.iter().cloned().fold(0.0, f64::max);
    report.record("cell_spread", spread);
    report.check_le(
        "relative Linf error vs RK4",
        worst,
        ODE_RELATIVE_ERROR,
        format!("dt = {dt:e}, horizon {horizon}"),
    );
    if worst > 1e-11 {
        report.check_ge(
            "error ratio under dt halving",
            worst / worst_half,
            ODE_HALVING_RATIO,
            format!("{worst:.3e} -> {worst_half:.3e}"),
        );
    } else {
        report.record(
            "error ratio under dt halving (at rounding level)",
            worst / worst_half.max(1e-300),
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_matches_scipy_reference_values() {
        // solve_ivp (RK45, rtol 1e-12) for unit constants from (1,1,1,1) at t = 5
        let o = rk4_kinetics(
            &Params::unit(),
            Kinetics::Identity,
            SigmaSpec::Identity,
            [1.0; 4],
            5.0,
            100,
            500,
        );
        let y = o.values[100];
        assert!((y[1] / 109.27 - 1.0).abs() < 1e-3, "{y:?}");
        assert!((y[2] / 0.795 - 1.0).abs() < 2e-3, "{y:?}");
        assert!((y[3] / 0.209 - 1.0).abs() < 5e-3, "{y:?}");
    }

    #[test]
    fn disease_free_has_no_error() {
        let r = ode_oracle_check(
            &Params::unit(),
            Kinetics::Identity,
            [1.0, 0.0, 0.0, 0.0],
            1.0,
            1e-2,
        );
        assert!(r.passed(), "{}", r.render_text());
        assert!(r.checks[0].measured < 1e-14);
    }
}
