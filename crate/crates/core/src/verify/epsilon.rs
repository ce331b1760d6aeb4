//! Cauchy-convergence experiment for the regularized problem as ε → 0.

use super::thresholds::EPSILON_FINAL_RATIO;
use super::trajectory::{run_trajectory, RecordOptions, Trajectory};
use super::{default_workers, run_indexed, VerificationReport};
use crate::error::{Error, Result};
use crate::functionals::{trapezoid, SpaceTimeIntegrands};
use crate::io::RunConfig;
use crate::model::{Grid, Kinetics, Params, SigmaSpec, Species, State};
use crate::timestepper::{Problem, StepConfig};

pub const DEFAULT_EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Everything the study needs; each ε run starts from `initial`.
#[derive(Debug, Clone)]
pub struct EpsilonStudy {
    pub grid: Grid,
    pub params: Params,
    pub kinetics: Kinetics,
    pub initial: State,
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    /// Spacing of the samples entering the space-time norms.
    pub sample_interval: f64,
    pub step: StepConfig,
    pub etas: Vec<f64>,
    pub workers: usize,
}

impl EpsilonStudy {
    /// Takes domain, constants, time control and initial data from a run
    /// configuration; its regularization is replaced by each ε in turn.
    pub fn from_config(cfg: &RunConfig, epsilons: &[f64]) -> Result<Self> {
        let grid = cfg.grid()?;
        let initial = cfg.init.build(&grid, &cfg.params)?;
        Ok(EpsilonStudy {
            grid,
            params: cfg.params,
            kinetics: cfg.kinetics,
            initial,
            epsilons: epsilons.to_vec(),
            horizon: cfg.time.t_end,
            sample_interval: cfg.output.diagnostics_interval,
            step: cfg.time,
            etas: vec![0.25, 0.5],
            workers: default_workers(),
        })
    }

    fn run(&self, eps: f64) -> Result<Trajectory> {
        let sigma = SigmaSpec::mollified(eps)?;
        let problem = Problem::new(self.grid, self.params, self.kinetics, sigma)?;
        let cfg = StepConfig {
            t_end: self.horizon,
            ..self.step
        };
        let opts = RecordOptions {
            interval: self.sample_interval,
            keep_states: true,
            etas: self.etas.clone(),
            skip_rows: true,
        };
        run_trajectory(&problem, self.initial.clone(), &cfg, &opts)
    }
}

/// `‖a − b‖` in discrete `L¹(Ω × (0, T))`, per species.
fn space_time_l1(a: &Trajectory, b: &Trajectory) -> Result<[f64; 4]> {
    if a.times != b.times {
        return Err(Error::Shape {
            expected: a.times.len(),
            actual: b.times.len(),
        });
    }
    let vol = a.grid.cell_volume();
    let mut out = [0.0; 4];
    for sp in Species::ALL {
        let per_time: Vec<f64> = a
            .states
            .iter()
            .zip(&b.states)
            .map(|(x, y)| {
                x.field(sp)
                    .iter()
                    .zip(y.field(sp))
                    .map(|(p, q)| (p - q).abs())
                    .sum::<f64>()
                    * vol
            })
            .collect();
        out[sp.index()] = trapezoid(&a.times, &per_time);
    }
    Ok(out)
}

pub fn epsilon_limit_study(study: &EpsilonStudy) -> VerificationReport {
    let mut report = VerificationReport::new("epsilon_limit");
    if study.epsilons.len() < 3 {
        report.fail(
            "epsilon list",
            format!("needs at least 3 values, got {}", study.epsilons.len()),
        );
        return report;
    }
    let jobs: Vec<_> = study
        .epsilons
        .iter()
        .map(|&eps| move || study.run(eps))
        .collect();
    let mut runs = Vec::new();
    for (eps, run) in study.epsilons.iter().zip(run_indexed(jobs, study.workers)) {
        match run {
            Ok(t) => runs.push(t),
            Err(e) => {
                report.fail(format!("run [eps={eps}]"), e.to_string());
                return report;
            }
        }
    }

    for (eps, traj) in study.epsilons.iter().zip(&runs) {
        report.record(format!("steps [eps={eps}]"), traj.steps as f64);
        for (e, eta) in study.etas.iter().enumerate() {
            for (k, name) in SpaceTimeIntegrands::NAMES.iter().enumerate() {
                let v = traj.time_integral(|i| traj.integrands[i][e].values()[k]);
                report.record(format!("int_0^T {name} [eta={eta}, eps={eps}]"), v);
            }
        }
    }

    let mut diffs = Vec::new();
    for (j, pair) in runs.windows(2).enumerate() {
        match space_time_l1(&pair[0], &pair[1]) {
            Ok(d) => {
                for sp in Species::ALL {
                    report.record(format!("d_{j} {}", sp.name()), d[sp.index()]);
                }
                diffs.push(d);
            }
            Err(e) => {
                report.fail(format!("d_{j}"), e.to_string());
                return report;
            }
        }
    }

    for sp in Species::ALL {
        let s = sp.index();
        for j in 0..diffs.len() - 1 {
            let (a, b) = (diffs[j][s], diffs[j + 1][s]);
            let both_zero = a == 0.0 && b == 0.0;
            report.check_le(
                format!("{}: d_{} / d_{j}", sp.name(), j + 1),
                if both_zero { 0.0 } else { b / a },
                if both_zero { 0.0 } else { 1.0 - f64::EPSILON },
                format!("{a:.4e} -> {b:.4e}"),
            );
        }
        let (first, last) = (diffs[0][s], diffs[diffs.len() - 1][s]);
        report.check_le(
            format!("{}: final d", sp.name()),
            last,
            EPSILON_FINAL_RATIO * first,
            format!("d_0 = {first:.4e}"),
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_study(initial: [f64; 4], epsilons: Vec<f64>) -> EpsilonStudy {
        let grid = Grid::unit(1, 8).unwrap();
        EpsilonStudy {
            grid,
            params: Params::unit(),
            kinetics: Kinetics::Identity,
            initial: State::homogeneous(&grid, initial).unwrap(),
            epsilons,
            horizon: 0.2,
            sample_interval: 0.05,
            step: StepConfig::fixed(0.01, 0.2),
            etas: vec![0.5],
            workers: 2,
        }
    }

    #[test]
    fn below_the_plateau_all_runs_agree() {
        let r = epsilon_limit_study(&small_study([0.5, 0.5, 0.5, 0.5], vec![0.2, 0.1, 0.05]));
        assert!(r.passed(), "{}", r.render_text());
        for sp in ["u", "v", "w", "z"] {
            assert_eq!(r.metrics[&format!("d_0 {sp}")], 0.0);
        }
    }

    #[test]
    fn identical_epsilons_give_zero_difference() {
        let r = epsilon_limit_study(&small_study([30.0, 2.0, 1.0, 30.0], vec![0.1, 0.1, 0.05]));
        for sp in ["u", "v", "w", "z"] {
            assert_eq!(r.metrics[&format!("d_0 {sp}")], 0.0);
        }
    }

    #[test]
    fn too_few_epsilons_fail() {
        assert!(!epsilon_limit_study(&small_study([1.0; 4], vec![0.2, 0.1])).passed());
    }
}
