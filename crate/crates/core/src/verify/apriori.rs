//! Combined-mass envelope, mass ledger, and two-resolution stability of the
//! bootstrap and quasi-energy quantities over a scenario catalog.

use std::path::Path;

use super::thresholds::{
    ENVELOPE_SLACK, INEQUALITY_SLACK, MASS_LEDGER, REFINEMENT_STABILITY, ROUNDING_FLOOR,
    SUP_V_STABILITY,
};
use super::trajectory::{run_trajectory, RecordOptions, Trajectory};
use super::{relative_change, run_indexed, VerificationReport};
use crate::error::{Error, Result};
use crate::functionals::{init_budget, Dissipation};
use crate::io::{parse_config, RunConfig};
use crate::model::{InitBudget, Params, Species};

const BUNDLED: [(&str, &str); 5] = [
    (
        "disease_free",
        include_str!("../../scenarios/disease_free.toml"),
    ),
    (
        "unit_homogeneous",
        include_str!("../../scenarios/unit_homogeneous.toml"),
    ),
    (
        "gaussian_infection",
        include_str!("../../scenarios/gaussian_infection.toml"),
    ),
    ("granuloma", include_str!("../../scenarios/granuloma.toml")),
    (
        "epsilon_limit",
        include_str!("../../scenarios/epsilon_limit.toml"),
    ),
];

/// The scenario catalog shipped with the crate, in fixed order.
pub fn bundled_scenarios() -> Vec<(String, RunConfig)> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            let cfg = parse_config(text).unwrap_or_else(|e| panic!("bundled scenario {name}: {e}"));
            (name.to_string(), cfg)
        })
        .collect()
}

/// One bundled scenario by name.
pub fn bundled_scenario(name: &str) -> Result<RunConfig> {
    bundled_scenarios()
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, c)| c)
        .ok_or_else(|| Error::Unknown {
            kind: "scenario",
            name: name.to_string(),
        })
}

/// Every `*.toml` in `dir`, sorted by file name.
pub fn load_scenarios(dir: &Path) -> Result<Vec<(String, RunConfig)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "toml") {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            Ok((name, crate::io::load_config(&p)?))
        })
        .collect()
}

/// A scenario run at one resolution.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub name: String,
    pub cells: Vec<usize>,
    pub params: Params,
    pub budget: InitBudget,
    pub trajectory: Trajectory,
}

impl ScenarioRun {
    fn label_cells(&self) -> String {
        let cells: Vec<String> = self.cells.iter().map(|c| c.to_string()).collect();
        cells.join("x")
    }

    pub fn label(&self) -> String {
        format!("{} [{}]", self.name, self.label_cells())
    }

    /// Combined mass `y` at every sample.
    pub fn combined_mass(&self) -> Vec<f64> {
        let w = self.params.mass_weights();
        self.trajectory
            .masses
            .iter()
            .map(|m| m.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Runs `cfg` with every cell count multiplied by `refine`.
pub fn run_scenario(name: &str, cfg: &RunConfig, refine: usize) -> Result<ScenarioRun> {
    let mut cfg = cfg.clone();
    for c in cfg.domain.cells.iter_mut() {
        *c *= refine;
    }
    cfg.validate()?;
    let problem = cfg.problem()?;
    let state0 = cfg.init.build(&problem.grid, &cfg.params)?;
    let budget = init_budget(&state0, &problem.grid)?;
    budget.validate()?;
    let opts = RecordOptions {
        interval: cfg.output.diagnostics_interval,
        ..Default::default()
    };
    let trajectory = run_trajectory(&problem, state0, &cfg.time, &opts)?;
    Ok(ScenarioRun {
        name: name.to_string(),
        cells: cfg.domain.cells.clone(),
        params: cfg.params,
        budget,
        trajectory,
    })
}

/// `y(t) ≤ (y(0) + β_u|Ω|/c) e^{ct}` with the envelope slack.
pub fn envelope_check(report: &mut VerificationReport, run: &ScenarioRun) {
    let p = &run.params;
    let c = p.mass_growth_rate();
    let measure = run.trajectory.grid.measure();
    let y = run.combined_mass();
    let base = y[0] + p.beta_u * measure / c;
    let mut worst = 0.0f64;
    let mut first_violation = None;
    for (t, yk) in run.trajectory.times.iter().zip(&y) {
        let ratio = yk / (base * (c * t).exp());
        if ratio > 1.0 + ENVELOPE_SLACK && first_violation.is_none() {
            first_violation = Some(*t);
        }
        worst = worst.max(ratio);
    }
    let detail = match first_violation {
        Some(t) => format!("first violation at t = {t}"),
        None => format!("c = {c}, y(0) = {:.6e}", y[0]),
    };
    report.check_le(
        format!("{}: max y(t)/envelope(t)", run.label()),
        worst,
        1.0 + ENVELOPE_SLACK,
        detail,
    );
}

/// Mass drift of each species against its accumulated kinetic ledger.
pub fn mass_ledger_check(report: &mut VerificationReport, run: &ScenarioRun) {
    let traj = &run.trajectory;
    let (m0, m1) = (traj.masses[0], traj.masses[traj.masses.len() - 1]);
    let totals = traj.ledger.species_totals();
    let terms = traj.ledger.terms.values();
    let ranges = [0..3, 3..6, 6..9, 9..11];
    let mut worst = 0.0f64;
    let mut worst_species = Species::U;
    for sp in Species::ALL {
        let s = sp.index();
        let activity: f64 = terms[ranges[s].clone()]
            .iter()
            .map(|x| x.abs())
            .sum::<f64>()
            + traj.ledger.forcing[s].abs();
        let scale = m0[s].abs().max(m1[s].abs()).max(activity);
        let drift = (m1[s] - m0[s] - totals[s]).abs();
        let rel = if scale > 0.0 { drift / scale } else { drift };
        if rel > worst {
            worst = rel;
            worst_species = sp;
        }
    }
    report.check_le(
        format!("{}: mass ledger drift", run.label()),
        worst,
        MASS_LEDGER,
        format!("worst species {}", worst_species.name()),
    );
}

/// Relative change, zero when both values sit below the rounding floor.
fn refinement_change(a: f64, b: f64) -> f64 {
    if a.abs().max(b.abs()) < ROUNDING_FLOOR {
        0.0
    } else {
        relative_change(a, b)
    }
}

/// `∫|∇φ|⁴/φ³ ≤ (2+√n)² ∫φ|D² ln φ|²` for `v` and `w` at every recorded time.
pub fn pointwise_inequality_check(report: &mut VerificationReport, run: &ScenarioRun) {
    let c = (2.0 + (run.trajectory.grid.dim() as f64).sqrt()).powi(2);
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for row in &run.trajectory.rows {
        let d = &row.dissipation;
        for (lhs, rhs) in [(d.quartic_v, d.hess_v), (d.quartic_w, d.hess_w)] {
            if lhs.abs() < ROUNDING_FLOOR {
                continue;
            }
            let ratio = lhs / (c * rhs);
            if ratio > worst {
                worst = ratio;
                at = row.t;
            }
        }
    }
    report.check_le(
        format!("{}: max_t quartic/((2+sqrt n)^2 hessian)", run.label()),
        worst,
        1.0 + INEQUALITY_SLACK,
        format!("worst at t = {at}"),
    );
}

fn sup(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, f64::max)
}

/// Refinement stability of `sup_t ‖v‖∞`, `sup_t` of both energies, and the
/// time-accumulated dissipation entries.
pub fn refinement_checks(
    report: &mut VerificationReport,
    coarse: &ScenarioRun,
    fine: &ScenarioRun,
) {
    let (a, b) = (&coarse.trajectory, &fine.trajectory);
    let tag = format!(
        "{} {} -> {}",
        coarse.name,
        coarse.label_cells(),
        fine.label_cells()
    );
    let sup_v = |t: &Trajectory| sup(t.rows.iter().map(|r| r.linf[1]));
    let (va, vb) = (sup_v(a), sup_v(b));
    report.check_le(
        format!("{tag}: sup_t max v"),
        refinement_change(va, vb),
        SUP_V_STABILITY,
        format!("{va:.6e} -> {vb:.6e}"),
    );
    let energies: [(&str, fn(&crate::functionals::DiagnosticsRow) -> f64); 2] =
        [("energy1", |r| r.energy1), ("energy2", |r| r.energy2)];
    for (name, f) in energies {
        let (ea, eb) = (sup(a.rows.iter().map(f)), sup(b.rows.iter().map(f)));
        report.check_le(
            format!("{tag}: sup_t {name}"),
            refinement_change(ea, eb),
            REFINEMENT_STABILITY,
            format!("{ea:.6e} -> {eb:.6e}"),
        );
    }
    let (da, db) = (a.accumulated_dissipation(), b.accumulated_dissipation());
    for (k, name) in Dissipation::NAMES.iter().enumerate() {
        report.check_le(
            format!("{tag}: int_0^T {name}"),
            refinement_change(da[k], db[k]),
            REFINEMENT_STABILITY,
            format!("{:.6e} -> {:.6e}", da[k], db[k]),
        );
    }
}

/// Runs every scenario at its own resolution and at twice it, concurrently.
pub fn apriori_bounds_suite(
    scenarios: &[(String, RunConfig)],
    workers: usize,
) -> VerificationReport {
    let mut report = VerificationReport::new("apriori_bounds");
    let jobs: Vec<_> = scenarios
        .iter()
        .flat_map(|(name, cfg)| [1, 2].map(|r| move || run_scenario(name, cfg, r)))
        .collect();
    let mut results = run_indexed(jobs, workers).into_iter();
    for (name, _) in scenarios {
        let (coarse, fine) = (results.next().unwrap(), results.next().unwrap());
        let (coarse, fine) = match (coarse, fine) {
            (Ok(c), Ok(f)) => (c, f),
            (Err(e), _) | (_, Err(e)) => {
                report.fail(format!("{name}: run"), e.to_string());
                continue;
            }
        };
        if report.init_budget.is_none() {
            report.init_budget = Some(coarse.budget);
        }
        report.record(format!("{name}: init budget A"), coarse.budget.a_bound);
        for run in [&coarse, &fine] {
            envelope_check(&mut report, run);
            mass_ledger_check(&mut report, run);
            pointwise_inequality_check(&mut report, run);
        }
        refinement_checks(&mut report, &coarse, &fine);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_parses() {
        let all = bundled_scenarios();
        assert_eq!(all.len(), BUNDLED.len());
        assert!(bundled_scenario("granuloma").is_ok());
        assert!(matches!(
            bundled_scenario("nope"),
            Err(Error::Unknown { .. })
        ));
    }

    #[test]
    fn disease_free_is_flat_and_inside_the_envelope() {
        let cfg = bundled_scenario("disease_free").unwrap();
        let run = run_scenario("disease_free", &cfg, 1).unwrap();
        let y = run.combined_mass();
        for yk in &y {
            assert!((yk - y[0]).abs() <= 1e-12 * y[0]);
        }
        let mut r = VerificationReport::new("t");
        envelope_check(&mut r, &run);
        mass_ledger_check(&mut r, &run);
        assert!(r.passed(), "{}", r.render_text());
    }

    #[test]
    fn unit_constants_envelope_is_y0_plus_measure_times_exp_t() {
        let p = Params::unit();
        assert_eq!(p.mass_growth_rate(), 1.0);
        assert_eq!(p.mass_weights(), [1.0, 1.0, 2.0, 2.0]);
        // homogeneous (1,1,1,1) on the unit square: y0 = 6, envelope (6 + 1) e^t
        let cfg = bundled_scenario("unit_homogeneous").unwrap();
        let run = run_scenario("unit_homogeneous", &cfg, 1).unwrap();
        let y = run.combined_mass();
        assert!((y[0] - 6.0).abs() < 1e-12);
        for (t, yk) in run.trajectory.times.iter().zip(&y) {
            assert!(*yk <= 7.0 * t.exp());
        }
    }
}
