//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use granuloma::io::simulate;
use granuloma::model::{Kinetics, Params};
use granuloma::verify::{
    bundled_scenario, bundled_scenarios, envelope_check, epsilon_limit_study, inequality_suite,
    mass_ledger_check, mms_suite, ode_oracle_check, refinement_checks, run_scenario,
    sigma_class_suite, EpsilonStudy, MmsOptions, ScenarioRun, VerificationReport, DEFAULT_EPSILONS,
};

struct Outcome {
    name: &'static str,
    passed: bool,
    elapsed: Duration,
}

struct Harness {
    outcomes: Vec<Outcome>,
}

impl Harness {
    fn record(
        &mut self,
        name: &'static str,
        budget_s: u64,
        elapsed: Duration,
        report: &VerificationReport,
        summary: String,
    ) {
        let budget = Duration::from_secs(budget_s);
        let passed = report.passed() && !report.checks.is_empty() && elapsed <= budget;
        let tag = if passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} {name}: {summary} [{:.2}s of {}s]",
            elapsed.as_secs_f64(),
            budget_s
        );
        for c in report.failures() {
            println!(
                "     failed: {} measured {:e} threshold {:e} {}",
                c.name, c.measured, c.threshold, c.detail
            );
        }
        if elapsed > budget {
            println!("     over the runtime budget");
        }
        self.outcomes.push(Outcome {
            name,
            passed,
            elapsed,
        });
    }
}

fn worst(report: &VerificationReport, filter: impl Fn(&str) -> bool) -> (f64, f64) {
    report
        .checks
        .iter()
        .filter(|c| filter(&c.name))
        .map(|c| (c.measured, c.threshold))
        .fold(
            (f64::NEG_INFINITY, f64::NAN),
            |a, b| if b.0 > a.0 { b } else { a },
        )
}

fn sub_report(report: &VerificationReport, filter: impl Fn(&str) -> bool) -> VerificationReport {
    let mut out = VerificationReport::new(&report.suite);
    out.checks = report
        .checks
        .iter()
        .filter(|c| filter(&c.name))
        .cloned()
        .collect();
    out
}

fn main() -> ExitCode {
    let mut h = Harness {
        outcomes: Vec::new(),
    };

    // Σ-class membership of σ_ε
    let t = Instant::now();
    let r = sigma_class_suite(&[0.01, 0.1, 0.5]);
    let (m, _) = worst(&r, |n| n.starts_with("max s*sigma'"));
    h.record(
        "sigma class",
        1,
        t.elapsed(),
        &r,
        format!("{} checks, max s*sigma'/sigma = {m:.12}", r.checks.len()),
    );

    // homogeneous runs against RK4
    let t = Instant::now();
    let r = ode_oracle_check(&Params::unit(), Kinetics::Identity, [1.0; 4], 5.0, 1e-3);
    let err = r.checks[0].measured;
    let ratio = r.checks.get(1).map_or(f64::NAN, |c| c.measured);
    h.record(
        "ode oracle",
        10,
        t.elapsed(),
        &r,
        format!("rel Linf {err:.3e} (<= 1e-4), halving ratio {ratio:.3} (>= 3.5)"),
    );

    // mass ledger and envelope over the bundled catalog
    let t = Instant::now();
    let runs: Vec<ScenarioRun> = bundled_scenarios()
        .iter()
        .map(|(name, cfg)| run_scenario(name, cfg, 1))
        .collect::<Result<_, _>>()
        .expect("bundled scenarios run");
    let run_time = t.elapsed();
    let mut r = VerificationReport::new("mass_ledger");
    for run in &runs {
        mass_ledger_check(&mut r, run);
    }
    let (m, _) = worst(&r, |_| true);
    h.record(
        "mass ledger",
        30,
        t.elapsed(),
        &r,
        format!("{} scenarios, worst drift {m:.3e} (<= 1e-10)", runs.len()),
    );

    let t = Instant::now();
    let mut r = VerificationReport::new("envelope");
    for run in &runs {
        envelope_check(&mut r, run);
    }
    let (m, _) = worst(&r, |_| true);
    h.record(
        "combined-mass envelope",
        60,
        t.elapsed() + run_time,
        &r,
        format!("{} scenarios, max y/envelope {m:.4} (<= 1.05)", runs.len()),
    );

    // gradient inequality on the manufactured catalog at h = 1/128
    let t = Instant::now();
    let r = inequality_suite(&[128]);
    let (m, _) = worst(&r, |_| true);
    h.record(
        "gradient inequality",
        5,
        t.elapsed(),
        &r,
        format!(
            "{} fields, max normalized ratio {m:.4} (<= 1.05)",
            r.checks.len()
        ),
    );

    // refinement stability on gaussian_infection, 64² against 128²
    let t = Instant::now();
    let cfg = bundled_scenario("gaussian_infection").expect("bundled");
    let coarse = run_scenario("gaussian_infection", &cfg, 1).expect("64x64 run");
    let fine = run_scenario("gaussian_infection", &cfg, 2).expect("128x128 run");
    let mut all = VerificationReport::new("refinement");
    refinement_checks(&mut all, &coarse, &fine);
    let elapsed = t.elapsed();
    let energy = sub_report(&all, |n| !n.ends_with("sup_t max v"));
    let (m, _) = worst(&energy, |_| true);
    h.record(
        "quasi-energy stability",
        300,
        elapsed,
        &energy,
        format!("energies and 8 dissipation ledgers, max relative change {m:.4} (<= 0.10)"),
    );
    let sup_v = sub_report(&all, |n| n.ends_with("sup_t max v"));
    h.record(
        "sup-norm of v",
        300,
        elapsed,
        &sup_v,
        format!("relative change {:.4} (<= 0.05)", sup_v.checks[0].measured),
    );

    // ε → 0
    let t = Instant::now();
    let cfg = bundled_scenario("epsilon_limit").expect("bundled");
    let study = EpsilonStudy::from_config(&cfg, &DEFAULT_EPSILONS).expect("study");
    let r = epsilon_limit_study(&study);
    let mut ds = Vec::new();
    for sp in ["u", "v", "w", "z"] {
        let d: Vec<String> = (0..3)
            .map(|j| {
                format!(
                    "{:.2e}",
                    r.metrics
                        .get(&format!("d_{j} {sp}"))
                        .copied()
                        .unwrap_or(f64::NAN)
                )
            })
            .collect();
        ds.push(format!("{sp} {}", d.join(" > ")));
    }
    let positive = (0..3).all(|j| {
        ["u", "v", "w", "z"].iter().all(|sp| {
            r.metrics
                .get(&format!("d_{j} {sp}"))
                .is_some_and(|d| *d > 0.0)
        })
    });
    let mut r = r;
    if !positive {
        r.fail(
            "differences",
            "some d_j vanished; strict decrease needs d_j > 0",
        );
    }
    h.record("epsilon limit", 600, t.elapsed(), &r, ds.join("; "));

    // manufactured solutions
    let t = Instant::now();
    let r = mms_suite(&MmsOptions::default());
    let orders: Vec<String> = r
        .checks
        .iter()
        .filter(|c| c.name.ends_with("observed order"))
        .map(|c| {
            format!(
                "{} {:.3} (>= {})",
                c.name.trim_end_matches(" observed order"),
                c.measured,
                c.threshold
            )
        })
        .collect();
    h.record("mms orders", 300, t.elapsed(), &r, orders.join(", "));

    // determinism of the written diagnostics
    let t = Instant::now();
    let tmp = tempfile::tempdir().expect("temp dir");
    let cfg = bundled_scenario("granuloma").expect("bundled");
    let mut bytes = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("run{k}"));
        simulate(&cfg, &dir).expect("simulate");
        bytes.push(fs::read(dir.join("diagnostics.csv")).expect("diagnostics written"));
    }
    let mut r = VerificationReport::new("determinism");
    let identical = bytes[0] == bytes[1];
    r.check_le(
        "byte-identical diagnostics.csv",
        if identical { 0.0 } else { 1.0 },
        0.0,
        "",
    );
    h.record(
        "determinism",
        60,
        t.elapsed(),
        &r,
        format!(
            "two granuloma runs, {} bytes, identical: {identical}",
            bytes[0].len()
        ),
    );

    let failed: Vec<&str> = h
        .outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    let total: f64 = h.outcomes.iter().map(|o| o.elapsed.as_secs_f64()).sum();
    println!(
        "{} of {} criteria passed ({total:.1}s)",
        h.outcomes.len() - failed.len(),
        h.outcomes.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
