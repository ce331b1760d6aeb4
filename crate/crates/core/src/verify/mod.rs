//! Verification suites and their report format.
//!
//! Every suite returns a [`VerificationReport`]: a list of pass/fail checks, each
//! with the measured value and the threshold it was held to, plus free-form
//! metrics that are recorded without being asserted.

mod apriori;
mod epsilon;
mod inequality;
mod mms;
mod ode;
mod sigma_class;
pub mod thresholds;
mod trajectory;

use std::collections::BTreeMap;
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::model::InitBudget;

pub use apriori::{
    apriori_bounds_suite, bundled_scenario, bundled_scenarios, envelope_check, load_scenarios,
    mass_ledger_check, pointwise_inequality_check, refinement_checks, run_scenario, ScenarioRun,
};
pub use epsilon::{epsilon_limit_study, EpsilonStudy, DEFAULT_EPSILONS};
pub use inequality::{inequality_suite, manufactured_catalog, CatalogField};
pub use mms::{
    mms_suite, observed_order, AnalyticForcing, DiscreteForcing, Manufactured, MmsOptions,
};
pub use ode::{ode_oracle_check, rk4_kinetics, OdeOracle};
pub use sigma_class::sigma_class_suite;
pub use trajectory::{run_trajectory, RecordOptions, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub init_budget: Option<InitBudget>,
}

impl VerificationReport {
    pub fn new(suite: &str) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            init_budget: None,
        }
    }

    /// Passes iff `measured ≤ threshold`; NaN fails.
    pub fn check_le(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) {
        self.checks.push(Check {
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            detail: detail.into(),
        });
    }

    /// Passes iff `measured ≥ threshold`; NaN fails.
    pub fn check_ge(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) {
        self.checks.push(Check {
            name: name.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            detail: detail.into(),
        });
    }

    /// A check that cannot produce a number, such as a solver failure.
    pub fn fail(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            threshold: f64::NAN,
            detail: detail.into(),
        });
    }

    pub fn record(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Appends `other`'s checks and metrics under its suite name.
    pub fn absorb(&mut self, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{}: {}", other.suite, c.name);
            self.checks.push(c);
        }
        for (k, v) in other.metrics {
            self.metrics.insert(format!("{}: {k}", other.suite), v);
        }
        if self.init_budget.is_none() {
            self.init_budget = other.init_budget;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One line per check, then the metrics.
    pub fn render_text(&self) -> String {
        let mut s = format!("suite {}\n", self.suite);
        for c in &self.checks {
            s.push_str(&format!(
                "  {} {}  measured {:.6e}  threshold {:.6e}{}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.threshold,
                if c.detail.is_empty() {
                    String::new()
                } else {
                    format!("  ({})", c.detail)
                }
            ));
        }
        for (k, v) in &self.metrics {
            s.push_str(&format!("  metric {k} = {v:.6e}\n"));
        }
        s.push_str(&format!(
            "  {} of {} checks passed\n",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        ));
        s
    }
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Runs independent jobs on worker threads and returns their results in job order.
///
/// Workers pull job indices from a shared counter and send `(index, result)`
/// pairs to a single collector, which restores index order.
pub fn run_indexed<T, F>(jobs: Vec<F>, workers: usize) -> Vec<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let n = jobs.len();
    let workers = workers.clamp(1, n.max(1));
    let slots: Vec<std::sync::Mutex<Option<F>>> = jobs
        .into_iter()
        .map(|j| std::sync::Mutex::new(Some(j)))
        .collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, T)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let slots = &slots;
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let job = slots[i].lock().unwrap().take().expect("each job runs once");
                if tx.send((i, job())).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut results: Vec<Option<T>> = (0..n).map(|_| None).collect();
    for (i, r) in rx {
        results[i] = Some(r);
    }
    results
        .into_iter()
        .map(|r| r.expect("every job reports"))
        .collect()
}

/// Worker count for [`run_indexed`]: the available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_and_rendering() {
        let mut r = VerificationReport::new("demo");
        r.check_le("small", 1.0, 2.0, "");
        r.check_ge("order", 1.95, 1.9, "slope");
        r.record("ratio", 0.5);
        assert!(r.passed());
        r.check_le("nan", f64::NAN, 1.0, "");
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        let text = r.render_text();
        assert!(text.contains("PASS small"));
        assert!(text.contains("FAIL nan"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["suite"], "demo");
        assert_eq!(json["checks"][2]["measured"], serde_json::Value::Null);
    }

    #[test]
    fn indexed_runs_keep_order() {
        let jobs: Vec<_> = (0..10).map(|i| move || i * i).collect();
        assert_eq!(
            run_indexed(jobs, 3),
            (0..10).map(|i| i * i).collect::<Vec<_>>()
        );
        let none: Vec<fn() -> u8> = Vec::new();
        assert!(run_indexed(none, 4).is_empty());
    }

    #[test]
    fn relative_change_handles_zero() {
        assert_eq!(relative_change(0.0, 0.0), 0.0);
        assert!((relative_change(1.0, 1.1) - 0.1 / 1.1).abs() < 1e-15);
    }
}
