//! Sampled check that every σ_ε lies in the saturation class Σ.

use super::thresholds::SIGMA_TOLERANCE;
use super::VerificationReport;
use crate::model::SigmaSpec;

const SAMPLES: usize = 10_000;
const S_MAX: f64 = 100.0;

/// For each ε: `σ(0) = 0`, `0 ≤ σ′ ≤ 1` and `sσ′/σ ≤ 2` on `10⁴` points of
/// `(0, 100]`; across ε, `σ_ε ≤ σ_ε′ ≤ id` whenever `ε ≥ ε′`.
pub fn sigma_class_suite(epsilons: &[f64]) -> VerificationReport {
    let mut report = VerificationReport::new("sigma_class");
    let tol = SIGMA_TOLERANCE;
    let grid: Vec<f64> = (1..=SAMPLES)
        .map(|k| S_MAX * k as f64 / SAMPLES as f64)
        .collect();
    let mut specs = Vec::new();
    for &eps in epsilons {
        let spec = match SigmaSpec::mollified(eps) {
            Ok(s) => s,
            Err(e) => {
                report.fail(format!("eps={eps}"), e.to_string());
                continue;
            }
        };
        specs.push((eps, spec));
        report.check_le(
            format!("|sigma(0)| [eps={eps}]"),
            spec.value(0.0).abs(),
            tol,
            "",
        );
        let mut below = 0.0f64;
        let mut above = 0.0f64;
        let mut ratio = 0.0f64;
        for &s in &grid {
            let d = spec.derivative(s);
            below = below.max(-d);
            above = above.max(d - 1.0);
            let v = spec.value(s);
            ratio = ratio.max(s * d / v);
        }
        report.check_le(
            format!("max(-sigma') [eps={eps}]"),
            below,
            tol,
            "sigma' >= 0",
        );
        report.check_le(
            format!("max(sigma' - 1) [eps={eps}]"),
            above,
            tol,
            "sigma' <= 1",
        );
        report.check_le(
            format!("max s*sigma'/sigma [eps={eps}]"),
            ratio,
            2.0 + tol,
            "",
        );
    }

    specs.sort_by(|a, b| b.0.total_cmp(&a.0));
    for pair in specs.windows(2) {
        let ((e_big, big), (e_small, small)) = (pair[0], pair[1]);
        let mut worst = 0.0f64;
        for &s in &grid {
            worst = worst.max(big.value(s) - small.value(s));
            worst = worst.max(small.value(s) - s);
        }
        report.check_le(
            format!("sigma_{e_big} <= sigma_{e_small} <= id"),
            worst,
            tol,
            "ordering violation",
        );
    }

    if let Ok(spec) = SigmaSpec::mollified(0.5) {
        let ratio = |s: f64| s * spec.derivative(s) / spec.value(s);
        report.check_le(
            "eps=0.5, s=1: |sigma' - 1|",
            (spec.derivative(1.0) - 1.0).abs(),
            tol,
            "",
        );
        report.check_le(
            "eps=0.5, s=1: |ratio - 1|",
            (ratio(1.0) - 1.0).abs(),
            tol,
            "",
        );
        report.check_le(
            "eps=0.5, s=3: ratio",
            ratio(3.0),
            2.0,
            "s inside (1/eps, 2/eps)",
        );
        report.check_le(
            "eps=0.5, s=5: sigma'",
            spec.derivative(5.0).abs(),
            tol,
            "plateau",
        );
        report.check_le("eps=0.5, s=5: ratio", ratio(5.0).abs(), tol, "plateau");
    }
    report
}
