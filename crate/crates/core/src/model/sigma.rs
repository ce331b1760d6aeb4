//! Saturation laws σ for the taxis sensitivity and the bilinear kinetics.
//!
//! Two laws are supported: the identity, which recovers the unregularized
//! model, and the mollified family
//!
//! ```text
//! σ_ε(s) = ∫₀ˢ ζ(ετ) dτ,
//! ```
//!
//! where ζ is a smooth cutoff equal to 1 on (−∞, 1] and 0 on [2, ∞). On the
//! transition interval ζ is the exp(−1/r) smooth step. Since
//! `σ_ε(s) = S(εs)/ε` with `S(x) = ∫₀ˣ ζ`, a single table of `S` on `[1, 2]`
//! serves every ε.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_gauss_legendre;

/// Intervals of the Hermite table for `S` on `[1, 2]`.
const TABLE_INTERVALS: usize = 2048;

/// Saturation law σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaSpec {
    Identity,
    Mollified { epsilon: f64 },
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::Identity
    }
}

impl SigmaSpec {
    pub fn mollified(epsilon: f64) -> Result<Self> {
        let spec = SigmaSpec::Mollified { epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SigmaSpec::Identity => Ok(()),
            SigmaSpec::Mollified { epsilon } if epsilon > 0.0 && epsilon < 1.0 => Ok(()),
            SigmaSpec::Mollified { epsilon } => Err(Error::validation(
                "epsilon",
                format!("must lie in (0, 1), got {epsilon}"),
            )),
        }
    }

    /// σ(s) for `s ≥ 0`. No domain check; see [`sigma_eval`].
    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            SigmaSpec::Identity => s,
            SigmaSpec::Mollified { epsilon } => {
                let x = epsilon * s;
                if x <= 1.0 {
                    s
                } else if x >= 2.0 {
                    1.5 / epsilon
                } else {
                    cutoff_integral(x) / epsilon
                }
            }
        }
    }

    /// σ′(s) for `s ≥ 0`. No domain check; see [`sigma_prime`].
    #[inline]
    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            SigmaSpec::Identity => 1.0,
            SigmaSpec::Mollified { epsilon } => cutoff(epsilon * s),
        }
    }

    /// Largest argument on which σ coincides with the identity.
    pub fn identity_range(&self) -> f64 {
        match *self {
            SigmaSpec::Identity => f64::INFINITY,
            SigmaSpec::Mollified { epsilon } => 1.0 / epsilon,
        }
    }
}

/// σ(s), rejecting negative or non-finite arguments.
pub fn sigma_eval(s: f64, spec: SigmaSpec) -> Result<f64> {
    check_argument(s)?;
    Ok(spec.value(s))
}

/// σ′(s), rejecting negative or non-finite arguments.
pub fn sigma_prime(s: f64, spec: SigmaSpec) -> Result<f64> {
    check_argument(s)?;
    Ok(spec.derivative(s))
}

fn check_argument(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "saturation law evaluated at s = {s}, expected s ≥ 0"
        )))
    }
}

#[inline]
fn smooth_bump(r: f64) -> f64 {
    if r > 0.0 {
        (-1.0 / r).exp()
    } else {
        0.0
    }
}

/// The cutoff ζ: 1 on (−∞, 1], 0 on [2, ∞), C^∞ smooth step in between.
#[inline]
pub fn cutoff(tau: f64) -> f64 {
    if tau <= 1.0 {
        1.0
    } else if tau >= 2.0 {
        0.0
    } else {
        let a = smooth_bump(2.0 - tau);
        let b = smooth_bump(tau - 1.0);
        a / (a + b)
    }
}

/// ζ′, closed form.
pub fn cutoff_derivative(tau: f64) -> f64 {
    if tau <= 1.0 || tau >= 2.0 {
        return 0.0;
    }
    let (ra, rb) = (2.0 - tau, tau - 1.0);
    let (a, b) = (smooth_bump(ra), smooth_bump(rb));
    -a * b * (1.0 / (ra * ra) + 1.0 / (rb * rb)) / ((a + b) * (a + b))
}

struct CutoffTable {
    values: Vec<f64>,
    slopes: Vec<f64>,
}

fn table() -> &'static CutoffTable {
    static TABLE: OnceLock<CutoffTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 1.0 / TABLE_INTERVALS as f64;
        let mut values = Vec::with_capacity(TABLE_INTERVALS + 1);
        let mut slopes = Vec::with_capacity(TABLE_INTERVALS + 1);
        let mut acc = 1.0;
        values.push(acc);
        slopes.push(1.0);
        for k in 0..TABLE_INTERVALS {
            let a = 1.0 + k as f64 * h;
            let b = 1.0 + (k + 1) as f64 * h;
            acc += adaptive_gauss_legendre(&cutoff, a, b, 1e-16);
            values.push(acc);
            slopes.push(cutoff(b));
        }
        CutoffTable { values, slopes }
    })
}

/// `S(x) = ∫₀ˣ ζ(τ) dτ`, using the cached Hermite table on `(1, 2)`.
pub fn cutoff_integral(x: f64) -> f64 {
    if x <= 1.0 {
        return x;
    }
    if x >= 2.0 {
        // ζ(τ) + ζ(3 − τ) = 1 on [1, 2], so the transition contributes 1/2.
        return 1.5;
    }
    let tab = table();
    let h = 1.0 / TABLE_INTERVALS as f64;
    let pos = (x - 1.0) * TABLE_INTERVALS as f64;
    let k = (pos.floor() as usize).min(TABLE_INTERVALS - 1);
    let t = pos - k as f64;
    let (t2, t3) = (t * t, t * t * t);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * tab.values[k]
        + h10 * h * tab.slopes[k]
        + h01 * tab.values[k + 1]
        + h11 * h * tab.slopes[k + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson with many panels, independent of the table path.
    fn simpson_oracle(x: f64) -> f64 {
        if x <= 1.0 {
            return x;
        }
        let n = 200_000;
        let h = (x - 1.0) / n as f64;
        let mut sum = cutoff(1.0) + cutoff(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * cutoff(1.0 + i as f64 * h);
        }
        1.0 + sum * h / 3.0
    }

    #[test]
    fn identity_examples() {
        assert_eq!(sigma_eval(5.0, SigmaSpec::Identity).unwrap(), 5.0);
        assert_eq!(sigma_prime(7.0, SigmaSpec::Identity).unwrap(), 1.0);
        assert_eq!(sigma_eval(0.0, SigmaSpec::Identity).unwrap(), 0.0);
    }

    #[test]
    fn mollified_examples() {
        let half = SigmaSpec::mollified(0.5).unwrap();
        assert_eq!(sigma_eval(1.5, half).unwrap(), 1.5);
        assert_eq!(sigma_eval(0.0, half).unwrap(), 0.0);

        // ε = 1 sits on the closed end of the admissible range; evaluation
        // itself is well defined there.
        let one = SigmaSpec::Mollified { epsilon: 1.0 };
        assert_eq!(one.value(3.0), one.value(2.0));
        assert_eq!(one.derivative(0.5), 1.0);
        assert_eq!(one.derivative(10.0), 0.0);
    }

    #[test]
    fn negative_argument_is_domain_error() {
        assert!(matches!(
            sigma_eval(-1e-3, SigmaSpec::Identity),
            Err(Error::Domain(_))
        ));
        assert!(sigma_prime(-2.0, SigmaSpec::Mollified { epsilon: 0.1 }).is_err());
        assert!(sigma_eval(f64::NAN, SigmaSpec::Identity).is_err());
    }

    #[test]
    fn epsilon_outside_unit_interval_rejected() {
        assert!(SigmaSpec::mollified(0.0).is_err());
        assert!(SigmaSpec::mollified(1.0).is_err());
        assert!(SigmaSpec::mollified(-0.3).is_err());
    }

    #[test]
    fn cutoff_is_a_symmetric_smooth_step() {
        for i in 0..=100 {
            let tau = 1.0 + i as f64 / 100.0;
            let sum = cutoff(tau) + cutoff(3.0 - tau);
            assert!((sum - 1.0).abs() < 1e-15, "tau={tau}");
        }
        assert_eq!(cutoff(1.5), 0.5);
    }

    #[test]
    fn cutoff_derivative_matches_finite_differences() {
        for i in 1..40 {
            let tau = 1.0 + i as f64 / 40.0;
            let h = 1e-6;
            let fd = (cutoff(tau + h) - cutoff(tau - h)) / (2.0 * h);
            assert!((fd - cutoff_derivative(tau)).abs() < 1e-6, "tau={tau}");
        }
    }

    #[test]
    fn table_matches_independent_quadrature() {
        let mut worst: f64 = 0.0;
        for i in 0..=257 {
            let x = 1.0 + i as f64 / 257.0;
            worst = worst.max((cutoff_integral(x) - simpson_oracle(x)).abs());
        }
        assert!(worst < 1e-10, "worst interpolation error {worst:e}");
        assert!((table().values[TABLE_INTERVALS] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn plateau_value_is_three_halves_over_epsilon() {
        let eps = 0.1;
        let spec = SigmaSpec::Mollified { epsilon: eps };
        assert!((spec.value(25.0) - 15.0).abs() < 1e-12);
        assert!((spec.value(19.999_999_999) - 15.0).abs() < 1e-9);
        assert_eq!(spec.value(10.0), 10.0);
    }
}
