//! Browser bindings: the regularizing function, a live simulation on a
//! square grid, and the gradient inequality on user-chosen fields.

use std::f64::consts::PI;

use granuloma::error::Result;
use granuloma::functionals::{log_hessian_dissipation, quartic_quotient, DiagnosticsRow};
use granuloma::io::InitPreset;
use granuloma::model::{Grid, Kinetics, Params, SigmaSpec, Species, State};
use granuloma::timestepper::{integrate, Problem, StepConfig};
use wasm_bindgen::prelude::*;

fn js(e: granuloma::error::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn sigma_samples(epsilon: f64, s_max: f64, n: usize) -> Result<Vec<f64>> {
    let spec = if epsilon > 0.0 {
        SigmaSpec::mollified(epsilon)?
    } else {
        SigmaSpec::Identity
    };
    let n = n.max(2);
    Ok((0..n)
        .map(|k| spec.value(s_max * k as f64 / (n - 1) as f64))
        .collect())
}

/// `σ_ε` at `n` equally spaced points of `[0, s_max]`; `epsilon = 0` gives the identity.
#[wasm_bindgen]
pub fn sigma_curve(epsilon: f64, s_max: f64, n: usize) -> std::result::Result<Vec<f64>, JsError> {
    sigma_samples(epsilon, s_max, n).map_err(js)
}

fn inequality_terms(amplitude: f64, mode: u32, cells: usize) -> Result<[f64; 3]> {
    let grid = Grid::new_2d(cells, cells, 1.0, 1.0)?;
    let k = mode as f64;
    let phi = grid.sample(|x, y| 1.0 + amplitude * (k * PI * x).cos() * (k * PI * y).cos());
    let lhs = quartic_quotient(&phi, &grid)?;
    let hess = log_hessian_dissipation(&phi, &grid)?;
    let bound = (2.0 + 2f64.sqrt()).powi(2) * hess;
    Ok([lhs, bound, if bound > 0.0 { lhs / bound } else { 0.0 }])
}

/// `[∫|∇φ|⁴/φ³, (2+√2)² ∫φ|D² log φ|², ratio]` for
/// `φ = 1 + a cos(kπx) cos(kπy)` on the unit square, `|a| < 1`.
#[wasm_bindgen]
pub fn inequality_ratio(
    amplitude: f64,
    mode: u32,
    cells: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    inequality_terms(amplitude, mode, cells)
        .map(|t| t.to_vec())
        .map_err(js)
}

/// A granuloma-like run on the unit square, advanced on demand.
#[wasm_bindgen]
pub struct Simulation {
    problem: Problem,
    state: State,
    step: StepConfig,
}

impl Simulation {
    fn build(cells: usize, chi: f64, epsilon: f64) -> Result<Self> {
        let grid = Grid::new_2d(cells, cells, 1.0, 1.0)?;
        let mut params = Params::unit();
        params.set("chi_u", chi)?;
        params.set("chi_z", chi)?;
        let sigma = if epsilon > 0.0 {
            SigmaSpec::mollified(epsilon)?
        } else {
            SigmaSpec::Identity
        };
        let problem = Problem::new(grid, params, Kinetics::Identity, sigma)?;
        let state = InitPreset::GaussianBumps {
            background: [1.0, 0.1, 0.1, 0.5],
            peak: [4.0, 3.0, 2.0, 3.0],
            width: 0.12,
            center: None,
        }
        .build(&grid, &params)?;
        let step = StepConfig {
            dt_init: 1e-4,
            dt_max: 2e-3,
            ..StepConfig::default()
        };
        Ok(Simulation {
            problem,
            state,
            step,
        })
    }

    fn advance_by(&mut self, span: f64) -> Result<f64> {
        let cfg = StepConfig {
            t_end: self.state.t + span,
            ..self.step
        };
        self.state = integrate(self.state.clone(), &self.problem, &cfg, &mut [])?;
        Ok(self.state.t)
    }

    fn row(&self) -> Result<DiagnosticsRow> {
        DiagnosticsRow::compute(
            &self.state,
            &self.problem.params,
            self.problem.sigma,
            &self.problem.grid,
            0.0,
        )
    }
}

#[wasm_bindgen]
impl Simulation {
    /// `cells × cells` grid with `χ_u = χ_z = chi`; `epsilon = 0` runs the unregularized system.
    #[wasm_bindgen(constructor)]
    pub fn new(cells: usize, chi: f64, epsilon: f64) -> std::result::Result<Simulation, JsError> {
        Self::build(cells, chi, epsilon).map_err(js)
    }

    /// Integrates for `span` time units and returns the new time.
    pub fn advance(&mut self, span: f64) -> std::result::Result<f64, JsError> {
        self.advance_by(span).map_err(js)
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn cells(&self) -> usize {
        self.problem.grid.nx()
    }

    /// Cell values of `u`, `v`, `w` or `z`, row-major with `x` fastest.
    pub fn field(&self, name: &str) -> std::result::Result<Vec<f64>, JsError> {
        let sp = Species::from_name(name).map_err(js)?;
        Ok(self.state.field(sp).to_vec())
    }

    /// The current diagnostics row as a JSON object.
    pub fn diagnostics(&self) -> std::result::Result<String, JsError> {
        let row = self.row().map_err(js)?;
        let map: serde_json::Map<String, serde_json::Value> = DiagnosticsRow::COLUMNS
            .iter()
            .zip(row.values())
            .map(|(k, v)| (k.to_string(), serde_json::Value::from(v)))
            .collect();
        Ok(serde_json::Value::Object(map).to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_curve_is_identity_near_zero_and_bounded() {
        let s = sigma_samples(0.1, 20.0, 201).unwrap();
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.1).abs() < 1e-15);
        assert!(s.windows(2).all(|w| w[1] >= w[0]));
        assert!(*s.last().unwrap() < 20.0);
        let id = sigma_samples(0.0, 20.0, 3).unwrap();
        assert_eq!(id, vec![0.0, 10.0, 20.0]);
    }

    #[test]
    fn inequality_ratio_stays_below_one() {
        for a in [0.1, 0.5, 0.9] {
            for k in 1..4 {
                let [lhs, bound, r] = inequality_terms(a, k, 64).unwrap();
                assert!(lhs > 0.0 && bound > 0.0);
                assert!(r < 1.0, "a={a} k={k} ratio {r}");
            }
        }
        assert_eq!(inequality_terms(0.0, 1, 16).unwrap()[2], 0.0);
    }

    #[test]
    fn simulation_advances_and_stays_positive() {
        let mut sim = Simulation::build(24, 2.0, 0.1).unwrap();
        let m0 = sim.row().unwrap().y_mass;
        let t = sim.advance_by(0.1).unwrap();
        assert!((t - 0.1).abs() < 1e-12);
        for sp in Species::ALL {
            assert!(sim.state.field(sp).iter().all(|x| *x >= 0.0));
        }
        let row = sim.row().unwrap();
        assert!(row.y_mass.is_finite() && row.y_mass > 0.0 && m0 > 0.0);
        assert_eq!(sim.cells(), 24);
    }
}
