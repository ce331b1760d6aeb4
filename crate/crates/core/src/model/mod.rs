//! Domain types: constants, mesh, state, and the pluggable nonlinearities.

mod grid;
mod params;
mod sigma;
mod state;

use serde::{Deserialize, Serialize};

pub use grid::{Grid, MIN_CELLS};
pub use params::Params;
pub use sigma::{cutoff, cutoff_derivative, cutoff_integral, sigma_eval, sigma_prime, SigmaSpec};
pub use state::{Species, State};

use crate::error::{Error, Result};

/// T-cell activation law `f`, constrained by `0 ≤ f(w) ≤ w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kinetics {
    Identity,
    /// `f(w) = w / (β_z + w)`.
    LogSigmoidal {
        beta_z: f64,
    },
}

impl Default for Kinetics {
    fn default() -> Self {
        Kinetics::Identity
    }
}

impl Kinetics {
    /// The saturating law; `beta_z ≥ 1` keeps `f(w) ≤ w` for every `w ≥ 0`.
    pub fn log_sigmoidal(beta_z: f64) -> Result<Self> {
        let k = Kinetics::LogSigmoidal { beta_z };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kinetics::Identity => Ok(()),
            Kinetics::LogSigmoidal { beta_z } if beta_z >= 1.0 && beta_z.is_finite() => Ok(()),
            Kinetics::LogSigmoidal { beta_z } => Err(Error::validation(
                "beta_z",
                format!("log_sigmoidal activation needs beta_z >= 1, got {beta_z}"),
            )),
        }
    }

    #[inline]
    pub fn apply(&self, w: f64) -> f64 {
        match *self {
            Kinetics::Identity => w,
            Kinetics::LogSigmoidal { beta_z } => w / (beta_z + w),
        }
    }

    pub fn derivative(&self, w: f64) -> f64 {
        match *self {
            Kinetics::Identity => 1.0,
            Kinetics::LogSigmoidal { beta_z } => beta_z / ((beta_z + w) * (beta_z + w)),
        }
    }
}

/// `f(w)` for `w ≥ 0`.
pub fn f_eval(w: f64, kinetics: Kinetics) -> Result<f64> {
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("activation evaluated at w = {w}")));
    }
    Ok(kinetics.apply(w))
}

/// The eleven kinetic terms at one point, signed as they enter the equations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KineticTerms {
    /// `−γ_u σ(u) v`
    pub u_infection: f64,
    /// `−δ_u u`
    pub u_death: f64,
    /// `β_u`
    pub u_production: f64,
    /// `ρ_v v`
    pub v_replication: f64,
    /// `−γ_v σ(u) v`
    pub v_uptake: f64,
    /// `μ_v w`
    pub v_release: f64,
    /// `γ_w σ(u) v`
    pub w_conversion: f64,
    /// `−α_w w σ(z)`
    pub w_necrosis: f64,
    /// `−μ_w w`
    pub w_death: f64,
    /// `α_z f(w) σ(z)`
    pub z_activation: f64,
    /// `−δ_z z`
    pub z_death: f64,
}

impl KineticTerms {
    pub const NAMES: [&'static str; 11] = [
        "u_infection",
        "u_death",
        "u_production",
        "v_replication",
        "v_uptake",
        "v_release",
        "w_conversion",
        "w_necrosis",
        "w_death",
        "z_activation",
        "z_death",
    ];

    #[inline]
    pub fn at([u, v, w, z]: [f64; 4], p: &Params, kinetics: Kinetics, sigma: SigmaSpec) -> Self {
        let su = sigma.value(u);
        let sz = sigma.value(z);
        KineticTerms {
            u_infection: -p.gamma_u * su * v,
            u_death: -p.delta_u * u,
            u_production: p.beta_u,
            v_replication: p.rho_v * v,
            v_uptake: -p.gamma_v * su * v,
            v_release: p.mu_v * w,
            w_conversion: p.gamma_w * su * v,
            w_necrosis: -p.alpha_w * w * sz,
            w_death: -p.mu_w * w,
            z_activation: p.alpha_z * kinetics.apply(w) * sz,
            z_death: -p.delta_z * z,
        }
    }

    /// Net rate per species.
    #[inline]
    pub fn rates(&self) -> [f64; 4] {
        [
            self.u_infection + self.u_death + self.u_production,
            self.v_replication + self.v_uptake + self.v_release,
            self.w_conversion + self.w_necrosis + self.w_death,
            self.z_activation + self.z_death,
        ]
    }

    pub fn values(&self) -> [f64; 11] {
        [
            self.u_infection,
            self.u_death,
            self.u_production,
            self.v_replication,
            self.v_uptake,
            self.v_release,
            self.w_conversion,
            self.w_necrosis,
            self.w_death,
            self.z_activation,
            self.z_death,
        ]
    }

    pub fn add_scaled(&mut self, other: &KineticTerms, factor: f64) {
        self.u_infection += factor * other.u_infection;
        self.u_death += factor * other.u_death;
        self.u_production += factor * other.u_production;
        self.v_replication += factor * other.v_replication;
        self.v_uptake += factor * other.v_uptake;
        self.v_release += factor * other.v_release;
        self.w_conversion += factor * other.w_conversion;
        self.w_necrosis += factor * other.w_necrosis;
        self.w_death += factor * other.w_death;
        self.z_activation += factor * other.z_activation;
        self.z_death += factor * other.z_death;
    }
}

/// Pointwise kinetic right-hand sides of the four equations (no diffusion, no taxis).
pub fn reaction_rhs(
    state: &State,
    grid: &Grid,
    params: &Params,
    kinetics: Kinetics,
    sigma: SigmaSpec,
) -> Result<[Vec<f64>; 4]> {
    state.validate(grid)?;
    let n = grid.len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for c in 0..n {
        let terms = KineticTerms::at(
            [state.u[c], state.v[c], state.w[c], state.z[c]],
            params,
            kinetics,
            sigma,
        );
        for (slot, r) in out.iter_mut().zip(terms.rates()) {
            slot[c] = r;
        }
    }
    Ok(out)
}

/// Bound `A` on the entropy, sup-norm and Dirichlet quantities of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitBudget {
    pub a_bound: f64,
    /// `∫ u₀ ln u₀`
    pub entropy_u: f64,
    /// `‖v₀‖∞`
    pub sup_v: f64,
    /// `‖w₀‖_{L³}`
    pub l3_w: f64,
    /// `∫ z₀ ln z₀`
    pub entropy_z: f64,
    /// `∫ |∇v₀|²/v₀`
    pub quotient_v: f64,
    /// `∫ |∇w₀|²/w₀`
    pub quotient_w: f64,
}

impl InitBudget {
    pub fn contributions(&self) -> [f64; 6] {
        [
            self.entropy_u,
            self.sup_v,
            self.l3_w,
            self.entropy_z,
            self.quotient_v,
            self.quotient_w,
        ]
    }

    pub fn total(&self) -> f64 {
        self.contributions().iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_bound > 0.0) {
            return Err(Error::validation("a_bound", "must be positive"));
        }
        if self.total() > self.a_bound {
            return Err(Error::validation(
                "a_bound",
                format!("contributions sum to {} > {}", self.total(), self.a_bound),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activation_examples() {
        assert_eq!(f_eval(3.0, Kinetics::Identity).unwrap(), 3.0);
        let k = Kinetics::log_sigmoidal(2.0).unwrap();
        assert_eq!(f_eval(0.0, k).unwrap(), 0.0);
        assert_eq!(f_eval(2.0, k).unwrap(), 0.5);
        assert!(f_eval(-1.0, k).is_err());
    }

    #[test]
    fn small_beta_z_rejected_at_construction() {
        assert!(Kinetics::log_sigmoidal(0.5).is_err());
        assert!(Kinetics::log_sigmoidal(1.0).is_ok());
    }

    #[test]
    fn activation_bounded_and_smooth() {
        for k in [
            Kinetics::Identity,
            Kinetics::LogSigmoidal { beta_z: 1.0 },
            Kinetics::LogSigmoidal { beta_z: 7.5 },
        ] {
            for i in 0..200 {
                let w = i as f64 * 0.37;
                let f = k.apply(w);
                assert!(f >= 0.0 && f <= w + 1e-15);
                if w > 0.0 {
                    let h = 1e-5 * w.max(1.0);
                    let fd = (k.apply(w + h) - k.apply(w - h.min(w))) / (h + h.min(w));
                    let exact = k.derivative(w);
                    assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3), "w={w}");
                }
            }
        }
    }

    #[test]
    fn reaction_rhs_examples() {
        let g = Grid::unit(1, 8).unwrap();
        let p = Params::unit();
        let sigma = SigmaSpec::Identity;

        let free = State::homogeneous(&g, [p.beta_u / p.delta_u, 0.0, 0.0, 0.0]).unwrap();
        let r = reaction_rhs(&free, &g, &p, Kinetics::Identity, sigma).unwrap();
        assert!(r.iter().flatten().all(|&x| x == 0.0));

        let ones = State::homogeneous(&g, [1.0; 4]).unwrap();
        let r = reaction_rhs(&ones, &g, &p, Kinetics::Identity, sigma).unwrap();
        assert_eq!([r[0][3], r[1][3], r[2][3], r[3][3]], [-1.0, 1.0, -1.0, 0.0]);

        let decay = State::homogeneous(&g, [2.0, 0.0, 3.0, 0.0]).unwrap();
        let r = reaction_rhs(&decay, &g, &p, Kinetics::Identity, sigma).unwrap();
        assert_eq!(r[2][0], -p.mu_w * 3.0);
    }

    #[test]
    fn reaction_rhs_rejects_shape_mismatch() {
        let g = Grid::unit(1, 8).unwrap();
        let mut s = State::zeros(&g);
        s.w.pop();
        assert!(matches!(
            reaction_rhs(
                &s,
                &g,
                &Params::unit(),
                Kinetics::Identity,
                SigmaSpec::Identity
            ),
            Err(Error::Shape { .. })
        ));
    }
}
