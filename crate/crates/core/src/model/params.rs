use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seventeen model constants. All must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub d_u: f64,
    pub d_v: f64,
    pub d_w: f64,
    pub d_z: f64,
    pub chi_u: f64,
    pub chi_z: f64,
    pub gamma_u: f64,
    pub gamma_v: f64,
    pub gamma_w: f64,
    pub mu_v: f64,
    pub mu_w: f64,
    pub alpha_w: f64,
    pub alpha_z: f64,
    pub delta_u: f64,
    pub delta_z: f64,
    pub rho_v: f64,
    pub beta_u: f64,
}

impl Params {
    pub const NAMES: [&'static str; 17] = [
        "d_u", "d_v", "d_w", "d_z", "chi_u", "chi_z", "gamma_u", "gamma_v", "gamma_w", "mu_v",
        "mu_w", "alpha_w", "alpha_z", "delta_u", "delta_z", "rho_v", "beta_u",
    ];

    /// Every constant equal to one.
    pub fn unit() -> Self {
        Params::from_values([1.0; 17])
    }

    pub fn from_values(v: [f64; 17]) -> Self {
        Params {
            d_u: v[0],
            d_v: v[1],
            d_w: v[2],
            d_z: v[3],
            chi_u: v[4],
            chi_z: v[5],
            gamma_u: v[6],
            gamma_v: v[7],
            gamma_w: v[8],
            mu_v: v[9],
            mu_w: v[10],
            alpha_w: v[11],
            alpha_z: v[12],
            delta_u: v[13],
            delta_z: v[14],
            rho_v: v[15],
            beta_u: v[16],
        }
    }

    pub fn values(&self) -> [f64; 17] {
        [
            self.d_u,
            self.d_v,
            self.d_w,
            self.d_z,
            self.chi_u,
            self.chi_z,
            self.gamma_u,
            self.gamma_v,
            self.gamma_w,
            self.mu_v,
            self.mu_w,
            self.alpha_w,
            self.alpha_z,
            self.delta_u,
            self.delta_z,
            self.rho_v,
            self.beta_u,
        ]
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        let idx = Self::index_of(name)?;
        Ok(self.values()[idx])
    }

    /// Sets a constant by name. The result is not validated.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let idx = Self::index_of(name)?;
        let mut v = self.values();
        v[idx] = value;
        *self = Params::from_values(v);
        Ok(())
    }

    fn index_of(name: &str) -> Result<usize> {
        Self::NAMES
            .iter()
            .position(|&n| n == name)
            .ok_or_else(|| Error::Unknown {
                kind: "parameter",
                name: name.to_string(),
            })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in Self::NAMES.iter().zip(self.values()) {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::validation(
                    *name,
                    format!("must be a finite positive number, got {value}"),
                ));
            }
        }
        Ok(())
    }

    /// Weights of the combined mass `∫u + ∫v + a∫w + b∫z`.
    pub fn mass_weights(&self) -> [f64; 4] {
        let a = (self.gamma_u + self.gamma_v) / self.gamma_w;
        let b = self.alpha_w * (self.gamma_u + self.gamma_v) / (self.alpha_z * self.gamma_w);
        [1.0, 1.0, a, b]
    }

    /// Growth rate `c = max{ρ_v, μ_v γ_w / (γ_u + γ_v)}` of the combined mass envelope.
    pub fn mass_growth_rate(&self) -> f64 {
        self.rho_v
            .max(self.mu_v * self.gamma_w / (self.gamma_u + self.gamma_v))
    }

    pub fn max_diffusivity(&self) -> f64 {
        self.d_u.max(self.d_v).max(self.d_w).max(self.d_z)
    }

    pub fn diffusivities(&self) -> [f64; 4] {
        [self.d_u, self.d_v, self.d_w, self.d_z]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_preset_and_weights() {
        let p = Params::unit();
        p.validate().unwrap();
        assert_eq!(p.mass_weights(), [1.0, 1.0, 2.0, 2.0]);
        assert_eq!(p.mass_growth_rate(), 1.0);
    }

    #[test]
    fn validation_names_offending_constant() {
        let mut p = Params::unit();
        p.delta_u = 0.0;
        match p.validate() {
            Err(Error::Validation { name, .. }) => assert_eq!(name, "delta_u"),
            other => panic!("unexpected {other:?}"),
        }
        p.delta_u = 1.0;
        p.set("chi_z", f64::NAN).unwrap();
        assert!(p.validate().is_err());
    }

    #[test]
    fn named_access_round_trips() {
        let mut p = Params::unit();
        for (i, name) in Params::NAMES.iter().enumerate() {
            p.set(name, i as f64 + 1.0).unwrap();
        }
        for (i, name) in Params::NAMES.iter().enumerate() {
            assert_eq!(p.get(name).unwrap(), i as f64 + 1.0);
        }
        assert!(p.set("kappa", 1.0).is_err());
    }
}
