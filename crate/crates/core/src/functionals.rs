//! Discrete integral quantities: masses, entropies, Dirichlet quotients, the two
//! quasi-energies and their dissipation terms.
//!
//! Every integral is the midpoint rule over cells, so weighted combinations of
//! these outputs agree exactly with the same combinations of masses.

use serde::{Deserialize, Serialize};

use crate::discretization::{check_positive, d2_log_frobenius, gradient_sq_cells};
use crate::error::{Error, Result};
use crate::model::{Grid, InitBudget, Params, SigmaSpec, State};

/// Argument floor inside the logarithm of [`entropy`].
pub const ENTROPY_FLOOR: f64 = 1e-300;

#[inline]
fn integrate_cells(values: impl Iterator<Item = f64>, grid: &Grid) -> f64 {
    values.sum::<f64>() * grid.cell_volume()
}

pub fn mass(field: &[f64], grid: &Grid) -> Result<f64> {
    grid.check(field)?;
    Ok(integrate_cells(field.iter().copied(), grid))
}

pub fn sup_norm(field: &[f64], grid: &Grid) -> Result<f64> {
    grid.check(field)?;
    Ok(field.iter().fold(0.0, |m, x| m.max(x.abs())))
}

fn combine_masses(masses: [f64; 4], params: &Params) -> f64 {
    let w = params.mass_weights();
    w[0] * masses[0] + w[1] * masses[1] + w[2] * masses[2] + w[3] * masses[3]
}

/// `∫u + ∫v + ((γ_u+γ_v)/γ_w)∫w + (α_w(γ_u+γ_v)/(α_zγ_w))∫z`.
pub fn combined_mass(state: &State, params: &Params, grid: &Grid) -> Result<f64> {
    let masses = [
        mass(&state.u, grid)?,
        mass(&state.v, grid)?,
        mass(&state.w, grid)?,
        mass(&state.z, grid)?,
    ];
    Ok(combine_masses(masses, params))
}

/// `∫(φ ln φ − φ)` with `0 ln 0 = 0`.
pub fn entropy(field: &[f64], grid: &Grid, floor: f64) -> Result<f64> {
    grid.check(field)?;
    if let Some(cell) = field.iter().position(|x| !(*x >= 0.0)) {
        return Err(Error::NotPositive {
            field: "entropy argument".into(),
            cell,
            value: field[cell],
        });
    }
    Ok(integrate_cells(
        field.iter().map(|&x| x * x.max(floor).ln() - x),
        grid,
    ))
}

/// `∫|∇φ|²/φ` for a strictly positive field.
pub fn dirichlet_quotient(field: &[f64], grid: &Grid) -> Result<f64> {
    check_positive("field", field)?;
    let g2 = gradient_sq_cells(field, grid)?;
    Ok(integrate_cells(
        g2.iter().zip(field).map(|(g, x)| g / x),
        grid,
    ))
}

/// `∫|∇φ|⁴/φ³` for a strictly positive field.
pub fn quartic_quotient(field: &[f64], grid: &Grid) -> Result<f64> {
    check_positive("field", field)?;
    let g2 = gradient_sq_cells(field, grid)?;
    Ok(integrate_cells(
        g2.iter().zip(field).map(|(g, x)| g * g / (x * x * x)),
        grid,
    ))
}

/// `∫φ|D² ln φ|²` for a strictly positive field.
pub fn log_hessian_dissipation(field: &[f64], grid: &Grid) -> Result<f64> {
    let d2 = d2_log_frobenius(field, grid)?;
    Ok(integrate_cells(
        d2.iter().zip(field).map(|(h, x)| h * x),
        grid,
    ))
}

/// `∫(|∇φ|²/φ) σ(c)`.
pub fn weighted_quotient(
    field: &[f64],
    weight: &[f64],
    sigma: SigmaSpec,
    grid: &Grid,
) -> Result<f64> {
    check_positive("field", field)?;
    grid.check(weight)?;
    let g2 = gradient_sq_cells(field, grid)?;
    let mut sum = 0.0;
    for ((g, x), &c) in g2.iter().zip(field).zip(weight) {
        sum += g / x * crate::model::sigma_eval(c, sigma)?;
    }
    Ok(sum * grid.cell_volume())
}

/// `∫(u ln u − u) + (χ_u/2γ_v)∫|∇v|²/v + (μ_vχ_u/2D_wγ_v)∫(w ln w − w)`.
pub fn energy1(state: &State, params: &Params, grid: &Grid) -> Result<f64> {
    let q = dirichlet_quotient(&state.v, grid)?;
    energy1_from(state, params, grid, q)
}

fn energy1_from(state: &State, p: &Params, grid: &Grid, quotient_v: f64) -> Result<f64> {
    Ok(entropy(&state.u, grid, ENTROPY_FLOOR)?
        + p.chi_u / (2.0 * p.gamma_v) * quotient_v
        + p.mu_v * p.chi_u / (2.0 * p.d_w * p.gamma_v) * entropy(&state.w, grid, ENTROPY_FLOOR)?)
}

/// `∫(z ln z − z) + (χ_z/2α_w)∫|∇w|²/w`.
pub fn energy2(state: &State, params: &Params, grid: &Grid) -> Result<f64> {
    let q = dirichlet_quotient(&state.w, grid)?;
    energy2_from(state, params, grid, q)
}

fn energy2_from(state: &State, p: &Params, grid: &Grid, quotient_w: f64) -> Result<f64> {
    Ok(entropy(&state.z, grid, ENTROPY_FLOOR)? + p.chi_z / (2.0 * p.alpha_w) * quotient_w)
}

/// The eight dissipation integrals of the two energy inequalities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Dissipation {
    /// `∫|∇u|²/u`
    pub grad_u: f64,
    /// `∫v|D² ln v|²`
    pub hess_v: f64,
    /// `∫(|∇v|²/v) σ(u)`
    pub sigv_u: f64,
    /// `∫|∇z|²/z`
    pub grad_z: f64,
    /// `∫w|D² ln w|²`
    pub hess_w: f64,
    /// `∫(|∇w|²/w) σ(z)`
    pub sigw_z: f64,
    /// `∫|∇v|⁴/v³`
    pub quartic_v: f64,
    /// `∫|∇w|⁴/w³`
    pub quartic_w: f64,
}

impl Dissipation {
    pub const NAMES: [&'static str; 8] = [
        "diss_grad_u",
        "diss_hess_v",
        "diss_sigv_u",
        "diss_grad_z",
        "diss_hess_w",
        "diss_sigw_z",
        "diss_quartic_v",
        "diss_quartic_w",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.grad_u,
            self.hess_v,
            self.sigv_u,
            self.grad_z,
            self.hess_w,
            self.sigw_z,
            self.quartic_v,
            self.quartic_w,
        ]
    }

    pub fn from_values(v: [f64; 8]) -> Self {
        Dissipation {
            grad_u: v[0],
            hess_v: v[1],
            sigv_u: v[2],
            grad_z: v[3],
            hess_w: v[4],
            sigw_z: v[5],
            quartic_v: v[6],
            quartic_w: v[7],
        }
    }
}

/// All eight dissipation integrals; every field involved must be strictly positive.
pub fn dissipation_ledger(
    state: &State,
    _params: &Params,
    sigma: SigmaSpec,
    grid: &Grid,
) -> Result<Dissipation> {
    let tag = |name: &'static str| {
        move |e: Error| match e {
            Error::NotPositive { cell, value, .. } => Error::NotPositive {
                field: name.to_string(),
                cell,
                value,
            },
            other => other,
        }
    };
    Ok(Dissipation {
        grad_u: dirichlet_quotient(&state.u, grid).map_err(tag("u in diss_grad_u"))?,
        hess_v: log_hessian_dissipation(&state.v, grid).map_err(tag("v in diss_hess_v"))?,
        sigv_u: weighted_quotient(&state.v, &state.u, sigma, grid)
            .map_err(tag("v in diss_sigv_u"))?,
        grad_z: dirichlet_quotient(&state.z, grid).map_err(tag("z in diss_grad_z"))?,
        hess_w: log_hessian_dissipation(&state.w, grid).map_err(tag("w in diss_hess_w"))?,
        sigw_z: weighted_quotient(&state.w, &state.z, sigma, grid)
            .map_err(tag("w in diss_sigw_z"))?,
        quartic_v: quartic_quotient(&state.v, grid).map_err(tag("v in diss_quartic_v"))?,
        quartic_w: quartic_quotient(&state.w, grid).map_err(tag("w in diss_quartic_w"))?,
    })
}

/// Like `f(field)`, but an identically zero field contributes zero.
///
/// Quotients and log-Hessians of the zero field are taken as zero, their limit
/// along `c·φ` as `c → 0`. Fields that are zero only in part are still rejected.
fn zero_or<F: Fn(&[f64]) -> Result<f64>>(field: &[f64], f: F) -> Result<f64> {
    if field.iter().all(|&x| x == 0.0) {
        Ok(0.0)
    } else {
        f(field)
    }
}

/// One line of `diagnostics.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: [f64; 4],
    pub y_mass: f64,
    pub linf: [f64; 4],
    pub energy1: f64,
    pub energy2: f64,
    pub dissipation: Dissipation,
    pub dt: f64,
}

impl DiagnosticsRow {
    pub const COLUMNS: [&'static str; 21] = [
        "t",
        "mass_u",
        "mass_v",
        "mass_w",
        "mass_z",
        "y_mass",
        "linf_u",
        "linf_v",
        "linf_w",
        "linf_z",
        "energy1",
        "energy2",
        "diss_grad_u",
        "diss_hess_v",
        "diss_sigv_u",
        "diss_grad_z",
        "diss_hess_w",
        "diss_sigw_z",
        "diss_quartic_v",
        "diss_quartic_w",
        "dt",
    ];

    /// Evaluates every column at `state`; `dt` is the last accepted step.
    ///
    /// A species that vanishes identically contributes zero to the quotient
    /// and Hessian terms, so disease-free states have well-defined rows.
    pub fn compute(
        state: &State,
        params: &Params,
        sigma: SigmaSpec,
        grid: &Grid,
        dt: f64,
    ) -> Result<Self> {
        state.validate(grid)?;
        let mass = [
            mass(&state.u, grid)?,
            mass(&state.v, grid)?,
            mass(&state.w, grid)?,
            mass(&state.z, grid)?,
        ];
        let linf = [
            sup_norm(&state.u, grid)?,
            sup_norm(&state.v, grid)?,
            sup_norm(&state.w, grid)?,
            sup_norm(&state.z, grid)?,
        ];
        let qv = zero_or(&state.v, |f| dirichlet_quotient(f, grid))?;
        let qw = zero_or(&state.w, |f| dirichlet_quotient(f, grid))?;
        let dissipation = Dissipation {
            grad_u: zero_or(&state.u, |f| dirichlet_quotient(f, grid))?,
            hess_v: zero_or(&state.v, |f| log_hessian_dissipation(f, grid))?,
            sigv_u: zero_or(&state.v, |f| weighted_quotient(f, &state.u, sigma, grid))?,
            grad_z: zero_or(&state.z, |f| dirichlet_quotient(f, grid))?,
            hess_w: zero_or(&state.w, |f| log_hessian_dissipation(f, grid))?,
            sigw_z: zero_or(&state.w, |f| weighted_quotient(f, &state.z, sigma, grid))?,
            quartic_v: zero_or(&state.v, |f| quartic_quotient(f, grid))?,
            quartic_w: zero_or(&state.w, |f| quartic_quotient(f, grid))?,
        };
        Ok(DiagnosticsRow {
            t: state.t,
            mass,
            y_mass: combine_masses(mass, params),
            linf,
            energy1: energy1_from(state, params, grid, qv)?,
            energy2: energy2_from(state, params, grid, qw)?,
            dissipation,
            dt,
        })
    }

    pub fn values(&self) -> [f64; 21] {
        let d = self.dissipation.values();
        [
            self.t,
            self.mass[0],
            self.mass[1],
            self.mass[2],
            self.mass[3],
            self.y_mass,
            self.linf[0],
            self.linf[1],
            self.linf[2],
            self.linf[3],
            self.energy1,
            self.energy2,
            d[0],
            d[1],
            d[2],
            d[3],
            d[4],
            d[5],
            d[6],
            d[7],
            self.dt,
        ]
    }

    pub fn from_values(v: [f64; 21]) -> Self {
        DiagnosticsRow {
            t: v[0],
            mass: [v[1], v[2], v[3], v[4]],
            y_mass: v[5],
            linf: [v[6], v[7], v[8], v[9]],
            energy1: v[10],
            energy2: v[11],
            dissipation: Dissipation::from_values([
                v[12], v[13], v[14], v[15], v[16], v[17], v[18], v[19],
            ]),
            dt: v[20],
        }
    }
}

/// Initial-data quantities bounded by `A`, with `A` set one unit above their sum.
pub fn init_budget(state: &State, grid: &Grid) -> Result<InitBudget> {
    state.validate(grid)?;
    let l3_w = (integrate_cells(state.w.iter().map(|x| x * x * x), grid)).cbrt();
    let mut b = InitBudget {
        a_bound: 0.0,
        entropy_u: integrate_cells(state.u.iter().map(|&x| x * x.max(ENTROPY_FLOOR).ln()), grid),
        sup_v: sup_norm(&state.v, grid)?,
        l3_w,
        entropy_z: integrate_cells(state.z.iter().map(|&x| x * x.max(ENTROPY_FLOOR).ln()), grid),
        quotient_v: zero_or(&state.v, |f| dirichlet_quotient(f, grid))?,
        quotient_w: zero_or(&state.w, |f| dirichlet_quotient(f, grid))?,
    };
    b.a_bound = b.total().max(0.0) + 1.0;
    Ok(b)
}

/// `(∫φ^{(n+2)/n} + ∫|∇φ|^{(n+2)/(n+1)}) / (∫|∇φ|²/φ + 1)` on an `n`-dimensional grid.
pub fn interpolation_ratio(field: &[f64], grid: &Grid) -> Result<f64> {
    let n = grid.dim() as f64;
    let q = dirichlet_quotient(field, grid)?;
    let g2 = gradient_sq_cells(field, grid)?;
    let p1 = (n + 2.0) / n;
    let p2 = (n + 2.0) / (n + 1.0);
    let a = integrate_cells(field.iter().map(|x| x.powf(p1)), grid);
    let b = integrate_cells(g2.iter().map(|g| g.powf(0.5 * p2)), grid);
    Ok((a + b) / (q + 1.0))
}

/// Spatial integrands of the ε-uniform space-time bounds at exponent shift `η`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeIntegrands {
    /// `∫u^{5/3}`
    pub u_53: f64,
    /// `∫|∇u|^{5/4}`
    pub grad_u_54: f64,
    /// `∫|∇v|⁴`
    pub grad_v_4: f64,
    /// `∫w^{5−η}`
    pub w_5eta: f64,
    /// `∫|∇w|^{5/2−η}`
    pub grad_w_52eta: f64,
    /// `∫z^{5/3}`
    pub z_53: f64,
    /// `∫|∇z|^{5/4}`
    pub grad_z_54: f64,
    /// `∫(uv)^{5/3}`
    pub uv_53: f64,
    /// `∫(wz)^{5/4−η}`
    pub wz_54eta: f64,
}

impl SpaceTimeIntegrands {
    pub const NAMES: [&'static str; 9] = [
        "u^(5/3)",
        "|grad u|^(5/4)",
        "|grad v|^4",
        "w^(5-eta)",
        "|grad w|^(5/2-eta)",
        "z^(5/3)",
        "|grad z|^(5/4)",
        "(uv)^(5/3)",
        "(wz)^(5/4-eta)",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.u_53,
            self.grad_u_54,
            self.grad_v_4,
            self.w_5eta,
            self.grad_w_52eta,
            self.z_53,
            self.grad_z_54,
            self.uv_53,
            self.wz_54eta,
        ]
    }

    pub fn compute(state: &State, grid: &Grid, eta: f64) -> Result<Self> {
        state.validate(grid)?;
        let pow_sum = |f: &[f64], p: f64| integrate_cells(f.iter().map(|x| x.powf(p)), grid);
        let grad_pow = |f: &[f64], p: f64| -> Result<f64> {
            let g2 = gradient_sq_cells(f, grid)?;
            Ok(integrate_cells(g2.iter().map(|g| g.powf(0.5 * p)), grid))
        };
        let prod_pow = |a: &[f64], b: &[f64], p: f64| {
            integrate_cells(a.iter().zip(b).map(|(x, y)| (x * y).powf(p)), grid)
        };
        Ok(SpaceTimeIntegrands {
            u_53: pow_sum(&state.u, 5.0 / 3.0),
            grad_u_54: grad_pow(&state.u, 1.25)?,
            grad_v_4: grad_pow(&state.v, 4.0)?,
            w_5eta: pow_sum(&state.w, 5.0 - eta),
            grad_w_52eta: grad_pow(&state.w, 2.5 - eta)?,
            z_53: pow_sum(&state.z, 5.0 / 3.0),
            grad_z_54: grad_pow(&state.z, 1.25)?,
            uv_53: prod_pow(&state.u, &state.v, 5.0 / 3.0),
            wz_54eta: prod_pow(&state.w, &state.z, 1.25 - eta),
        })
    }
}

/// Trapezoid rule in time over `(t_k, y_k)` samples.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}
