//! Conservative finite-volume operators with homogeneous Neumann boundaries.
//!
//! Every operator is assembled from face quantities. Boundary faces carry zero
//! flux, which is the same as mirroring the boundary cell into a ghost cell.

use crate::error::{Error, Result};
use crate::model::{Grid, SigmaSpec};

/// Face-centred values per axis.
///
/// `x[j * (nx + 1) + i]` is the face on the left of cell `(i, j)`;
/// `y[j * nx + i]` is the face below cell `(i, j)`. `y` is empty in 1D.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn check_nonnegative(name: &str, field: &[f64]) -> Result<()> {
    match field.iter().position(|x| !(*x >= 0.0)) {
        None => Ok(()),
        Some(cell) => Err(Error::NotPositive {
            field: name.to_string(),
            cell,
            value: field[cell],
        }),
    }
}

pub(crate) fn check_positive(name: &str, field: &[f64]) -> Result<()> {
    match field.iter().position(|x| !(*x > 0.0)) {
        None => Ok(()),
        Some(cell) => Err(Error::NotPositive {
            field: name.to_string(),
            cell,
            value: field[cell],
        }),
    }
}

/// Calls `visit(left, right, h)` for every interior face.
#[inline]
fn for_each_interior_face(grid: &Grid, mut visit: impl FnMut(usize, usize, f64)) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let hx = grid.hx();
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx - 1 {
            visit(row + i, row + i + 1, hx);
        }
    }
    if grid.dim() == 2 {
        let hy = grid.hy();
        for j in 0..ny - 1 {
            let row = j * nx;
            for i in 0..nx {
                visit(row + i, row + nx + i, hy);
            }
        }
    }
}

/// Adds `scale · Δ_h field` to `out`.
pub(crate) fn laplacian_accumulate(field: &[f64], grid: &Grid, scale: f64, out: &mut [f64]) {
    for_each_interior_face(grid, |l, r, h| {
        let flux = scale * (field[r] - field[l]) / (h * h);
        out[l] += flux;
        out[r] -= flux;
    });
}

/// Three-point (1D) or five-point (2D) Laplacian with mirror ghost cells.
pub fn laplacian_neumann(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check(field)?;
    let mut out = vec![0.0; grid.len()];
    laplacian_accumulate(field, grid, 1.0, &mut out);
    Ok(out)
}

/// Two-point face gradients; boundary faces are exactly zero.
pub fn gradient_faces(field: &[f64], grid: &Grid) -> Result<FaceFluxField> {
    grid.check(field)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let hx = grid.hx();
    let mut x = vec![0.0; (nx + 1) * ny];
    for j in 0..ny {
        for i in 1..nx {
            let c = j * nx + i;
            x[j * (nx + 1) + i] = (field[c] - field[c - 1]) / hx;
        }
    }
    let mut y = Vec::new();
    if grid.dim() == 2 {
        let hy = grid.hy();
        y = vec![0.0; nx * (ny + 1)];
        for j in 1..ny {
            for i in 0..nx {
                let c = j * nx + i;
                y[j * nx + i] = (field[c] - field[c - nx]) / hy;
            }
        }
    }
    Ok(FaceFluxField { x, y })
}

/// Cell values of |∇φ|², assembled by averaging squared face gradients to centres.
pub fn gradient_sq_cells(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check(field)?;
    let mut out = vec![0.0; grid.len()];
    for_each_interior_face(grid, |l, r, h| {
        let g = (field[r] - field[l]) / h;
        let half = 0.5 * g * g;
        out[l] += half;
        out[r] += half;
    });
    Ok(out)
}

/// Adds the upwind discretization of `−scale · χ ∇·(c σ′(c) ∇s)` to `out`.
///
/// `mobility` holds `c σ′(c)` per cell.
pub(crate) fn taxis_accumulate(
    mobility: &[f64],
    signal: &[f64],
    chi: f64,
    grid: &Grid,
    scale: f64,
    out: &mut [f64],
) {
    for_each_interior_face(grid, |l, r, h| {
        let velocity = chi * (signal[r] - signal[l]) / h;
        let upwind = if velocity > 0.0 {
            mobility[l]
        } else {
            mobility[r]
        };
        let flux = scale * upwind * velocity / h;
        out[l] -= flux;
        out[r] += flux;
    });
}

pub(crate) fn mobility_into(carrier: &[f64], sigma: SigmaSpec, out: &mut [f64]) {
    match sigma {
        SigmaSpec::Identity => out.copy_from_slice(carrier),
        _ => {
            for (m, &c) in out.iter_mut().zip(carrier) {
                *m = c * sigma.derivative(c);
            }
        }
    }
}

/// Conservative upwind discretization of `−χ ∇·(c σ′(c) ∇s)`.
///
/// The face velocity is `χ (s_R − s_L)/h`; the mobility `c σ′(c)` is taken
/// from the upwind cell.
pub fn taxis_divergence(
    carrier: &[f64],
    signal: &[f64],
    chi: f64,
    sigma: SigmaSpec,
    grid: &Grid,
) -> Result<Vec<f64>> {
    grid.check(carrier)?;
    grid.check(signal)?;
    check_nonnegative("carrier", carrier)?;
    check_nonnegative("signal", signal)?;
    let mut mobility = vec![0.0; grid.len()];
    mobility_into(carrier, sigma, &mut mobility);
    let mut out = vec![0.0; grid.len()];
    taxis_accumulate(&mobility, signal, chi, grid, 1.0, &mut out);
    Ok(out)
}

/// Largest face velocity `χ |∇s|` per axis.
pub(crate) fn max_face_velocity(signal: &[f64], chi: f64, grid: &Grid) -> [f64; 2] {
    let mut vmax = [0.0f64; 2];
    for_each_interior_face(grid, |l, r, h| {
        let axis = if r == l + 1 { 0 } else { 1 };
        let v = (chi * (signal[r] - signal[l]) / h).abs();
        if v > vmax[axis] {
            vmax[axis] = v;
        }
    });
    vmax
}

/// Squared Frobenius norm of the Hessian of `ln φ` per cell.
///
/// Mirror ghosts are used for `ln φ`; the mixed derivative uses the four-corner
/// stencil.
pub fn d2_log_frobenius(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check(field)?;
    check_positive("field", field)?;
    let logs: Vec<f64> = field.iter().map(|x| x.ln()).collect();
    let (nx, ny) = (grid.nx(), grid.ny());
    let hx = grid.hx();
    let at = |i: isize, j: isize| -> f64 {
        let ic = i.clamp(0, nx as isize - 1) as usize;
        let jc = j.clamp(0, ny as isize - 1) as usize;
        logs[jc * nx + ic]
    };
    let mut out = vec![0.0; grid.len()];
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let c = at(i, j);
            let lxx = (at(i + 1, j) - 2.0 * c + at(i - 1, j)) / (hx * hx);
            let mut norm = lxx * lxx;
            if grid.dim() == 2 {
                let hy = grid.hy();
                let lyy = (at(i, j + 1) - 2.0 * c + at(i, j - 1)) / (hy * hy);
                let lxy = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1)
                    + at(i - 1, j - 1))
                    / (4.0 * hx * hy);
                norm += lyy * lyy + 2.0 * lxy * lxy;
            }
            out[j as usize * nx + i as usize] = norm;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn weighted_sum(f: &[f64], g: &Grid) -> f64 {
        f.iter().sum::<f64>() * g.cell_volume()
    }

    #[test]
    fn constant_field_has_zero_operators() {
        for g in [Grid::unit(1, 16).unwrap(), Grid::unit(2, 8).unwrap()] {
            let f = vec![3.5; g.len()];
            assert!(laplacian_neumann(&f, &g).unwrap().iter().all(|&x| x == 0.0));
            let faces = gradient_faces(&f, &g).unwrap();
            assert!(faces.x.iter().chain(&faces.y).all(|&x| x == 0.0));
            assert!(d2_log_frobenius(&f, &g).unwrap().iter().all(|&x| x == 0.0));
            let t = taxis_divergence(&f, &f, 2.0, SigmaSpec::Identity, &g).unwrap();
            assert!(t.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn linear_field_laplacian_lives_on_the_boundary() {
        let g = Grid::unit(1, 32).unwrap();
        let f = g.sample(|x, _| x);
        let lap = laplacian_neumann(&f, &g).unwrap();
        for (i, &x) in lap.iter().enumerate() {
            if i == 0 || i == 31 {
                assert!(x.abs() > 1.0);
            } else {
                assert!(x.abs() < 1e-9, "cell {i}: {x}");
            }
        }
    }

    #[test]
    fn cosine_laplacian_is_second_order() {
        let err = |n: usize| {
            let g = Grid::unit(1, n).unwrap();
            let f = g.sample(|x, _| (PI * x).cos());
            let exact = g.sample(|x, _| -PI * PI * (PI * x).cos());
            let lap = laplacian_neumann(&f, &g).unwrap();
            lap.iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (e32, e64, e128) = (err(32), err(64), err(128));
        assert!((e64 / e128).log2() > 1.9);
        // fitted C in max error ≤ C h² is stable under refinement and near π⁴/12
        let (c64, c128) = (e64 * 64.0 * 64.0, e128 * 128.0 * 128.0);
        assert!((c64 / c128 - 1.0).abs() < 0.05, "{c64} {c128}");
        assert!(e32 * 32.0 * 32.0 < 1.05 * PI.powi(4) / 12.0);
        assert!(c128 < 1.05 * PI.powi(4) / 12.0);
    }

    #[test]
    fn face_gradients_of_cosine() {
        let g = Grid::unit(1, 128).unwrap();
        let f = g.sample(|x, _| (PI * x).cos());
        let faces = gradient_faces(&f, &g).unwrap();
        assert_eq!(faces.x[0], 0.0);
        assert_eq!(faces.x[128], 0.0);
        let h = g.hx();
        for i in 1..128 {
            let xf = i as f64 * h;
            let exact = -PI * (PI * xf).sin();
            assert!((faces.x[i] - exact).abs() < 1e-4, "face {i}");
        }
    }

    #[test]
    fn taxis_reduces_to_laplacian_of_signal_for_unit_carrier() {
        let err = |n: usize| {
            let g = Grid::unit(1, n).unwrap();
            let c = vec![1.0; n];
            let s = g.sample(|x, _| 1.0 + (PI * x).cos());
            let t = taxis_divergence(&c, &s, 0.7, SigmaSpec::Identity, &g).unwrap();
            let exact = g.sample(|x, _| 0.7 * PI * PI * (PI * x).cos());
            t.iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(128) < 1e-2);
    }

    #[test]
    fn exponential_log_hessian_vanishes_in_the_interior() {
        let g = Grid::unit(1, 64).unwrap();
        let f = g.sample(|x, _| x.exp());
        let d2 = d2_log_frobenius(&f, &g).unwrap();
        for &x in &d2[1..63] {
            assert!(x < 1e-15 * 64f64.powi(4), "{x}");
        }
        // ∂ν ln φ ≠ 0 for eˣ, so the mirror ghosts see a kink at both ends.
        assert!(d2[0] > 1.0 && d2[63] > 1.0);
    }

    #[test]
    fn quadratic_log_hessian_is_exact_in_the_interior() {
        let g = Grid::unit(1, 128).unwrap();
        let f = g.sample(|x, _| (x * x).exp());
        let d2 = d2_log_frobenius(&f, &g).unwrap();
        for &x in &d2[1..127] {
            assert!((x - 4.0).abs() < 1e-6, "{x}");
        }
        // left end is Neumann-compatible for x² as well
        assert!((d2[0] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn two_d_hessian_of_separable_quadratic() {
        // ln φ = x² + x y has Hessian [[2, 1], [1, 0]], norm² = 4 + 2.
        let g = Grid::unit(2, 32).unwrap();
        let f = g.sample(|x, y| (x * x + x * y).exp());
        let d2 = d2_log_frobenius(&f, &g).unwrap();
        for j in 1..31 {
            for i in 1..31 {
                assert!((d2[g.index(i, j)] - 6.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn nonpositive_field_reports_cell() {
        let g = Grid::unit(1, 8).unwrap();
        let mut f = vec![1.0; 8];
        f[5] = 0.0;
        match d2_log_frobenius(&f, &g) {
            Err(Error::NotPositive { cell, .. }) => assert_eq!(cell, 5),
            other => panic!("{other:?}"),
        }
        f[5] = -1.0;
        assert!(taxis_divergence(&f, &vec![1.0; 8], 1.0, SigmaSpec::Identity, &g).is_err());
    }

    #[test]
    fn operators_conserve_mass() {
        let g = Grid::new_2d(24, 16, 1.0, 0.7).unwrap();
        let c = g.sample(|x, y| 1.0 + (3.0 * x).sin().powi(2) + y);
        let s = g.sample(|x, y| (-(x - 0.3).powi(2) / 0.02 - y * y).exp());
        let lap = laplacian_neumann(&c, &g).unwrap();
        let l1 = weighted_sum(&c, &g);
        assert!(weighted_sum(&lap, &g).abs() < 1e-12 * l1);
        let t = taxis_divergence(&c, &s, 3.0, SigmaSpec::Mollified { epsilon: 0.6 }, &g).unwrap();
        assert!(weighted_sum(&t, &g).abs() < 1e-12 * l1);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = Grid::unit(2, 8).unwrap();
        assert!(matches!(
            laplacian_neumann(&[1.0; 10], &g),
            Err(Error::Shape { .. })
        ));
        assert!(gradient_faces(&[1.0; 63], &g).is_err());
    }
}
