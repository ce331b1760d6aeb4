//! The gradient inequality `∫|∇φ|⁴/φ³ ≤ (2+√n)² ∫φ|D² ln φ|²` on manufactured
//! positive fields, and the interpolation ratio as an unasserted diagnostic.

use std::f64::consts::PI;

use super::thresholds::INEQUALITY_SLACK;
use super::VerificationReport;
use crate::functionals::{interpolation_ratio, log_hessian_dissipation, quartic_quotient};
use crate::model::Grid;

/// A closed-form positive field with zero normal derivative on the unit box.
pub struct CatalogField {
    pub name: &'static str,
    pub dim: usize,
    pub f: fn(f64, f64) -> f64,
}

fn smoothstep(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

pub fn manufactured_catalog() -> Vec<CatalogField> {
    vec![
        CatalogField {
            name: "constant",
            dim: 1,
            f: |_, _| 3.0,
        },
        CatalogField {
            name: "2+cos(pi x)",
            dim: 1,
            f: |x, _| 2.0 + (PI * x).cos(),
        },
        CatalogField {
            name: "exp(cos(pi x))",
            dim: 1,
            f: |x, _| (PI * x).cos().exp(),
        },
        CatalogField {
            name: "0.1+smoothstep",
            dim: 1,
            f: |x, _| 0.1 + smoothstep(x),
        },
        CatalogField {
            name: "1.05+cos(2 pi x)",
            dim: 1,
            f: |x, _| 1.05 + (2.0 * PI * x).cos(),
        },
        CatalogField {
            name: "gaussian 1d",
            dim: 1,
            f: |x, _| 1e-3 + (-(x - 0.5).powi(2) / 0.02).exp(),
        },
        CatalogField {
            name: "constant 2d",
            dim: 2,
            f: |_, _| 0.5,
        },
        CatalogField {
            name: "2+cos(pi x)cos(pi y)",
            dim: 2,
            f: |x, y| 2.0 + (PI * x).cos() * (PI * y).cos(),
        },
        CatalogField {
            name: "exp(cos(pi x)cos(2 pi y))",
            dim: 2,
            f: |x, y| ((PI * x).cos() * (2.0 * PI * y).cos()).exp(),
        },
        CatalogField {
            name: "1.1+cos(3 pi x)cos(pi y)",
            dim: 2,
            f: |x, y| 1.1 + (3.0 * PI * x).cos() * (PI * y).cos(),
        },
        CatalogField {
            name: "gaussian 2d",
            dim: 2,
            f: |x, y| 0.05 + (-((x - 0.5).powi(2) + (y - 0.5).powi(2)) / 0.02).exp(),
        },
        CatalogField {
            name: "smoothstep x * smoothstep y",
            dim: 2,
            f: |x, y| 0.2 + smoothstep(x) * smoothstep(y),
        },
    ]
}

/// `LHS / ((2+√n)² RHS)` with `0/0 = 0`.
fn normalized_ratio(lhs: f64, rhs: f64, n: usize) -> f64 {
    let c = (2.0 + (n as f64).sqrt()).powi(2);
    if lhs == 0.0 {
        0.0
    } else {
        lhs / (c * rhs)
    }
}

pub fn inequality_suite(grid_sizes: &[usize]) -> VerificationReport {
    let mut report = VerificationReport::new("inequality");
    for field in manufactured_catalog() {
        for &n in grid_sizes {
            let tag = format!("{} [{}d, n={n}]", field.name, field.dim);
            let grid = match Grid::unit(field.dim, n) {
                Ok(g) => g,
                Err(e) => {
                    report.fail(tag, e.to_string());
                    continue;
                }
            };
            let phi = grid.sample(field.f);
            let lhs = quartic_quotient(&phi, &grid);
            let rhs = log_hessian_dissipation(&phi, &grid);
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => {
                    report.check_le(
                        format!("{tag} lhs/((2+sqrt n)^2 rhs)"),
                        normalized_ratio(l, r, field.dim),
                        1.0 + INEQUALITY_SLACK,
                        format!("lhs {l:.4e}, rhs {r:.4e}"),
                    );
                }
                (Err(e), _) | (_, Err(e)) => report.fail(tag.clone(), e.to_string()),
            }
            if let Ok(ratio) = interpolation_ratio(&phi, &grid) {
                report.record(format!("interpolation ratio {tag}"), ratio);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_neumann_compatible() {
        let h = 1e-6;
        for f in manufactured_catalog() {
            for s in [0.1, 0.37, 0.8] {
                // x = 0 and x = 1 faces
                for x in [0.0, 1.0 - h] {
                    let d = ((f.f)(x + h, s) - (f.f)(x, s)) / h;
                    assert!(
                        d.abs() < 1e-4 * (1.0 + (f.f)(x, s).abs()) + 1e-3,
                        "{}",
                        f.name
                    );
                }
                assert!((f.f)(s, s) > 0.0);
            }
        }
    }

    #[test]
    fn cosine_example_is_well_inside_the_bound() {
        let g = Grid::unit(2, 128).unwrap();
        let phi = g.sample(|x, y| 2.0 + (PI * x).cos() * (PI * y).cos());
        let l = quartic_quotient(&phi, &g).unwrap();
        let r = log_hessian_dissipation(&phi, &g).unwrap();
        assert!(l <= (2.0 + 2f64.sqrt()).powi(2) * r);
    }

    #[test]
    fn suite_passes_at_h_1_128() {
        let r = inequality_suite(&[128]);
        assert!(r.passed(), "{}", r.render_text());
    }
}
