//! Thomas algorithm for the constant-coefficient Neumann systems
//! `(I − r Δ₁) x = d` arising from implicit diffusion along one axis.

use crate::error::{Error, Result};

/// Solve `A x = d` for a general tridiagonal `A` (sub-, main and super-diagonal).
pub fn solve_tridiagonal(
    lower: &[f64],
    main: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = main.len();
    if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
        return Err(Error::Shape {
            expected: n,
            actual: rhs.len(),
        });
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = main[0];
    if denom == 0.0 {
        return Err(Error::Domain("singular tridiagonal system".into()));
    }
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = main[i] - lower[i - 1] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::Domain("singular tridiagonal system".into()));
        }
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Pre-factored `I − r Δ₁` on `n` cells with mirror ghosts.
///
/// The matrix is an M-matrix, and every arithmetic step of the solve combines
/// nonnegative quantities, so nonnegative right-hand sides yield nonnegative
/// solutions in floating point.
#[derive(Debug, Clone)]
pub struct NeumannFactor {
    r: f64,
    /// `r / denom_i`, the negated modified super-diagonal.
    up: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl NeumannFactor {
    pub fn new(n: usize, r: f64) -> Self {
        let mut up = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let mut prev_up = 0.0;
        for i in 0..n {
            let diag = if n == 1 {
                1.0
            } else if i == 0 || i == n - 1 {
                1.0 + r
            } else {
                1.0 + 2.0 * r
            };
            let denom = diag - r * prev_up;
            inv_denom[i] = 1.0 / denom;
            up[i] = if i + 1 < n { r / denom } else { 0.0 };
            prev_up = up[i];
        }
        NeumannFactor { r, up, inv_denom }
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    /// Overwrites `x` (holding the right-hand side) with the solution.
    #[inline]
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.up.len();
        debug_assert_eq!(x.len(), n);
        let mut prev = 0.0;
        for i in 0..n {
            prev = (x[i] + self.r * prev) * self.inv_denom[i];
            x[i] = prev;
        }
        for i in (0..n - 1).rev() {
            x[i] += self.up[i] * x[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(n: usize, r: f64, x: &[f64]) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let left = if i == 0 { x[0] } else { x[i - 1] };
                let right = if i == n - 1 { x[n - 1] } else { x[i + 1] };
                x[i] - r * (left - 2.0 * x[i] + right)
            })
            .collect()
    }

    #[test]
    fn factor_inverts_neumann_operator() {
        for &(n, r) in &[(4, 0.3), (17, 5.0), (64, 123.0)] {
            let d: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 + 0.5).collect();
            let f = NeumannFactor::new(n, r);
            let mut x = d.clone();
            f.solve_in_place(&mut x);
            for (a, b) in apply(n, r, &x).iter().zip(&d) {
                assert!((a - b).abs() < 1e-10 * (1.0 + r));
            }
            // Neumann operator preserves sums
            let sx: f64 = x.iter().sum();
            let sd: f64 = d.iter().sum();
            assert!((sx - sd).abs() < 1e-12 * sd);
        }
    }

    #[test]
    fn general_solver_matches_factor() {
        let n = 9;
        let r = 0.8;
        let mut lower = vec![-r; n - 1];
        let mut main = vec![1.0 + 2.0 * r; n];
        let upper = vec![-r; n - 1];
        main[0] = 1.0 + r;
        main[n - 1] = 1.0 + r;
        lower[n - 2] = -r;
        let d: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 2.0).collect();
        let x = solve_tridiagonal(&lower, &main, &upper, &d).unwrap();
        let mut y = d.clone();
        NeumannFactor::new(n, r).solve_in_place(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn nonnegative_data_gives_nonnegative_solution() {
        let n = 50;
        let f = NeumannFactor::new(n, 1e4);
        let mut x = vec![0.0; n];
        x[0] = 1e-300;
        x[25] = 1.0;
        f.solve_in_place(&mut x);
        assert!(x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn shape_errors() {
        assert!(solve_tridiagonal(&[1.0], &[1.0, 2.0, 3.0], &[1.0, 1.0], &[0.0; 3]).is_err());
    }
}
