//! Direct solution of the assembled SPD system.

use nalgebra::DVector;

use crate::assembly::LinearSystem;
use crate::error::{Error, Result};

/// Minimizer coefficients and the relative residual `‖A·u − rhs‖ / ‖rhs‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
}

impl SolutionField {
    /// Residual threshold for a solution to count as accepted.
    pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

    pub fn is_accepted(&self) -> bool {
        self.residual_norm <= Self::RESIDUAL_TOLERANCE
    }
}

/// Relative residual; falls back to the absolute norm when `rhs = 0`.
pub fn relative_residual(system: &LinearSystem, u: &[f64]) -> f64 {
    let u = DVector::from_column_slice(u);
    let r = (&system.matrix * &u - &system.rhs).norm();
    let b = system.rhs.norm();
    if b > 0.0 {
        r / b
    } else {
        r
    }
}

/// Solves `A·u = rhs` by an unpivoted Cholesky factorization.
///
/// A non-positive pivot is reported as [`Error::NotPositiveDefinite`]; there is
/// no fallback to a pivoted factorization.
pub fn solve_spd(system: &LinearSystem) -> Result<SolutionField> {
    if system.matrix.nrows() != system.rhs.len() || !system.matrix.is_square() {
        return Err(Error::arg("matrix and right-hand side sizes differ"));
    }
    if system.matrix.iter().chain(system.rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::data("system contains non-finite entries"));
    }
    let chol = system.matrix.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let u = chol.solve(&system.rhs);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let coefficients: Vec<f64> = u.iter().copied().collect();
    let residual_norm = relative_residual(system, &coefficients);
    Ok(SolutionField { coefficients, residual_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn system(matrix: DMatrix<f64>, rhs: DVector<f64>) -> LinearSystem {
        LinearSystem { dim: 1, matrix, rhs, constant: 0.0 }
    }

    #[test]
    fn homogeneous_system_gives_zero() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let sol = solve_spd(&system(m, DVector::zeros(2))).unwrap();
        assert!(sol.coefficients.iter().all(|&v| v == 0.0));
        assert_eq!(sol.residual_norm, 0.0);
    }

    #[test]
    fn random_spd_recovers_known_solution() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let b = DMatrix::from_fn(10, 10, |_, _| rng.gen_range(-1.0..1.0));
        let a = b.transpose() * &b + DMatrix::identity(10, 10);
        let truth = DVector::from_fn(10, |_, _| rng.gen_range(-2.0..2.0));
        let rhs = &a * &truth;
        let sol = solve_spd(&system(a, rhs)).unwrap();
        for (u, t) in sol.coefficients.iter().zip(truth.iter()) {
            assert!((u - t).abs() < 1e-10);
        }
        assert!(sol.is_accepted());
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let r = solve_spd(&system(m, DVector::from_vec(vec![1.0, 0.0])));
        assert!(matches!(r, Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        let r = solve_spd(&system(m, DVector::from_vec(vec![1.0, 0.0])));
        assert!(matches!(r, Err(Error::InvalidData(_))));
    }

    #[test]
    fn deterministic() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let b = DMatrix::from_fn(30, 30, |_, _| rng.gen_range(-1.0..1.0));
        let a = b.transpose() * &b + DMatrix::identity(30, 30) * 0.5;
        let rhs = DVector::from_fn(30, |_, _| rng.gen_range(-1.0..1.0));
        let s = system(a, rhs);
        let first = solve_spd(&s).unwrap();
        let second = solve_spd(&s).unwrap();
        assert!(first.coefficients.iter().zip(&second.coefficients).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
