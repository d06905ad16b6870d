//! Small dense linear-algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold below which a factorization is declared singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve_lu(a: DMatrix<f64>, b: &DVector<f64>, context: &str) -> Result<DVector<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "{context}: {}x{} system with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if a.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let lu = a.lu();
    let u = lu.u();
    let diag_max = u.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diag_min = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(diag_max > 0.0) || diag_min <= PIVOT_TOLERANCE * diag_max {
        return Err(Error::Singular {
            context: context.to_string(),
            pivot: if diag_max > 0.0 { diag_min / diag_max } else { 0.0 },
        });
    }
    lu.solve(b).ok_or_else(|| Error::Singular {
        context: context.to_string(),
        pivot: 0.0,
    })
}

/// Cholesky solve for symmetric positive definite systems.
pub fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>, context: &str) -> Result<DVector<f64>> {
    let chol = a.clone().cholesky().ok_or_else(|| Error::Singular {
        context: context.to_string(),
        pivot: 0.0,
    })?;
    Ok(chol.solve(b))
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unconstrained least squares through the SVD; returns `None` when the
/// system has no columns.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if a.ncols() == 0 {
        return None;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(b, smax * 1e-13).ok()
}
