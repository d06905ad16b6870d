use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Least squares on a column subset: Householder QR, SVD when the subset
/// is rank deficient.
fn subset_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(cols);
    if sub.nrows() >= sub.ncols() {
        let qr = sub.clone().qr();
        let r = qr.r();
        let dmax = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dmin = r.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if dmax > 0.0 && dmin > 1e-12 * dmax {
            let qtb = qr.q().transpose() * b;
            if let Some(z) = r.solve_upper_triangular(&qtb) {
                return z;
            }
        }
    }
    crate::linalg::least_squares(&sub, b).unwrap_or_else(|| DVector::zeros(cols.len()))
}

/// Lawson-Hanson nonnegative least squares `min |A x - b|, x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    nnls_warm(a, b, None)
}

/// Lawson-Hanson started from a feasible point `x0` whose positive entries
/// form the initial passive set.
pub fn nnls_warm(a: &DMatrix<f64>, b: &DVector<f64>, x0: Option<&DVector<f64>>) -> Result<DVector<f64>> {
    let n = a.ncols();
    if a.nrows() != b.len() || x0.is_some_and(|x| x.len() != n) {
        return Err(Error::Dimension("NNLS operand sizes disagree".into()));
    }
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let mut x = match x0 {
        Some(x) => x.map(|v| v.max(0.0)),
        None => DVector::zeros(n),
    };
    let mut passive: Vec<bool> = x.iter().map(|v| *v > 0.0).collect();
    let col_norm = (0..n).map(|j| a.column(j).norm()).fold(0.0, f64::max);
    let tol = 10.0 * f64::EPSILON * (a.nrows().max(n) as f64) * col_norm * b.norm();
    let cap = 10 * n;
    let mut iterations = 0;
    loop {
        let w = a.tr_mul(&(b - a * &x));
        let mut pick = None;
        for j in 0..n {
            if !passive[j] && w[j] > tol && pick.is_none_or(|p: usize| w[j] > w[p]) {
                pick = Some(j);
            }
        }
        let Some(j) = pick else {
            return Ok(x);
        };
        passive[j] = true;
        loop {
            iterations += 1;
            if iterations > cap {
                return Err(Error::NnlsIterations(cap));
            }
            let cols: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let zp = subset_lstsq(a, b, &cols);
            if zp.iter().all(|v| *v > 0.0) {
                x.fill(0.0);
                for (c, v) in cols.iter().zip(zp.iter()) {
                    x[*c] = *v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (c, z) in cols.iter().zip(zp.iter()) {
                if *z <= 0.0 {
                    let xi = x[*c];
                    alpha = alpha.min(xi / (xi - z));
                }
            }
            for (c, z) in cols.iter().zip(zp.iter()) {
                x[*c] += alpha * (z - x[*c]);
            }
            for &c in &cols {
                if x[c] <= 0.0 || x[c].abs() < 1e-15 * x.amax() {
                    x[c] = 0.0;
                    passive[c] = false;
                }
            }
            // The entering column may have been dropped immediately.
            if !passive.iter().any(|p| *p) {
                break;
            }
        }
    }
}
