use super::nnls::{nnls, nnls_warm};
use super::ReducedQuadrature;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Greedy iterations without residual decrease tolerated before giving up.
const STAGNATION_WINDOW: usize = 3;

/// Outcome of a successful NNOMP run.
#[derive(Clone, Debug)]
pub struct NnompReport {
    pub quadrature: ReducedQuadrature,
    /// Relative residual after each greedy iteration.
    pub history: Vec<f64>,
}

fn residual(j: &DMatrix<f64>, g: &DVector<f64>, cols: &[usize], w: &DVector<f64>) -> DVector<f64> {
    let mut r = g.clone();
    for (c, wc) in cols.iter().zip(w.iter()) {
        r.axpy(-wc, &j.column(*c), 1.0);
    }
    r
}

/// Drops zero weights, sorts the support and re-solves from scratch until
/// every weight is positive.
fn finalize(j: &DMatrix<f64>, g: &DVector<f64>, cols: &[usize], w: &DVector<f64>) -> Result<ReducedQuadrature> {
    let mut support: Vec<usize> = cols
        .iter()
        .zip(w.iter())
        .filter(|(_, v)| **v > 0.0)
        .map(|(c, _)| *c)
        .collect();
    support.sort_unstable();
    loop {
        let weights = nnls(&j.select_columns(&support), g)?;
        if weights.iter().all(|v| *v > 0.0) {
            let r = residual(j, g, &support, &weights).norm() / g.norm();
            return Ok(ReducedQuadrature {
                indices: support,
                weights: weights.as_slice().to_vec(),
                residual: r,
            });
        }
        support = support
            .iter()
            .zip(weights.iter())
            .filter(|(_, v)| **v > 0.0)
            .map(|(c, _)| *c)
            .collect();
    }
}

/// Nonnegative orthogonal matching pursuit for `J w = g`, stopping at
/// `|g - J_Z w| <= eps |g|`.
pub fn nnomp(j: &DMatrix<f64>, g: &DVector<f64>, eps: f64) -> Result<NnompReport> {
    if !(eps > 0.0) {
        return Err(Error::Config("NNOMP tolerance must be positive".into()));
    }
    if j.nrows() != g.len() {
        return Err(Error::Dimension("NNOMP system sizes disagree".into()));
    }
    let gnorm = g.norm();
    if gnorm == 0.0 {
        return Ok(NnompReport {
            quadrature: ReducedQuadrature::default(),
            history: Vec::new(),
        });
    }
    let mut cols: Vec<usize> = Vec::new();
    let mut selected = vec![false; j.ncols()];
    let mut w = DVector::zeros(0);
    let mut r = g.clone();
    let mut history = vec![1.0];
    let mut best = (1.0, Vec::new(), DVector::zeros(0));
    let mut stalled = 0;
    let fail = |reason: &str, best: &(f64, Vec<usize>, DVector<f64>)| -> Result<NnompReport> {
        let quadrature = if best.1.is_empty() {
            None
        } else {
            finalize(j, g, &best.1, &best.2).ok()
        };
        Err(Error::Nnomp {
            reason: reason.into(),
            best_residual: best.0,
            points: best.1.len(),
            best: quadrature,
        })
    };
    while r.norm() > eps * gnorm {
        let c = j.tr_mul(&r);
        let mut pick: Option<usize> = None;
        for k in 0..j.ncols() {
            if !selected[k] && pick.is_none_or(|p| c[k] > c[p]) {
                pick = Some(k);
            }
        }
        let Some(k) = pick else {
            return fail("all columns selected", &best);
        };
        if !(c[k] > 0.0) {
            return fail("no column correlates positively with the residual", &best);
        }
        selected[k] = true;
        cols.push(k);
        let mut x0 = DVector::zeros(cols.len());
        x0.rows_mut(0, w.len()).copy_from(&w);
        w = nnls_warm(&j.select_columns(&cols), g, Some(&x0))?;
        r = residual(j, g, &cols, &w);
        let rel = r.norm() / gnorm;
        if rel < best.0 {
            best = (rel, cols.clone(), w.clone());
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STAGNATION_WINDOW {
                history.push(rel);
                return fail("residual stagnated", &best);
            }
        }
        history.push(rel);
    }
    Ok(NnompReport {
        quadrature: finalize(j, g, &cols, &w)?,
        history,
    })
}
