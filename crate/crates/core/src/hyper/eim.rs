use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

fn argmax_abs(values: impl Iterator<Item = f64>, skip: &[usize]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if skip.contains(&i) {
            continue;
        }
        if best.is_none_or(|(_, b)| v.abs() > b) {
            best = Some((i, v.abs()));
        }
    }
    best
}

/// Greedy empirical interpolation points of `modes` (each a field over the
/// integration points), followed by the `existing` indices not already
/// chosen.
pub fn eim_select(modes: &[Vec<f64>], existing: &[usize]) -> Result<Vec<usize>> {
    let mut sel: Vec<usize> = Vec::with_capacity(modes.len() + existing.len());
    for (j, psi) in modes.iter().enumerate() {
        let residual: Vec<f64> = if j == 0 {
            psi.clone()
        } else {
            let b = DMatrix::from_fn(j, j, |a, c| modes[c][sel[a]]);
            let rhs = DVector::from_fn(j, |a, _| psi[sel[a]]);
            let coef = b
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::DegenerateModes(format!("interpolation matrix singular at mode {j}")))?;
            (0..psi.len())
                .map(|k| psi[k] - (0..j).map(|c| coef[c] * modes[c][k]).sum::<f64>())
                .collect()
        };
        let scale = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (k, r) = argmax_abs(residual.into_iter(), &sel)
            .ok_or_else(|| Error::DegenerateModes("more modes than points".into()))?;
        if !(r > 1e-12 * scale) || scale == 0.0 {
            return Err(Error::DegenerateModes(format!("mode {j} is interpolated exactly by the previous ones")));
        }
        sel.push(k);
    }
    for &k in existing {
        if !sel.contains(&k) {
            sel.push(k);
        }
    }
    Ok(sel)
}
