//! Snapshot POD: correlation matrix, dual truncation rule, orthonormal modes.

use crate::csvio::{read_table, write_table};
use crate::error::{Error, Result};
use crate::fem::InnerProduct;
use nalgebra::{DMatrix, SymmetricEigen};
use std::path::Path;

/// Eigenvalues below this fraction of the largest one are treated as zero.
pub const EIGEN_CUTOFF: f64 = 1e-14;

/// Orthonormal modes and the full correlation spectrum (descending).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReducedBasis {
    pub modes: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl ReducedBasis {
    pub fn n(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn project(&self, field: &[f64], ip: &dyn InnerProduct) -> Vec<f64> {
        self.modes.iter().map(|m| ip.dot(m, field)).collect()
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        let len = self.modes.first().map_or(0, Vec::len);
        let mut out = vec![0.0; len];
        for (m, c) in self.modes.iter().zip(coeffs) {
            for (o, v) in out.iter_mut().zip(m) {
                *o += c * v;
            }
        }
        out
    }

    pub fn gram(&self, ip: &dyn InnerProduct) -> DMatrix<f64> {
        let refs: Vec<&[f64]> = self.modes.iter().map(Vec::as_slice).collect();
        ip.gram(&refs)
    }

    pub fn save(&self, dir: &Path, name: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let header: Vec<String> = (0..self.n()).map(|i| format!("mode{i}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let len = self.modes.first().map_or(0, Vec::len);
        let rows = (0..len).map(|r| self.modes.iter().map(|m| m[r]).collect::<Vec<f64>>());
        write_table(&dir.join(format!("{name}_modes.csv")), &header, rows)?;
        write_table(
            &dir.join(format!("{name}_eigenvalues.csv")),
            &["lambda"],
            self.eigenvalues.iter().map(|l| [*l]),
        )
    }

    pub fn load(dir: &Path, name: &str) -> Result<Self> {
        let (header, rows) = read_table(&dir.join(format!("{name}_modes.csv")))?;
        let modes = (0..header.len()).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
        let (_, ev) = read_table(&dir.join(format!("{name}_eigenvalues.csv")))?;
        Ok(ReducedBasis {
            modes,
            eigenvalues: ev.into_iter().map(|r| r[0]).collect(),
        })
    }
}

/// Number of modes retained by the dual criterion: the smallest `n1` whose
/// leading eigenvalues hold `(1 - eps^2)` of the total, and the number `n2`
/// of eigenvalues above `eps^2 lambda_1`; returns `max(n1, n2)`.
pub fn truncation_rank(eigenvalues: &[f64], eps: f64) -> usize {
    let Some(&l1) = eigenvalues.first() else {
        return 0;
    };
    if !(l1 > 0.0) {
        return 0;
    }
    let kept: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l > EIGEN_CUTOFF * l1).collect();
    let total: f64 = kept.iter().sum();
    let target = (1.0 - eps * eps) * total;
    let mut acc = 0.0;
    let mut n1 = kept.len();
    for (i, l) in kept.iter().enumerate() {
        acc += l;
        if acc >= target {
            n1 = i + 1;
            break;
        }
    }
    let n2 = kept.iter().filter(|&&l| l > eps * eps * l1).count();
    n1.max(n2)
}

/// Snapshot POD of `snapshots` in the inner product `ip`.
pub fn snapshot_pod(snapshots: &[&[f64]], eps: f64, ip: &dyn InnerProduct) -> Result<ReducedBasis> {
    if snapshots.is_empty() {
        return Err(Error::Config("POD needs at least one snapshot".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("POD tolerance {eps} outside (0, 1)")));
    }
    let len = snapshots[0].len();
    if snapshots.iter().any(|s| s.len() != len) {
        return Err(Error::Dimension("snapshots of different lengths".into()));
    }
    let c = ip.gram(snapshots);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let n = truncation_rank(&eigenvalues, eps);
    if n == 0 {
        log::warn!("all snapshots vanish; POD basis is empty");
        return Ok(ReducedBasis {
            modes: Vec::new(),
            eigenvalues,
        });
    }
    let mut modes: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (r, &i) in order.iter().take(n).enumerate() {
        let xi = eig.eigenvectors.column(i);
        let scale = 1.0 / eigenvalues[r].sqrt();
        let mut m = vec![0.0; len];
        for (s, w) in snapshots.iter().zip(xi.iter()) {
            for (o, v) in m.iter_mut().zip(s.iter()) {
                *o += scale * w * v;
            }
        }
        for _ in 0..2 {
            for prev in &modes {
                let d = ip.dot(prev, &m);
                m.iter_mut().zip(prev).for_each(|(o, p)| *o -= d * p);
            }
        }
        let norm = ip.norm(&m);
        if !(norm > 1e-8) {
            return Err(Error::DegenerateModes(format!("POD mode {r} lost its norm during orthonormalization")));
        }
        m.iter_mut().for_each(|v| *v /= norm);
        modes.push(m);
    }
    Ok(ReducedBasis { modes, eigenvalues })
}
