//! Hyper-reduction: empirical cubature via NNOMP, and EIM point selection.

mod ecm;
mod eim;
mod nnls;
mod nnomp;

pub use ecm::{build_ecm_system, EcmSystem};
pub use eim::eim_select;
pub use nnls::{nnls, nnls_warm};
pub use nnomp::{nnomp, NnompReport};

use crate::csvio::{read_table, write_table};
use crate::error::{Error, Result};
use crate::fem::WeightedPoint;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Sparse positive-weight quadrature over a subset of integration points.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReducedQuadrature {
    /// Increasing global integration point indices.
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    /// Relative residual `|J_Z w - g| / |g|` on the training system.
    pub residual: f64,
}

impl ReducedQuadrature {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn points(&self) -> Vec<WeightedPoint> {
        self.indices.iter().copied().zip(self.weights.iter().copied()).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_table(
            path,
            &["index", "weight"],
            self.indices.iter().zip(&self.weights).map(|(i, w)| [*i as f64, *w]),
        )
    }

    /// Reads a quadrature saved by [`ReducedQuadrature::save`]; the residual
    /// is not stored and reads back as NaN.
    pub fn load(path: &Path) -> Result<Self> {
        let (_, rows) = read_table(path)?;
        let mut q = ReducedQuadrature {
            residual: f64::NAN,
            ..Default::default()
        };
        for r in rows {
            if r.len() != 2 || r[0] < 0.0 || r[0].fract() != 0.0 {
                return Err(Error::Parse {
                    file: path.display().to_string(),
                    message: "expected rows of (index, weight)".into(),
                });
            }
            q.indices.push(r[0] as usize);
            q.weights.push(r[1]);
        }
        Ok(q)
    }
}

/// Relative residual of `rq` on `system`.
pub fn verify_quadrature(system: &EcmSystem, rq: &ReducedQuadrature) -> f64 {
    let gn = system.g.norm();
    let mut r = system.g.clone();
    for (&k, &w) in rq.indices.iter().zip(&rq.weights) {
        r.axpy(-w, &system.j.column(k), 1.0);
    }
    if gn == 0.0 {
        r.norm()
    } else {
        r.norm() / gn
    }
}

/// Full-table quadrature, used as reference.
pub fn full_quadrature(measures: &[f64]) -> ReducedQuadrature {
    ReducedQuadrature {
        indices: (0..measures.len()).collect(),
        weights: measures.to_vec(),
        residual: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::SymTensor;
    use crate::fem::{FeBasis, GlobalIntegrationTable, ModeStrains, StrainBasis};
    use crate::mesh::BoxMeshBuilder;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_matching_column_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let j = DMatrix::from_fn(6, 5, |_, _| rng.gen_range(0.0..1.0));
        let g = j.column(3).into_owned();
        let rep = nnomp(&j, &g, 1e-10).unwrap();
        assert_eq!(rep.quadrature.indices, vec![3]);
        assert!((rep.quadrature.weights[0] - 1.0).abs() < 1e-12);
        assert!(rep.quadrature.residual < 1e-12);
    }

    #[test]
    fn orthogonal_columns_are_recovered_with_their_weights() {
        let mut j = DMatrix::zeros(4, 3);
        j[(0, 0)] = 1.0;
        j[(1, 2)] = 1.0;
        j[(2, 1)] = 0.5;
        let g = j.column(0) * 2.0 + j.column(2) * 3.0;
        let q = nnomp(&j, &g, 1e-12).unwrap().quadrature;
        assert_eq!(q.indices, vec![0, 2]);
        assert!((q.weights[0] - 2.0).abs() < 1e-12 && (q.weights[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_target_gives_empty_quadrature() {
        let j = DMatrix::from_element(3, 3, 1.0);
        assert!(nnomp(&j, &DVector::zeros(3), 1e-4).unwrap().quadrature.is_empty());
    }

    #[test]
    fn sparse_nonnegative_targets_are_matched() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let j = DMatrix::from_fn(30, 200, |_, _| rng.gen_range(0.0..1.0));
            let mut w = DVector::zeros(200);
            for _ in 0..5 {
                w[rng.gen_range(0..200)] = rng.gen_range(0.5..2.0);
            }
            let g = &j * &w;
            let rep = nnomp(&j, &g, 1e-6).unwrap();
            let q = &rep.quadrature;
            assert!(q.len() <= 30);
            assert!(q.weights.iter().all(|w| *w > 0.0));
            let mut indices = q.indices.clone();
            indices.dedup();
            assert_eq!(indices.len(), q.len());
            let sys = EcmSystem {
                j: j.clone(),
                g: g.clone(),
                modes: 1,
                snapshots: 30,
            };
            assert!(verify_quadrature(&sys, q) <= 1e-6);
            assert!(rep.history.windows(2).all(|h| h[1] <= h[0]));
            let again = nnls(&j.select_columns(&q.indices), &g).unwrap();
            assert_eq!(again.as_slice(), q.weights.as_slice());
        }
    }

    #[test]
    fn unreachable_target_fails_with_best_so_far() {
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let g = DVector::from_vec(vec![1.0, -1.0]);
        match nnomp(&j, &g, 1e-6) {
            Err(Error::Nnomp { best, points, .. }) => {
                assert_eq!(points, 1);
                assert_eq!(best.unwrap().indices, vec![0]);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn quadrature_csv_round_trip() {
        let q = ReducedQuadrature {
            indices: vec![2, 9],
            weights: vec![0.25, 1.5],
            residual: 0.0,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.csv");
        q.save(&p).unwrap();
        let back = ReducedQuadrature::load(&p).unwrap();
        assert_eq!((back.indices, back.weights), (q.indices, q.weights));
    }

    fn fixture() -> (crate::mesh::Mesh, GlobalIntegrationTable) {
        let mesh = BoxMeshBuilder::new([2.0, 1.0, 1.0], [2, 1, 1]).clamp("xmin").build().unwrap();
        let table = GlobalIntegrationTable::build(&mesh).unwrap();
        (mesh, table)
    }

    #[test]
    fn ecm_rows_integrate_virtual_work() {
        let (mesh, table) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stresses: Vec<Vec<SymTensor>> = (0..2)
            .map(|_| {
                (0..table.len())
                    .map(|_| SymTensor(std::array::from_fn(|_| rng.gen_range(-10.0..10.0))))
                    .collect()
            })
            .collect();
        let modes: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let mut m: Vec<f64> = (0..mesh.dof_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for d in 0..mesh.dof_count() {
                    if mesh.is_constrained(d / 3) {
                        m[d] = 0.0;
                    }
                }
                m
            })
            .collect();
        let all: Vec<usize> = (0..table.len()).collect();
        let ms = ModeStrains::build(&mesh, &table, &modes, &all);
        let refs: Vec<&[SymTensor]> = stresses.iter().map(Vec::as_slice).collect();
        let sys = build_ecm_system(&table, &refs, &ms).unwrap();
        assert_eq!(sys.j.nrows(), 6);
        for s in 0..2 {
            for m in 0..3 {
                let mut naive = 0.0;
                for k in 0..table.len() {
                    let e = table.strain(&mesh, &modes[m], k);
                    naive += table.point(k).measure * stresses[s][k].ddot(&e);
                }
                let q = s * 3 + m;
                assert!((sys.g[q] - naive).abs() < 1e-12 * (1.0 + naive.abs()));
            }
        }
        assert!(verify_quadrature(&sys, &full_quadrature(&table.measures())) < 1e-14);
        let zero = vec![SymTensor::ZERO; table.len()];
        let sys0 = build_ecm_system(&table, &[&zero], &FeBasis::new(&mesh, &table)).unwrap();
        assert!(sys0.j.iter().all(|v| *v == 0.0) && sys0.g.iter().all(|v| *v == 0.0));
        assert_eq!(sys0.j.nrows(), FeBasis::new(&mesh, &table).dim());
    }

    #[test]
    fn eim_examples() {
        let mut peak = vec![0.1; 10];
        peak[7] = -2.0;
        assert_eq!(eim_select(&[peak], &[]).unwrap(), vec![7]);

        let a: Vec<f64> = (0..10).map(|i| if i < 5 { 1.0 + i as f64 * 0.1 } else { 0.0 }).collect();
        let b: Vec<f64> = (0..10).map(|i| if i >= 5 { 1.0 } else { 0.0 }).collect();
        let sel = eim_select(&[a, b], &[0, 9]).unwrap();
        assert!(sel[0] < 5 && sel[1] >= 5);
        assert!(sel.contains(&0) && sel.contains(&9) && sel.len() <= 4);
        let mut uniq = sel.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), sel.len());

        let x: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let modes: Vec<Vec<f64>> = vec![
            x.iter().map(|_| 1.0).collect(),
            x.iter().map(|t| t.sin()).collect(),
            x.iter().map(|t| (3.0 * t).cos()).collect(),
        ];
        let sel = eim_select(&modes, &[]).unwrap();
        let b = DMatrix::from_fn(3, 3, |a, c| modes[c][sel[a]]);
        assert!(b.determinant().abs() > 1e-6);
    }

    #[test]
    fn eim_rejects_dependent_modes() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![2.0, 4.0, 6.0];
        assert!(matches!(eim_select(&[a, b], &[]), Err(Error::DegenerateModes(_))));
    }
}
