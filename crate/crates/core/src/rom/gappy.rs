use crate::error::{Error, Result};
use crate::fem::IpL2;
use crate::hyper::eim_select;
use crate::pod::{snapshot_pod, ReducedBasis};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Gappy-POD reconstruction data for one dual quantity.
#[derive(Clone, Debug)]
pub struct GappyModel {
    pub basis: ReducedBasis,
    /// EIM points followed by the remaining quadrature points.
    pub points: Vec<usize>,
    pub b: DMatrix<f64>,
    pub m: DMatrix<f64>,
    /// Number of integration points of the reconstructed fields.
    pub size: usize,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl GappyModel {
    /// Assembles `B` and `M = B^T B` for a given basis and point set.
    pub fn new(basis: ReducedBasis, points: Vec<usize>, size: usize) -> Result<Self> {
        let n = basis.n();
        let b = DMatrix::from_fn(points.len(), n, |k, i| basis.modes[i][points[k]]);
        let m = b.tr_mul(&b);
        let chol = if n == 0 {
            None
        } else {
            Some(Cholesky::new(m.clone()).ok_or_else(|| {
                Error::IllPosed(format!("Gappy matrix of {n} modes on {} points is not positive definite", points.len()))
            })?)
        };
        Ok(GappyModel {
            basis,
            points,
            b,
            m,
            size,
            chol,
        })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// Coefficients `z` solving `M z = B^T values`.
    pub fn coefficients(&self, values: &[f64]) -> Result<DVector<f64>> {
        if values.len() != self.points.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} Gappy points",
                values.len(),
                self.points.len()
            )));
        }
        match &self.chol {
            None => Ok(DVector::zeros(0)),
            Some(c) => Ok(c.solve(&self.b.tr_mul(&DVector::from_column_slice(values)))),
        }
    }

    /// Reconstruction `B z` at the Gappy points.
    pub fn at_points(&self, z: &DVector<f64>) -> Vec<f64> {
        if self.n() == 0 {
            return vec![0.0; self.points.len()];
        }
        (&self.b * z).as_slice().to_vec()
    }

    /// Full integration point field `sum_i z_i psi_i`.
    pub fn field(&self, z: &DVector<f64>) -> Vec<f64> {
        if self.n() == 0 {
            return vec![0.0; self.size];
        }
        self.basis.reconstruct(z.as_slice())
    }
}

/// Offline stage: POD of the dual snapshots, EIM points completed by the
/// quadrature points, and the Gappy matrices.
pub fn gappy_offline(snapshots: &[&[f64]], eps: f64, quadrature: &[usize], ip: &IpL2) -> Result<GappyModel> {
    let basis = snapshot_pod(snapshots, eps, ip)?;
    let points = eim_select(&basis.modes, quadrature)?;
    GappyModel::new(basis, points, snapshots[0].len())
}

/// Online stage: coefficients and the reconstructed field.
pub fn gappy_online(model: &GappyModel, values: &[f64]) -> Result<(DVector<f64>, Vec<f64>)> {
    let z = model.coefficients(values)?;
    let field = model.field(&z);
    Ok((z, field))
}
