//! L2 inner products of nodal and integration-point fields.

use super::GlobalIntegrationTable;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::par;
use crate::tensor::SymTensor;
use nalgebra::DMatrix;

/// A field that can be integrated against another one.
#[derive(Clone, Copy, Debug)]
pub enum FieldRef<'a> {
    /// Nodal scalar values, interpolated to the integration points.
    NodalScalar(&'a [f64]),
    /// Nodal 3-vectors (displacement layout), interpolated likewise.
    NodalVector(&'a [f64]),
    /// One scalar per integration point, constant on its cell.
    IpScalar(&'a [f64]),
    /// One symmetric tensor per integration point.
    IpTensor(&'a [SymTensor]),
}

impl FieldRef<'_> {
    fn width(&self) -> usize {
        match self {
            FieldRef::NodalScalar(_) | FieldRef::IpScalar(_) => 1,
            FieldRef::NodalVector(_) => 3,
            FieldRef::IpTensor(_) => 6,
        }
    }

    fn check(&self, mesh: &Mesh, table: &GlobalIntegrationTable) -> Result<()> {
        let (len, expected) = match self {
            FieldRef::NodalScalar(v) => (v.len(), mesh.node_count()),
            FieldRef::NodalVector(v) => (v.len(), mesh.dof_count()),
            FieldRef::IpScalar(v) => (v.len(), table.len()),
            FieldRef::IpTensor(v) => (v.len(), table.len()),
        };
        if len != expected {
            return Err(Error::Dimension(format!(
                "field has {len} entries, expected {expected}"
            )));
        }
        Ok(())
    }

    fn value_at(&self, mesh: &Mesh, table: &GlobalIntegrationTable, k: usize, out: &mut [f64; 6]) {
        match self {
            FieldRef::NodalScalar(v) => table.interpolate(mesh, v, 1, k, &mut out[..1]),
            FieldRef::NodalVector(v) => table.interpolate(mesh, v, 3, k, &mut out[..3]),
            FieldRef::IpScalar(v) => out[0] = v[k],
            FieldRef::IpTensor(v) => {
                // Scale shear terms so the plain dot product is the double contraction.
                let t = &v[k].0;
                let r2 = std::f64::consts::SQRT_2;
                *out = [t[0], t[1], t[2], r2 * t[3], r2 * t[4], r2 * t[5]];
            }
        }
    }
}

/// `sum_k nu_k a(x_k) . b(x_k)`, optionally restricted to one region.
pub fn l2_inner_product(
    mesh: &Mesh,
    table: &GlobalIntegrationTable,
    a: FieldRef<'_>,
    b: FieldRef<'_>,
    region: Option<u32>,
) -> Result<f64> {
    a.check(mesh, table)?;
    b.check(mesh, table)?;
    if a.width() != b.width() {
        return Err(Error::Dimension(format!(
            "cannot pair fields with {} and {} components",
            a.width(),
            b.width()
        )));
    }
    let w = a.width();
    let mut va = [0.0; 6];
    let mut vb = [0.0; 6];
    let mut sum = 0.0;
    for k in 0..table.len() {
        if !table.in_region(k, region) {
            continue;
        }
        a.value_at(mesh, table, k, &mut va);
        b.value_at(mesh, table, k, &mut vb);
        let d: f64 = va[..w].iter().zip(&vb[..w]).map(|(x, y)| x * y).sum();
        sum += table.point(k).measure * d;
    }
    Ok(sum)
}

/// Inner product on flat field vectors, used by the POD.
pub trait InnerProduct: Sync {
    fn dot(&self, a: &[f64], b: &[f64]) -> f64;

    /// Gram matrix of a family of fields.
    fn gram(&self, fields: &[&[f64]]) -> DMatrix<f64> {
        let n = fields.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let values = par::map_slice(&pairs, |&(i, j)| self.dot(fields[i], fields[j]));
        let mut g = DMatrix::zeros(n, n);
        for (&(i, j), v) in pairs.iter().zip(values) {
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        g
    }

    fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }
}

/// L2 product of scalar integration-point fields: `sum_k nu_k a_k b_k`.
#[derive(Clone, Debug)]
pub struct IpL2 {
    weights: Vec<f64>,
}

impl IpL2 {
    pub fn new(table: &GlobalIntegrationTable) -> Self {
        IpL2 {
            weights: table.measures(),
        }
    }

    /// Restricts the product to one region.
    pub fn restricted(table: &GlobalIntegrationTable, region: Option<u32>) -> Self {
        IpL2 {
            weights: (0..table.len())
                .map(|k| if table.in_region(k, region) { table.point(k).measure } else { 0.0 })
                .collect(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl InnerProduct for IpL2 {
    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }
}

/// L2 product of nodal displacement fields, integrated with the
/// high-fidelity quadrature.
pub struct NodalL2<'a> {
    mesh: &'a Mesh,
    table: &'a GlobalIntegrationTable,
}

impl<'a> NodalL2<'a> {
    pub fn new(mesh: &'a Mesh, table: &'a GlobalIntegrationTable) -> Self {
        NodalL2 { mesh, table }
    }

    /// Displacement interpolated at every point, flattened `[k*3 + c]`.
    pub fn at_points(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 3 * self.table.len()];
        for k in 0..self.table.len() {
            self.table.interpolate(self.mesh, u, 3, k, &mut out[3 * k..3 * k + 3]);
        }
        out
    }

    fn weighted(&self, pa: &[f64], pb: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (k, p) in self.table.points().iter().enumerate() {
            let d = pa[3 * k] * pb[3 * k] + pa[3 * k + 1] * pb[3 * k + 1] + pa[3 * k + 2] * pb[3 * k + 2];
            sum += p.measure * d;
        }
        sum
    }
}

impl InnerProduct for NodalL2<'_> {
    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weighted(&self.at_points(a), &self.at_points(b))
    }

    fn gram(&self, fields: &[&[f64]]) -> DMatrix<f64> {
        let interp = par::map_slice(fields, |f| self.at_points(f));
        let n = fields.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let values = par::map_slice(&pairs, |&(i, j)| self.weighted(&interp[i], &interp[j]));
        let mut g = DMatrix::zeros(n, n);
        for (&(i, j), v) in pairs.iter().zip(values) {
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        g
    }
}
