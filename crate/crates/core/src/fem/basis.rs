//! Bases of displacement fields seen through their strains at integration
//! points. The same assembly routine consumes the finite-element basis and
//! reduced bases.

use super::GlobalIntegrationTable;
use crate::mesh::Mesh;
use crate::par;
use crate::tensor::{SymTensor, Voigt};
use std::borrow::Cow;

/// Basis index paired with the engineering-Voigt strain of that basis
/// function at one integration point.
pub type LocalStrain = (usize, Voigt);

pub trait StrainBasis: Sync {
    fn dim(&self) -> usize;

    /// Nonzero basis strains at global integration point `ip`.
    fn strains_at(&self, ip: usize) -> Cow<'_, [LocalStrain]>;
}

/// Strain of the vector shape function `N_a e_c` given `grad N_a`.
pub fn shape_strain(component: usize, g: &[f64; 3]) -> Voigt {
    let mut v = Voigt::zeros();
    match component {
        0 => {
            v[0] = g[0];
            v[3] = g[1];
            v[5] = g[2];
        }
        1 => {
            v[1] = g[1];
            v[3] = g[0];
            v[4] = g[2];
        }
        _ => {
            v[2] = g[2];
            v[4] = g[1];
            v[5] = g[0];
        }
    }
    v
}

/// Finite-element basis over the unconstrained dofs.
pub struct FeBasis<'a> {
    mesh: &'a Mesh,
    table: &'a GlobalIntegrationTable,
    free_dofs: Vec<usize>,
    free_index: Vec<Option<usize>>,
}

impl<'a> FeBasis<'a> {
    pub fn new(mesh: &'a Mesh, table: &'a GlobalIntegrationTable) -> Self {
        let free_dofs = mesh.free_dofs();
        let mut free_index = vec![None; mesh.dof_count()];
        for (i, &d) in free_dofs.iter().enumerate() {
            free_index[d] = Some(i);
        }
        FeBasis {
            mesh,
            table,
            free_dofs,
            free_index,
        }
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    /// Restricts a full nodal vector to the free dofs.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_dofs.iter().map(|&d| full[d]).collect()
    }

    /// Expands free-dof coefficients to a full nodal vector (zeros on the
    /// constrained nodes).
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.mesh.dof_count()];
        for (&d, &c) in self.free_dofs.iter().zip(coeffs) {
            full[d] = c;
        }
        full
    }

    /// The FE basis functions as explicit nodal fields.
    pub fn as_modes(&self) -> Vec<Vec<f64>> {
        (0..self.free_dofs.len())
            .map(|i| {
                let mut m = vec![0.0; self.mesh.dof_count()];
                m[self.free_dofs[i]] = 1.0;
                m
            })
            .collect()
    }
}

impl StrainBasis for FeBasis<'_> {
    fn dim(&self) -> usize {
        self.free_dofs.len()
    }

    fn strains_at(&self, ip: usize) -> Cow<'_, [LocalStrain]> {
        let p = self.table.point(ip);
        let el = &self.mesh.elements()[p.element];
        let mut out = Vec::with_capacity(3 * el.nodes.len());
        for (&node, g) in el.nodes.iter().zip(&p.gradients) {
            for c in 0..3 {
                if let Some(i) = self.free_index[3 * node + c] {
                    out.push((i, shape_strain(c, g)));
                }
            }
        }
        Cow::Owned(out)
    }
}

/// Strains of explicit nodal modes, tabulated on a subset of points.
#[derive(Clone, Debug, Default)]
pub struct ModeStrains {
    dim: usize,
    entries: Vec<Option<Vec<LocalStrain>>>,
}

impl ModeStrains {
    pub fn build(mesh: &Mesh, table: &GlobalIntegrationTable, modes: &[Vec<f64>], ips: &[usize]) -> Self {
        let rows = par::map_slice(ips, |&k| {
            modes
                .iter()
                .enumerate()
                .filter_map(|(i, m)| {
                    let e = table.strain(mesh, m, k).to_strain_voigt();
                    (e.iter().any(|v| *v != 0.0)).then_some((i, e))
                })
                .collect::<Vec<_>>()
        });
        let mut entries = vec![None; table.len()];
        for (&k, row) in ips.iter().zip(rows) {
            entries[k] = Some(row);
        }
        ModeStrains {
            dim: modes.len(),
            entries,
        }
    }

    pub fn has(&self, ip: usize) -> bool {
        self.entries.get(ip).is_some_and(|e| e.is_some())
    }

    /// Strain of `sum_i coeffs[i] mode_i` at a tabulated point.
    pub fn combine(&self, ip: usize, coeffs: &[f64]) -> SymTensor {
        let mut v = Voigt::zeros();
        if let Some(Some(row)) = self.entries.get(ip) {
            for (i, e) in row {
                v += coeffs[*i] * e;
            }
        }
        SymTensor::from_strain_voigt(&v)
    }
}

impl StrainBasis for ModeStrains {
    fn dim(&self) -> usize {
        self.dim
    }

    fn strains_at(&self, ip: usize) -> Cow<'_, [LocalStrain]> {
        match self.entries.get(ip) {
            Some(Some(row)) => Cow::Borrowed(row.as_slice()),
            _ => Cow::Owned(Vec::new()),
        }
    }
}
