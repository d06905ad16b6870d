//! Finite-element kernel: integration table, strains, inner products and
//! the generic force/tangent assembly.

mod assembly;
mod basis;
mod inner;
mod table;

pub use assembly::{assemble_forces_and_tangent, WeightedPoint};
pub use basis::{shape_strain, FeBasis, LocalStrain, ModeStrains, StrainBasis};
pub use inner::{l2_inner_product, FieldRef, InnerProduct, IpL2, NodalL2};
pub use table::{strain_at_ip, GlobalIntegrationTable, IntegrationPoint};

use crate::mesh::{FacetKind, Mesh, Point};

/// Quadrature point on a boundary facet.
#[derive(Clone, Debug)]
pub struct FacetPoint {
    pub position: Point,
    pub shape: Vec<f64>,
    /// Weight times surface Jacobian.
    pub measure: f64,
    pub normal: [f64; 3],
}

/// Quadrature of facet `f`, with normals oriented away from the owning element.
pub fn facet_quadrature(mesh: &Mesh, f: usize) -> Vec<FacetPoint> {
    let facet = &mesh.facets()[f];
    let coords: Vec<Point> = facet.nodes.iter().map(|&i| mesh.nodes()[i]).collect();
    let owner_c = mesh.element_centroid(mesh.facet_owner(f));
    let kind: FacetKind = facet.kind;
    kind.quadrature()
        .into_iter()
        .map(|(xi, w)| {
            let shape = kind.shape(xi);
            let d = kind.shape_derivatives(xi);
            let mut t1 = [0.0; 3];
            let mut t2 = [0.0; 3];
            let mut x = [0.0; 3];
            for ((c, n), dn) in coords.iter().zip(&shape).zip(&d) {
                for k in 0..3 {
                    x[k] += n * c[k];
                    t1[k] += dn[0] * c[k];
                    t2[k] += dn[1] * c[k];
                }
            }
            let mut nrm = [
                t1[1] * t2[2] - t1[2] * t2[1],
                t1[2] * t2[0] - t1[0] * t2[2],
                t1[0] * t2[1] - t1[1] * t2[0],
            ];
            let jac = (nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]).sqrt();
            nrm.iter_mut().for_each(|v| *v /= jac);
            let outward = (0..3).map(|k| (x[k] - owner_c[k]) * nrm[k]).sum::<f64>();
            if outward < 0.0 {
                nrm.iter_mut().for_each(|v| *v = -*v);
            }
            FacetPoint {
                position: x,
                shape,
                measure: w * jac,
                normal: nrm,
            }
        })
        .collect()
}
