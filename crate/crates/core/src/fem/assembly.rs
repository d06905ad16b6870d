use super::basis::{LocalStrain, StrainBasis};
use crate::error::{Error, Result};
use crate::par;
use crate::tensor::{Stiffness, SymTensor, Voigt};
use nalgebra::{DMatrix, DVector};

/// Quadrature point: global integration point index and weight.
pub type WeightedPoint = (usize, f64);

struct LocalContribution {
    entries: Vec<LocalStrain>,
    force: Vec<f64>,
    tangent: Vec<f64>,
}

/// Internal forces `F_i = sum_k w_k sigma_k : eps(phi_i)(x_k)` and, when
/// tangents are given, `K_ij = sum_k w_k eps(phi_i) : K_k : eps(phi_j)`.
///
/// Local contributions are computed per point (possibly in parallel) and
/// reduced sequentially in point order, so results do not depend on the
/// thread count.
pub fn assemble_forces_and_tangent<B: StrainBasis + ?Sized>(
    basis: &B,
    points: &[WeightedPoint],
    stresses: &[SymTensor],
    tangents: Option<&[Stiffness]>,
) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
    if stresses.len() != points.len() || tangents.is_some_and(|t| t.len() != points.len()) {
        return Err(Error::Dimension(format!(
            "{} quadrature points but {} stress evaluations",
            points.len(),
            stresses.len()
        )));
    }
    let n = basis.dim();
    let locals = par::map_indexed(points.len(), |q| {
        let (ip, w) = points[q];
        let entries = basis.strains_at(ip).into_owned();
        let s: Voigt = stresses[q].to_stress_voigt();
        let force = entries.iter().map(|(_, e)| w * s.dot(e)).collect();
        let tangent = match tangents {
            Some(t) => {
                let ke: Vec<Voigt> = entries.iter().map(|(_, e)| t[q] * e).collect();
                let m = entries.len();
                let mut out = vec![0.0; m * m];
                for a in 0..m {
                    for b in 0..m {
                        out[a * m + b] = w * entries[a].1.dot(&ke[b]);
                    }
                }
                out
            }
            None => Vec::new(),
        };
        LocalContribution { entries, force, tangent }
    });

    let mut force = DVector::zeros(n);
    let mut tangent = tangents.map(|_| DMatrix::zeros(n, n));
    for local in &locals {
        let m = local.entries.len();
        for (a, (i, _)) in local.entries.iter().enumerate() {
            force[*i] += local.force[a];
        }
        if let Some(k) = tangent.as_mut() {
            for (a, (i, _)) in local.entries.iter().enumerate() {
                for (b, (j, _)) in local.entries.iter().enumerate() {
                    k[(*i, *j)] += local.tangent[a * m + b];
                }
            }
        }
    }
    Ok((force, tangent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{FeBasis, GlobalIntegrationTable};
    use crate::mesh::BoxMeshBuilder;

    #[test]
    fn zero_stress_gives_zero_force() {
        let mesh = BoxMeshBuilder::new([1.0; 3], [1, 1, 1]).build().unwrap();
        let table = GlobalIntegrationTable::build(&mesh).unwrap();
        let basis = FeBasis::new(&mesh, &table);
        let pts: Vec<_> = table.points().iter().enumerate().map(|(k, p)| (k, p.measure)).collect();
        let (f, _) = assemble_forces_and_tangent(&basis, &pts, &vec![SymTensor::ZERO; pts.len()], None).unwrap();
        assert!(f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn uniform_axial_stress_gives_face_nodal_forces() {
        // F_a = int sigma_11 dN_a/dx = s * int_face +/- N_a = +/- s * A / 4
        let s = 7.5;
        let mesh = BoxMeshBuilder::new([2.0, 1.0, 3.0], [1, 1, 1]).build().unwrap();
        let table = GlobalIntegrationTable::build(&mesh).unwrap();
        let basis = FeBasis::new(&mesh, &table);
        let pts: Vec<_> = table.points().iter().enumerate().map(|(k, p)| (k, p.measure)).collect();
        let sigma = SymTensor([s, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let (f, _) = assemble_forces_and_tangent(&basis, &pts, &vec![sigma; pts.len()], None).unwrap();
        let area = 1.0 * 3.0;
        for (node, x) in mesh.nodes().iter().enumerate() {
            let sign = if x[0] > 1.0 { 1.0 } else { -1.0 };
            assert!((f[3 * node] - sign * s * area / 4.0).abs() < 1e-12);
            assert!(f[3 * node + 1].abs() < 1e-12);
            assert!(f[3 * node + 2].abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_set_with_full_weights_matches_full_assembly() {
        let mesh = BoxMeshBuilder::new([2.0, 1.0, 1.0], [2, 1, 1]).clamp("xmin").build().unwrap();
        let table = GlobalIntegrationTable::build(&mesh).unwrap();
        let basis = FeBasis::new(&mesh, &table);
        let pts: Vec<_> = table.points().iter().enumerate().map(|(k, p)| (k, p.measure)).collect();
        let stresses: Vec<SymTensor> = (0..pts.len())
            .map(|k| SymTensor([k as f64, 1.0, -2.0, 0.5 * k as f64, 0.1, 0.0]))
            .collect();
        let tangent = vec![Stiffness::identity() * 3.0; pts.len()];
        let (f_full, k_full) = assemble_forces_and_tangent(&basis, &pts, &stresses, Some(&tangent)).unwrap();
        // Same points listed with an extra zero-weight one: identical sums.
        let mut pts2 = pts.clone();
        pts2.push((0, 0.0));
        let mut s2 = stresses.clone();
        s2.push(SymTensor([1e3; 6]));
        let mut t2 = tangent.clone();
        t2.push(Stiffness::identity());
        let (f_red, k_red) = assemble_forces_and_tangent(&basis, &pts2, &s2, Some(&t2)).unwrap();
        assert!((f_full - f_red).amax() < 1e-12);
        assert!((k_full.unwrap() - k_red.unwrap()).amax() < 1e-12);
    }
}
