use crate::error::{Error, Result};
use crate::fem::{GlobalIntegrationTable, StrainBasis};
use crate::par;
use crate::tensor::SymTensor;
use nalgebra::{DMatrix, DVector};

/// Cubature system: `J[q, k] = sigma_s(x_k) : eps(psi_m)(x_k)` with
/// `q = s * n + m`, and `g = J nu` the exact integrals.
#[derive(Clone, Debug)]
pub struct EcmSystem {
    pub j: DMatrix<f64>,
    pub g: DVector<f64>,
    pub modes: usize,
    pub snapshots: usize,
}

/// Builds the system from snapshot stress fields (one slice of `N_G`
/// tensors per snapshot) and mode strains available at every point.
pub fn build_ecm_system<B: StrainBasis + ?Sized>(
    table: &GlobalIntegrationTable,
    stresses: &[&[SymTensor]],
    modes: &B,
) -> Result<EcmSystem> {
    let ng = table.len();
    if stresses.iter().any(|s| s.len() != ng) {
        return Err(Error::Dimension("stress snapshots do not match the integration table".into()));
    }
    let n = modes.dim();
    let rows = n * stresses.len();
    let columns = par::map_indexed(ng, |k| {
        let mut col = vec![0.0; rows];
        for (i, e) in modes.strains_at(k).iter() {
            for (s, sig) in stresses.iter().enumerate() {
                col[s * n + i] = sig[k].to_stress_voigt().dot(e);
            }
        }
        col
    });
    let j = DMatrix::from_fn(rows, ng, |q, k| columns[k][q]);
    let nu = DVector::from_vec(table.measures());
    let g = &j * nu;
    Ok(EcmSystem {
        j,
        g,
        modes: n,
        snapshots: stresses.len(),
    })
}
