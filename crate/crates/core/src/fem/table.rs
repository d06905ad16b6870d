use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::tensor::SymTensor;

/// One integration point of the high-fidelity quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationPoint {
    pub element: usize,
    pub local: usize,
    pub region: u32,
    pub position: Point,
    /// Reference weight times `|det J|`; doubles as the measure of the
    /// point's cell when integration-point fields are treated as piecewise
    /// constant.
    pub measure: f64,
    pub shape: Vec<f64>,
    /// Physical gradients of the element shape functions.
    pub gradients: Vec<[f64; 3]>,
}

/// Global numbering of every integration point of the mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalIntegrationTable {
    points: Vec<IntegrationPoint>,
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inverse3(m: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let inv_det = 1.0 / det;
    [
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det,
        ],
    ]
}

impl GlobalIntegrationTable {
    pub fn build(mesh: &Mesh) -> Result<Self> {
        let mut points = Vec::new();
        for (e, el) in mesh.elements().iter().enumerate() {
            let coords: Vec<Point> = el.nodes.iter().map(|&i| mesh.nodes()[i]).collect();
            for (local, (xi, w)) in el.kind.quadrature().into_iter().enumerate() {
                let shape = el.kind.shape(xi);
                let dref = el.kind.shape_derivatives(xi);
                // jac[i][j] = d x_j / d xi_i
                let mut jac = [[0.0; 3]; 3];
                for (x, d) in coords.iter().zip(&dref) {
                    for i in 0..3 {
                        for j in 0..3 {
                            jac[i][j] += d[i] * x[j];
                        }
                    }
                }
                let det = det3(&jac);
                if !(det > 0.0) {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} has non-positive Jacobian determinant {det:e} at point {local}"
                    )));
                }
                let inv = inverse3(&jac, det);
                let gradients = dref
                    .iter()
                    .map(|d| {
                        let mut g = [0.0; 3];
                        for j in 0..3 {
                            g[j] = inv[j][0] * d[0] + inv[j][1] * d[1] + inv[j][2] * d[2];
                        }
                        g
                    })
                    .collect();
                let mut position = [0.0; 3];
                for (x, n) in coords.iter().zip(&shape) {
                    for d in 0..3 {
                        position[d] += n * x[d];
                    }
                }
                points.push(IntegrationPoint {
                    element: e,
                    local,
                    region: el.region,
                    position,
                    measure: w * det,
                    shape,
                    gradients,
                });
            }
        }
        Ok(GlobalIntegrationTable { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[IntegrationPoint] {
        &self.points
    }

    pub fn point(&self, k: usize) -> &IntegrationPoint {
        &self.points[k]
    }

    pub fn measures(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.measure).collect()
    }

    pub fn volume(&self) -> f64 {
        self.points.iter().map(|p| p.measure).sum()
    }

    /// Whether point `k` belongs to `region` (`None` selects everything).
    pub fn in_region(&self, k: usize, region: Option<u32>) -> bool {
        region.is_none_or(|r| self.points[k].region == r)
    }

    /// Small-strain tensor of a nodal displacement field at point `k`.
    pub fn strain(&self, mesh: &Mesh, u: &[f64], k: usize) -> SymTensor {
        let p = &self.points[k];
        let el = &mesh.elements()[p.element];
        let mut grad = [[0.0; 3]; 3];
        for (&node, g) in el.nodes.iter().zip(&p.gradients) {
            for i in 0..3 {
                let ui = u[3 * node + i];
                for j in 0..3 {
                    grad[i][j] += ui * g[j];
                }
            }
        }
        SymTensor::sym_from_matrix(&grad)
    }

    /// Interpolates a nodal field with `width` components per node.
    pub fn interpolate(&self, mesh: &Mesh, field: &[f64], width: usize, k: usize, out: &mut [f64]) {
        let p = &self.points[k];
        let el = &mesh.elements()[p.element];
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&node, n) in el.nodes.iter().zip(&p.shape) {
            for c in 0..width {
                out[c] += n * field[width * node + c];
            }
        }
    }

    pub fn interpolate_scalar(&self, mesh: &Mesh, field: &[f64], k: usize) -> f64 {
        let mut v = [0.0];
        self.interpolate(mesh, field, 1, k, &mut v);
        v[0]
    }
}

/// Validates a global point index.
pub fn strain_at_ip(
    mesh: &Mesh,
    table: &GlobalIntegrationTable,
    u: &[f64],
    ip: usize,
) -> Result<SymTensor> {
    if ip >= table.len() {
        return Err(Error::Dimension(format!(
            "integration point {ip} out of range ({} points)",
            table.len()
        )));
    }
    if u.len() != mesh.dof_count() {
        return Err(Error::Dimension(format!(
            "displacement has {} entries, mesh has {} dofs",
            u.len(),
            mesh.dof_count()
        )));
    }
    Ok(table.strain(mesh, u, ip))
}
