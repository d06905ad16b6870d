//! Reference elements: shape functions, derivatives and quadrature rules.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Hex8,
    Tet4,
}

const GAUSS_2: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

const HEX8_CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

impl ElementKind {
    pub fn node_count(self) -> usize {
        match self {
            ElementKind::Hex8 => 8,
            ElementKind::Tet4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Hex8 => "hex8",
            ElementKind::Tet4 => "tet4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hex8" => Some(ElementKind::Hex8),
            "tet4" => Some(ElementKind::Tet4),
            _ => None,
        }
    }

    /// Quadrature points and reference weights: 2x2x2 Gauss for hexahedra,
    /// the one-point centroid rule for tetrahedra.
    pub fn quadrature(self) -> Vec<([f64; 3], f64)> {
        match self {
            ElementKind::Hex8 => {
                let mut pts = Vec::with_capacity(8);
                for &z in &[-GAUSS_2, GAUSS_2] {
                    for &y in &[-GAUSS_2, GAUSS_2] {
                        for &x in &[-GAUSS_2, GAUSS_2] {
                            pts.push(([x, y, z], 1.0));
                        }
                    }
                }
                pts
            }
            ElementKind::Tet4 => vec![([0.25, 0.25, 0.25], 1.0 / 6.0)],
        }
    }

    pub fn shape(self, xi: [f64; 3]) -> Vec<f64> {
        match self {
            ElementKind::Hex8 => HEX8_CORNERS
                .iter()
                .map(|c| 0.125 * (1.0 + c[0] * xi[0]) * (1.0 + c[1] * xi[1]) * (1.0 + c[2] * xi[2]))
                .collect(),
            ElementKind::Tet4 => vec![1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]],
        }
    }

    /// Derivatives of the shape functions with respect to reference coordinates.
    pub fn shape_derivatives(self, xi: [f64; 3]) -> Vec<[f64; 3]> {
        match self {
            ElementKind::Hex8 => HEX8_CORNERS
                .iter()
                .map(|c| {
                    let a = 1.0 + c[0] * xi[0];
                    let b = 1.0 + c[1] * xi[1];
                    let d = 1.0 + c[2] * xi[2];
                    [
                        0.125 * c[0] * b * d,
                        0.125 * a * c[1] * d,
                        0.125 * a * b * c[2],
                    ]
                })
                .collect(),
            ElementKind::Tet4 => vec![
                [-1.0, -1.0, -1.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FacetKind {
    Quad4,
    Tri3,
}

impl FacetKind {
    pub fn node_count(self) -> usize {
        match self {
            FacetKind::Quad4 => 4,
            FacetKind::Tri3 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FacetKind::Quad4 => "quad4",
            FacetKind::Tri3 => "tri3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quad4" => Some(FacetKind::Quad4),
            "tri3" => Some(FacetKind::Tri3),
            _ => None,
        }
    }

    pub fn quadrature(self) -> Vec<([f64; 2], f64)> {
        match self {
            FacetKind::Quad4 => {
                let mut pts = Vec::with_capacity(4);
                for &y in &[-GAUSS_2, GAUSS_2] {
                    for &x in &[-GAUSS_2, GAUSS_2] {
                        pts.push(([x, y], 1.0));
                    }
                }
                pts
            }
            FacetKind::Tri3 => vec![
                ([1.0 / 6.0, 1.0 / 6.0], 1.0 / 6.0),
                ([2.0 / 3.0, 1.0 / 6.0], 1.0 / 6.0),
                ([1.0 / 6.0, 2.0 / 3.0], 1.0 / 6.0),
            ],
        }
    }

    pub fn shape(self, xi: [f64; 2]) -> Vec<f64> {
        match self {
            FacetKind::Quad4 => [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
                .iter()
                .map(|c| 0.25 * (1.0 + c[0] * xi[0]) * (1.0 + c[1] * xi[1]))
                .collect(),
            FacetKind::Tri3 => vec![1.0 - xi[0] - xi[1], xi[0], xi[1]],
        }
    }

    pub fn shape_derivatives(self, xi: [f64; 2]) -> Vec<[f64; 2]> {
        match self {
            FacetKind::Quad4 => [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
                .iter()
                .map(|c| {
                    [
                        0.25 * c[0] * (1.0 + c[1] * xi[1]),
                        0.25 * (1.0 + c[0] * xi[0]) * c[1],
                    ]
                })
                .collect(),
            FacetKind::Tri3 => vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
        }
    }
}
