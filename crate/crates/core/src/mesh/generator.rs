use super::{Element, ElementKind, Facet, FacetKind, Mesh, NodeSet, Point};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Narrowing of the cross-section towards the middle of the x-extent
/// (a bow-tie profile). `depth` is the relative reduction at mid-length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waist {
    pub depth: f64,
}

/// Structured hexahedral box meshes with faces labeled
/// `xmin, xmax, ymin, ymax, zmin, zmax`.
#[derive(Clone, Debug)]
pub struct BoxMeshBuilder {
    lengths: [f64; 3],
    divisions: [usize; 3],
    origin: Point,
    waist: Option<Waist>,
    clamp: String,
    region_splits: Vec<f64>,
}

impl BoxMeshBuilder {
    pub fn new(lengths: [f64; 3], divisions: [usize; 3]) -> Self {
        BoxMeshBuilder {
            lengths,
            divisions,
            origin: [0.0; 3],
            waist: None,
            clamp: String::new(),
            region_splits: Vec::new(),
        }
    }

    pub fn origin(mut self, origin: Point) -> Self {
        self.origin = origin;
        self
    }

    pub fn waist(mut self, waist: Waist) -> Self {
        self.waist = Some(waist);
        self
    }

    /// Face whose nodes receive zero displacement.
    pub fn clamp(mut self, face: &str) -> Self {
        self.clamp = face.to_string();
        self
    }

    /// Region boundaries as fractions of the x-length; element `e` gets the
    /// number of splits lying below its centroid as region id.
    pub fn region_splits(mut self, splits: Vec<f64>) -> Self {
        self.region_splits = splits;
        self
    }

    pub fn build(&self) -> Result<Mesh> {
        let [nx, ny, nz] = self.divisions;
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidMesh("box divisions must be positive".into()));
        }
        if self.lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidMesh("box lengths must be positive".into()));
        }
        if let Some(w) = self.waist {
            if !(0.0..1.0).contains(&w.depth) {
                return Err(Error::InvalidMesh("waist depth must lie in [0, 1)".into()));
            }
        }
        let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
        let [lx, ly, lz] = self.lengths;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    let s = i as f64 / nx as f64;
                    let scale = match self.waist {
                        Some(w) => 1.0 - w.depth * (1.0 - (2.0 * s - 1.0).abs()),
                        None => 1.0,
                    };
                    let y = (j as f64 / ny as f64 - 0.5) * ly * scale + 0.5 * ly;
                    let z = (k as f64 / nz as f64 - 0.5) * lz * scale + 0.5 * lz;
                    nodes.push([
                        self.origin[0] + s * lx,
                        self.origin[1] + y,
                        self.origin[2] + z,
                    ]);
                }
            }
        }
        let mut elements = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let centroid = (i as f64 + 0.5) / nx as f64;
                    let region = self.region_splits.iter().filter(|&&s| s < centroid).count() as u32;
                    elements.push(Element {
                        kind: ElementKind::Hex8,
                        nodes: vec![
                            id(i, j, k),
                            id(i + 1, j, k),
                            id(i + 1, j + 1, k),
                            id(i, j + 1, k),
                            id(i, j, k + 1),
                            id(i + 1, j, k + 1),
                            id(i + 1, j + 1, k + 1),
                            id(i, j + 1, k + 1),
                        ],
                        region,
                    });
                }
            }
        }
        let mut facets = Vec::new();
        let quad = |label: &str, nodes: [usize; 4]| Facet {
            kind: FacetKind::Quad4,
            nodes: nodes.to_vec(),
            label: label.to_string(),
        };
        for k in 0..nz {
            for j in 0..ny {
                facets.push(quad("xmin", [id(0, j, k), id(0, j + 1, k), id(0, j + 1, k + 1), id(0, j, k + 1)]));
                facets.push(quad("xmax", [id(nx, j, k), id(nx, j + 1, k), id(nx, j + 1, k + 1), id(nx, j, k + 1)]));
            }
        }
        for k in 0..nz {
            for i in 0..nx {
                facets.push(quad("ymin", [id(i, 0, k), id(i + 1, 0, k), id(i + 1, 0, k + 1), id(i, 0, k + 1)]));
                facets.push(quad("ymax", [id(i, ny, k), id(i + 1, ny, k), id(i + 1, ny, k + 1), id(i, ny, k + 1)]));
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                facets.push(quad("zmin", [id(i, j, 0), id(i + 1, j, 0), id(i + 1, j + 1, 0), id(i, j + 1, 0)]));
                facets.push(quad("zmax", [id(i, j, nz), id(i + 1, j, nz), id(i + 1, j + 1, nz), id(i, j + 1, nz)]));
            }
        }
        let dirichlet = if self.clamp.is_empty() {
            NodeSet::default()
        } else {
            let mut set: Vec<usize> = facets
                .iter()
                .filter(|f| f.label == self.clamp)
                .flat_map(|f| f.nodes.iter().copied())
                .collect();
            if set.is_empty() {
                return Err(Error::InvalidMesh(format!("unknown clamp face '{}'", self.clamp)));
            }
            set.sort_unstable();
            set.dedup();
            NodeSet {
                label: self.clamp.clone(),
                nodes: set,
            }
        };
        Mesh::new(nodes, elements, facets, dirichlet)
    }
}
