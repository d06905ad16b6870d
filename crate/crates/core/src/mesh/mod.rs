//! Meshes: geometry, connectivity, labeled boundary facets, region ids.

mod element;
mod generator;
mod io;

pub use element::{ElementKind, FacetKind};
pub use generator::{BoxMeshBuilder, Waist};
pub use io::{read_mesh, write_mesh, parse_mesh};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub type Point = [f64; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub kind: ElementKind,
    pub nodes: Vec<usize>,
    pub region: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub kind: FacetKind,
    pub nodes: Vec<usize>,
    pub label: String,
}

/// Zero-displacement node set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub label: String,
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<Element>,
    facets: Vec<Facet>,
    dirichlet: NodeSet,
    /// Element owning each facet, used to orient normals outward.
    facet_owner: Vec<usize>,
    constrained: Vec<bool>,
}

impl Mesh {
    /// Builds and validates a mesh. Jacobian positivity is checked when the
    /// integration table is built.
    pub fn new(
        nodes: Vec<Point>,
        elements: Vec<Element>,
        facets: Vec<Facet>,
        dirichlet: NodeSet,
    ) -> Result<Self> {
        let n = nodes.len();
        if elements.is_empty() {
            return Err(Error::InvalidMesh("mesh has no elements".into()));
        }
        for (e, el) in elements.iter().enumerate() {
            if el.nodes.len() != el.kind.node_count() {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has {} nodes, expected {}",
                    el.nodes.len(),
                    el.kind.node_count()
                )));
            }
            if let Some(&bad) = el.nodes.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} references node {bad} >= {n}"
                )));
            }
        }
        for (f, facet) in facets.iter().enumerate() {
            if facet.nodes.len() != facet.kind.node_count() {
                return Err(Error::InvalidMesh(format!("facet {f} has a wrong node count")));
            }
            if let Some(&bad) = facet.nodes.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "facet {f} references node {bad} >= {n}"
                )));
            }
        }
        if let Some(&bad) = dirichlet.nodes.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidMesh(format!(
                "dirichlet set references node {bad} >= {n}"
            )));
        }
        let mut node_elements: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, el) in elements.iter().enumerate() {
            for &i in &el.nodes {
                node_elements[i].push(e);
            }
        }
        let mut facet_owner = Vec::with_capacity(facets.len());
        for (f, facet) in facets.iter().enumerate() {
            let owner = node_elements[facet.nodes[0]]
                .iter()
                .copied()
                .find(|&e| facet.nodes.iter().all(|i| elements[e].nodes.contains(i)))
                .ok_or_else(|| {
                    Error::InvalidMesh(format!("facet {f} does not lie on any element"))
                })?;
            facet_owner.push(owner);
        }
        let mut constrained = vec![false; n];
        for &i in &dirichlet.nodes {
            constrained[i] = true;
        }
        Ok(Mesh {
            nodes,
            elements,
            facets,
            dirichlet,
            facet_owner,
            constrained,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn dirichlet(&self) -> &NodeSet {
        &self.dirichlet
    }

    pub fn is_constrained(&self, node: usize) -> bool {
        self.constrained[node]
    }

    pub fn facet_owner(&self, facet: usize) -> usize {
        self.facet_owner[facet]
    }

    pub fn regions(&self) -> BTreeSet<u32> {
        self.elements.iter().map(|e| e.region).collect()
    }

    pub fn facet_labels(&self) -> BTreeSet<&str> {
        self.facets.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        let el = &self.elements[e];
        let mut c = [0.0; 3];
        for &i in &el.nodes {
            for d in 0..3 {
                c[d] += self.nodes[i][d];
            }
        }
        c.map(|v| v / el.nodes.len() as f64)
    }

    /// Number of displacement components (3 per node).
    pub fn dof_count(&self) -> usize {
        3 * self.nodes.len()
    }

    /// Global dof indices that are not constrained, in increasing order.
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.dof_count())
            .filter(|&d| !self.constrained[d / 3])
            .collect()
    }
}
