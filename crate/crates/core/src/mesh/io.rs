//! Plain-text mesh format.
//!
//! ```text
//! # comment
//! nodes <count>
//! <x> <y> <z>                      (one line per node)
//! elements <count>
//! <hex8|tet4> <region> <node>...   (one line per element)
//! facets <count>
//! <quad4|tri3> <label> <node>...   (one line per facet)
//! dirichlet <label> <count>
//! <node> <node> ...                (whitespace separated, any layout)
//! ```
//!
//! Indices are zero-based. The `facets` and `dirichlet` blocks are optional.

use super::{Element, ElementKind, Facet, FacetKind, Mesh, NodeSet};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, &path.display().to_string())
}

pub fn parse_mesh(text: &str, file: &str) -> Result<Mesh> {
    let err = |line: usize, message: String| Error::Parse {
        file: file.to_string(),
        message: format!("line {}: {message}", line + 1),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    let mut nodes = Vec::new();
    let mut elements = Vec::new();
    let mut facets = Vec::new();
    let mut dirichlet = NodeSet::default();

    fn count(tok: Option<&str>) -> Option<usize> {
        tok.and_then(|t| t.parse().ok())
    }
    fn index(t: &str) -> Option<usize> {
        t.parse().ok()
    }

    while let Some((ln, header)) = lines.next() {
        let mut toks = header.split_whitespace();
        match toks.next() {
            Some("nodes") => {
                let n = count(toks.next()).ok_or_else(|| err(ln, "bad node count".into()))?;
                for _ in 0..n {
                    let (l, row) = lines.next().ok_or_else(|| err(ln, "truncated node block".into()))?;
                    let v: Vec<f64> = row
                        .split_whitespace()
                        .map(|t| t.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| err(l, e.to_string()))?;
                    if v.len() != 3 {
                        return Err(err(l, "node needs 3 coordinates".into()));
                    }
                    nodes.push([v[0], v[1], v[2]]);
                }
            }
            Some("elements") => {
                let n = count(toks.next()).ok_or_else(|| err(ln, "bad element count".into()))?;
                for _ in 0..n {
                    let (l, row) = lines.next().ok_or_else(|| err(ln, "truncated element block".into()))?;
                    let mut t = row.split_whitespace();
                    let kind = t
                        .next()
                        .and_then(ElementKind::parse)
                        .ok_or_else(|| err(l, "unknown element kind".into()))?;
                    let region = t
                        .next()
                        .and_then(|r| r.parse::<u32>().ok())
                        .ok_or_else(|| err(l, "missing region id".into()))?;
                    let conn: Option<Vec<usize>> = t.map(index).collect();
                    let conn = conn.ok_or_else(|| err(l, "bad connectivity".into()))?;
                    elements.push(Element { kind, nodes: conn, region });
                }
            }
            Some("facets") => {
                let n = count(toks.next()).ok_or_else(|| err(ln, "bad facet count".into()))?;
                for _ in 0..n {
                    let (l, row) = lines.next().ok_or_else(|| err(ln, "truncated facet block".into()))?;
                    let mut t = row.split_whitespace();
                    let kind = t
                        .next()
                        .and_then(FacetKind::parse)
                        .ok_or_else(|| err(l, "unknown facet kind".into()))?;
                    let label = t.next().ok_or_else(|| err(l, "missing facet label".into()))?;
                    let conn: Option<Vec<usize>> = t.map(index).collect();
                    let conn = conn.ok_or_else(|| err(l, "bad facet connectivity".into()))?;
                    facets.push(Facet {
                        kind,
                        nodes: conn,
                        label: label.to_string(),
                    });
                }
            }
            Some("dirichlet") => {
                let label = toks.next().ok_or_else(|| err(ln, "missing dirichlet label".into()))?;
                let n = count(toks.next()).ok_or_else(|| err(ln, "bad dirichlet count".into()))?;
                let mut ids = Vec::with_capacity(n);
                while ids.len() < n {
                    let (l, row) = lines.next().ok_or_else(|| err(ln, "truncated dirichlet block".into()))?;
                    for t in row.split_whitespace() {
                        ids.push(index(t).ok_or_else(|| err(l, format!("bad node index '{t}'")))?);
                    }
                }
                if ids.len() != n {
                    return Err(err(ln, "dirichlet block length mismatch".into()));
                }
                ids.sort_unstable();
                ids.dedup();
                dirichlet = NodeSet {
                    label: label.to_string(),
                    nodes: ids,
                };
            }
            Some(other) => return Err(err(ln, format!("unknown block '{other}'"))),
            None => {}
        }
    }
    Mesh::new(nodes, elements, facets, dirichlet)
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nlrom mesh");
    let _ = writeln!(out, "nodes {}", mesh.node_count());
    for p in mesh.nodes() {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    let _ = writeln!(out, "elements {}", mesh.elements().len());
    for e in mesh.elements() {
        let conn: Vec<String> = e.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "{} {} {}", e.kind.name(), e.region, conn.join(" "));
    }
    let _ = writeln!(out, "facets {}", mesh.facets().len());
    for f in mesh.facets() {
        let conn: Vec<String> = f.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "{} {} {}", f.kind.name(), f.label, conn.join(" "));
    }
    let d = mesh.dirichlet();
    if !d.nodes.is_empty() {
        let _ = writeln!(out, "dirichlet {} {}", d.label, d.nodes.len());
        let ids: Vec<String> = d.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "{}", ids.join(" "));
    }
    out
}
