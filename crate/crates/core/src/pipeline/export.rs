use crate::csvio::{read_table, write_table};
use crate::error::{Error, Result};
use crate::fem::GlobalIntegrationTable;
use crate::indicator::Region;
use crate::mesh::{ElementKind, Mesh};
use crate::rom::{Quantity, RomSolution};
use std::fmt::Write as _;
use std::path::Path;

/// Displacements and reconstructed dual fields of a transient, as written
/// to and read from disk.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FieldSeries {
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    /// `duals[q][step][k]`, indexed like [`Quantity::ALL`].
    pub duals: Vec<Vec<Vec<f64>>>,
}

impl FieldSeries {
    pub fn from_solution(solution: &RomSolution) -> Self {
        FieldSeries {
            times: solution.steps.iter().map(|s| s.time).collect(),
            u: solution.steps.iter().map(|s| s.u.clone()).collect(),
            duals: Quantity::ALL
                .iter()
                .map(|q| solution.steps.iter().map(|s| s.duals[q.index()].field.clone()).collect())
                .collect(),
        }
    }

    pub fn steps(&self) -> usize {
        self.times.len()
    }

    pub fn save(&self, dir: &Path, dofs: usize, points: usize) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_table(&dir.join("times.csv"), &["time"], self.times.iter().map(|t| [*t]))?;
        let u_header: Vec<String> = (0..dofs).map(|d| format!("u{d}")).collect();
        let refs: Vec<&str> = u_header.iter().map(String::as_str).collect();
        write_table(&dir.join("u.csv"), &refs, &self.u)?;
        let k_header: Vec<String> = (0..points).map(|k| format!("k{k}")).collect();
        let refs: Vec<&str> = k_header.iter().map(String::as_str).collect();
        for q in Quantity::ALL {
            write_table(&dir.join(format!("{q}.csv")), &refs, &self.duals[q.index()])?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let (_, times) = read_table(&dir.join("times.csv"))?;
        let (_, u) = read_table(&dir.join("u.csv"))?;
        let mut duals = Vec::new();
        for q in Quantity::ALL {
            duals.push(read_table(&dir.join(format!("{q}.csv")))?.1);
        }
        let series = FieldSeries {
            times: times.into_iter().map(|r| r[0]).collect(),
            u,
            duals,
        };
        if series.u.len() != series.steps() || series.duals.iter().any(|d| d.len() != series.steps()) {
            return Err(Error::Parse {
                file: dir.display().to_string(),
                message: "field files disagree on the number of steps".into(),
            });
        }
        Ok(series)
    }
}

fn vtk_cell_type(kind: ElementKind) -> u8 {
    match kind {
        ElementKind::Hex8 => 12,
        ElementKind::Tet4 => 10,
    }
}

/// Measure-weighted element averages of an integration-point field.
pub fn element_averages(mesh: &Mesh, table: &GlobalIntegrationTable, field: &[f64]) -> Vec<f64> {
    let mut sum = vec![0.0; mesh.elements().len()];
    let mut vol = vec![0.0; mesh.elements().len()];
    for (k, p) in table.points().iter().enumerate() {
        sum[p.element] += p.measure * field[k];
        vol[p.element] += p.measure;
    }
    sum.iter().zip(&vol).map(|(s, v)| s / v).collect()
}

/// Legacy ASCII VTK unstructured grid with the displacement as point data
/// and element-averaged dual quantities as cell data.
pub fn vtk_string(
    mesh: &Mesh,
    table: &GlobalIntegrationTable,
    title: &str,
    u: &[f64],
    duals: &[(&str, &[f64])],
) -> String {
    let mut s = String::new();
    let els = mesh.elements();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.node_count());
    for x in mesh.nodes() {
        let _ = writeln!(s, "{} {} {}", x[0], x[1], x[2]);
    }
    let size: usize = els.iter().map(|e| e.nodes.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", els.len());
    for e in els {
        let ids: Vec<String> = e.nodes.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "{} {}", e.nodes.len(), ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", els.len());
    for e in els {
        let _ = writeln!(s, "{}", vtk_cell_type(e.kind));
    }
    let _ = writeln!(s, "POINT_DATA {}\nVECTORS displacement double", mesh.node_count());
    for c in u.chunks(3) {
        let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "CELL_DATA {}\nSCALARS region int 1\nLOOKUP_TABLE default", els.len());
    for e in els {
        let _ = writeln!(s, "{}", e.region);
    }
    for (name, field) in duals {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in element_averages(mesh, table, field) {
            let _ = writeln!(s, "{v}");
        }
    }
    s
}

/// One VTK file per step.
pub fn write_vtk_series(dir: &Path, mesh: &Mesh, table: &GlobalIntegrationTable, series: &FieldSeries) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, t) in series.times.iter().enumerate() {
        let duals: Vec<(&str, &[f64])> = Quantity::ALL
            .iter()
            .map(|q| (q.name(), series.duals[q.index()][i].as_slice()))
            .collect();
        let text = vtk_string(mesh, table, &format!("step {i} time {t}"), &series.u[i], &duals);
        std::fs::write(dir.join(format!("step_{i:04}.vtk")), text)?;
    }
    Ok(())
}

/// Integral of every dual quantity over each region, one row per step.
pub fn write_region_integrals(
    path: &Path,
    table: &GlobalIntegrationTable,
    regions: &[Region],
    series: &FieldSeries,
) -> Result<()> {
    let mut header = vec!["step".to_string(), "time".to_string()];
    for q in Quantity::ALL {
        for r in regions {
            header.push(format!("{q}_{r}"));
        }
    }
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..series.steps()).map(|i| {
        let mut row = vec![i as f64, series.times[i]];
        for q in Quantity::ALL {
            let f = &series.duals[q.index()][i];
            for r in regions {
                row.push(
                    table
                        .points()
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| r.contains(table, *k))
                        .map(|(k, p)| p.measure * f[k])
                        .sum(),
                );
            }
        }
        row
    });
    write_table(path, &refs, rows)
}

/// Time series of every dual quantity at the integration point where `p`
/// is largest at the last step.
pub fn write_probe(path: &Path, series: &FieldSeries) -> Result<()> {
    let mut header = vec!["step", "time", "point"];
    header.extend(Quantity::ALL.iter().map(|q| q.name()));
    let probe = series.duals[0]
        .last()
        .map(|p| {
            p.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, v)| if *v > bv { (k, *v) } else { (bk, bv) })
                .0
        })
        .unwrap_or(0);
    let rows = (0..series.steps()).map(|i| {
        let mut row = vec![i as f64, series.times[i], probe as f64];
        row.extend(Quantity::ALL.iter().map(|q| series.duals[q.index()][i][probe]));
        row
    });
    write_table(path, &header, rows)
}
