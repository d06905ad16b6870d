use super::gappy::{gappy_offline, GappyModel};
use crate::behavior::MaterialState;
use crate::csvio::{read_table, write_table};
use crate::error::{Error, Result};
use crate::fem::{GlobalIntegrationTable, IpL2, ModeStrains, NodalL2, WeightedPoint};
use crate::hf::{HfModel, Snapshot, SnapshotArchive};
use crate::hyper::{build_ecm_system, nnomp, ReducedQuadrature};
use crate::mesh::Mesh;
use crate::pod::{snapshot_pod, ReducedBasis};
use crate::tensor::SymTensor;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Dual quantity: cumulated plasticity or one stress component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Quantity {
    P,
    Sigma(usize),
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::P,
        Quantity::Sigma(0),
        Quantity::Sigma(1),
        Quantity::Sigma(2),
        Quantity::Sigma(3),
        Quantity::Sigma(4),
        Quantity::Sigma(5),
    ];

    pub fn index(self) -> usize {
        match self {
            Quantity::P => 0,
            Quantity::Sigma(c) => 1 + c,
        }
    }

    pub fn name(self) -> &'static str {
        ["p", "s11", "s22", "s33", "s12", "s23", "s31"][self.index()]
    }

    pub fn parse(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown quantity '{s}' (expected p, s11 .. s31)")))
    }

    pub fn value(self, stress: &SymTensor, state: &MaterialState) -> f64 {
        match self {
            Quantity::P => state.p,
            Quantity::Sigma(c) => stress.0[c],
        }
    }

    /// HF field of this quantity at every integration point.
    pub fn field(self, snap: &Snapshot) -> Vec<f64> {
        match self {
            Quantity::P => snap.p(),
            Quantity::Sigma(c) => snap.stress_component(c),
        }
    }
}

impl TryFrom<String> for Quantity {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Quantity::parse(&s)
    }
}

impl From<Quantity> for String {
    fn from(q: Quantity) -> String {
        q.name().to_owned()
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Compression tolerances of the offline stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReductionTolerances {
    pub pod: f64,
    pub ecm: f64,
    pub gappy: f64,
}

impl Default for ReductionTolerances {
    fn default() -> Self {
        ReductionTolerances {
            pod: 1e-5,
            ecm: 1e-4,
            gappy: 1e-5,
        }
    }
}

/// Sizes and timings of a model build.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub snapshots: usize,
    pub modes: usize,
    pub quadrature_points: usize,
    pub quadrature_residual: f64,
    pub dual_modes: Vec<usize>,
    pub gappy_points: Vec<usize>,
    pub nnomp_seconds: f64,
}

/// Hyper-reduced model: primal POD basis, reduced quadrature and one
/// Gappy model per dual quantity, with the union of all their points.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub primal: ReducedBasis,
    pub quadrature: ReducedQuadrature,
    pub duals: Vec<GappyModel>,
    /// Sorted union of the quadrature and every Gappy point set.
    pub union_points: Vec<usize>,
    pub(crate) strains: ModeStrains,
    pub(crate) quad_points: Vec<WeightedPoint>,
    /// Position in `union_points` of each quadrature point.
    pub(crate) quad_pos: Vec<usize>,
    /// Positions in `union_points` of each dual quantity's points.
    pub(crate) dual_pos: Vec<Vec<usize>>,
}

impl ReducedModel {
    pub fn new(
        mesh: &Mesh,
        table: &GlobalIntegrationTable,
        primal: ReducedBasis,
        quadrature: ReducedQuadrature,
        duals: Vec<GappyModel>,
    ) -> Result<Self> {
        if duals.len() != Quantity::ALL.len() {
            return Err(Error::Dimension(format!("{} dual models, expected 7", duals.len())));
        }
        if primal.modes.iter().any(|m| m.len() != mesh.dof_count()) {
            return Err(Error::Dimension("primal modes do not match the mesh".into()));
        }
        let mut union: Vec<usize> = quadrature.indices.clone();
        for d in &duals {
            union.extend_from_slice(&d.points);
        }
        union.sort_unstable();
        union.dedup();
        if union.last().is_some_and(|&k| k >= table.len()) {
            return Err(Error::Dimension("reduced point index beyond the integration table".into()));
        }
        let pos = |k: usize| union.binary_search(&k).expect("point in union");
        let quad_pos = quadrature.indices.iter().map(|&k| pos(k)).collect();
        let dual_pos = duals.iter().map(|d| d.points.iter().map(|&k| pos(k)).collect()).collect();
        let strains = ModeStrains::build(mesh, table, &primal.modes, &union);
        Ok(ReducedModel {
            quad_points: quadrature.points(),
            primal,
            quadrature,
            duals,
            union_points: union,
            strains,
            quad_pos,
            dual_pos,
        })
    }

    pub fn n(&self) -> usize {
        self.primal.n()
    }

    pub fn dual(&self, q: Quantity) -> &GappyModel {
        &self.duals[q.index()]
    }

    pub fn dual_positions(&self, q: Quantity) -> &[usize] {
        &self.dual_pos[q.index()]
    }

    /// Builds the model from HF snapshots: POD, ECM/NNOMP and Gappy-POD.
    pub fn build(hf: &HfModel, archive: &SnapshotArchive, tol: ReductionTolerances) -> Result<(Self, BuildReport)> {
        if archive.is_empty() {
            return Err(Error::Config("cannot build a reduced model from an empty archive".into()));
        }
        let (mesh, table) = (hf.mesh(), hf.table());
        let snaps: Vec<&Snapshot> = archive.iter().map(|(_, s)| s).collect();
        let u: Vec<&[f64]> = snaps.iter().map(|s| s.u.as_slice()).collect();
        let primal = snapshot_pod(&u, tol.pod, &NodalL2::new(mesh, table))?;
        if primal.is_empty() {
            return Err(Error::DegenerateModes("displacement snapshots are all zero".into()));
        }

        let all: Vec<usize> = (0..table.len()).collect();
        let full_strains = ModeStrains::build(mesh, table, &primal.modes, &all);
        let stresses: Vec<&[SymTensor]> = snaps.iter().map(|s| s.stresses.as_slice()).collect();
        let system = build_ecm_system(table, &stresses, &full_strains)?;
        let start = Instant::now();
        let quadrature = nnomp(&system.j, &system.g, tol.ecm)?.quadrature;
        let nnomp_seconds = start.elapsed().as_secs_f64();

        let ip = IpL2::new(table);
        let mut duals = Vec::with_capacity(Quantity::ALL.len());
        for q in Quantity::ALL {
            let fields: Vec<Vec<f64>> = snaps.iter().map(|s| q.field(s)).collect();
            let refs: Vec<&[f64]> = fields.iter().map(Vec::as_slice).collect();
            duals.push(gappy_offline(&refs, tol.gappy, &quadrature.indices, &ip).map_err(|e| match e {
                Error::DegenerateModes(m) => Error::DegenerateModes(format!("{q}: {m}")),
                Error::IllPosed(m) => Error::IllPosed(format!("{q}: {m}")),
                other => other,
            })?);
        }
        let report = BuildReport {
            snapshots: snaps.len(),
            modes: primal.n(),
            quadrature_points: quadrature.len(),
            quadrature_residual: quadrature.residual,
            dual_modes: duals.iter().map(GappyModel::n).collect(),
            gappy_points: duals.iter().map(|d| d.points.len()).collect(),
            nnomp_seconds,
        };
        log::info!(
            "reduced model: {} snapshots, n = {}, d = {} (residual {:e}, {:.2} s), dual modes {:?}",
            report.snapshots,
            report.modes,
            report.quadrature_points,
            report.quadrature_residual,
            report.nnomp_seconds,
            report.dual_modes
        );
        Ok((ReducedModel::new(mesh, table, primal, quadrature, duals)?, report))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.primal.save(dir, "u")?;
        self.quadrature.save(&dir.join("quadrature.csv"))?;
        for (q, d) in Quantity::ALL.iter().zip(&self.duals) {
            d.basis.save(dir, q.name())?;
            write_table(
                &dir.join(format!("{}_points.csv", q.name())),
                &["index"],
                d.points.iter().map(|k| [*k as f64]),
            )?;
        }
        Ok(())
    }

    pub fn load(dir: &Path, mesh: &Mesh, table: &GlobalIntegrationTable) -> Result<Self> {
        let primal = ReducedBasis::load(dir, "u")?;
        let quadrature = ReducedQuadrature::load(&dir.join("quadrature.csv"))?;
        let mut duals = Vec::new();
        for q in Quantity::ALL {
            let mut basis = ReducedBasis::load(dir, q.name())?;
            if basis.modes.iter().all(|m| m.is_empty()) {
                basis.modes.clear();
            }
            let (_, rows) = read_table(&dir.join(format!("{}_points.csv", q.name())))?;
            let points = rows.iter().map(|r| r[0] as usize).collect();
            duals.push(GappyModel::new(basis, points, table.len())?);
        }
        ReducedModel::new(mesh, table, primal, quadrature, duals)
    }
}
