use super::gpr::GprModel;
use super::measures::{gappy_residual, region_values, relative_error, Region};
use crate::csvio::write_table;
use crate::error::{Error, Result};
use crate::fem::{GlobalIntegrationTable, InnerProduct, IpL2};
use crate::hf::{HfModel, LoadingProgram, NewtonOptions, Snapshot, SnapshotArchive, Variability};
use crate::par;
use crate::rom::{run_rom_transient, Quantity, ReducedModel, RomSolution, RomStepRecord};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A dual quantity observed on a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monitor {
    pub quantity: Quantity,
    pub region: Region,
}

impl Monitor {
    pub fn new(quantity: Quantity, region: Region) -> Self {
        Monitor { quantity, region }
    }
}

impl std::fmt::Display for Monitor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@{}", self.quantity, self.region)
    }
}

/// ROM-Gappy-POD residual of one step on a monitor.
pub fn step_residual(record: &RomStepRecord, table: &GlobalIntegrationTable, m: Monitor, fallback: f64) -> Result<f64> {
    let (hat, tilde) = region_values(&record.duals[m.quantity.index()], table, m.region);
    gappy_residual(&hat, &tilde, fallback)
}

/// Relative L2 error of the reconstructed field of one step on a monitor.
pub fn step_error(
    record: &RomStepRecord,
    reference: &Snapshot,
    table: &GlobalIntegrationTable,
    m: Monitor,
    fallback: f64,
) -> Result<f64> {
    let ip = IpL2::restricted(table, m.region.as_option());
    relative_error(&m.quantity.field(reference), &record.duals[m.quantity.index()].field, &ip, fallback)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPair {
    pub loading: String,
    pub step: usize,
    pub residual: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub monitor: Monitor,
    /// Largest offline L2 norm of the HF field on the region.
    pub field_fallback: f64,
    /// Largest Euclidean norm of the law values at the region's points.
    pub point_fallback: f64,
    pub pairs: Vec<CalibrationPair>,
    pub model: GprModel,
}

/// Calibrated indicators for every dual quantity and region.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Calibration {
    pub entries: Vec<CalibrationEntry>,
}

impl Calibration {
    pub fn get(&self, m: Monitor) -> Result<&CalibrationEntry> {
        self.entries
            .iter()
            .find(|e| e.monitor == m)
            .ok_or_else(|| Error::Config(format!("no calibrated indicator for {m}")))
    }

    pub fn indicator(&self, m: Monitor, residual: f64) -> Result<f64> {
        Ok(self.get(m)?.model.indicator(residual))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// One CSV per monitor with the calibration scatter and the indicator
    /// at each residual.
    pub fn save_scatter(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for e in &self.entries {
            write_table(
                &dir.join(format!("calibration_{}_{}.csv", e.monitor.quantity, e.monitor.region)),
                &["step", "residual", "error", "indicator"],
                e.pairs
                    .iter()
                    .map(|p| [p.step as f64, p.residual, p.error, e.model.indicator(p.residual)]),
            )?;
        }
        Ok(())
    }
}

fn references<'a>(archive: &'a SnapshotArchive, loading: &LoadingProgram) -> Result<Vec<&'a Snapshot>> {
    (0..loading.steps())
        .map(|i| {
            archive.get(&Variability::new(&loading.label, i)).ok_or_else(|| {
                Error::Config(format!("archive has no snapshot for {}", Variability::new(&loading.label, i)))
            })
        })
        .collect()
}

fn entry(
    table: &GlobalIntegrationTable,
    refs: &[Vec<&Snapshot>],
    runs: &[RomSolution],
    m: Monitor,
) -> Result<CalibrationEntry> {
    let q = m.quantity;
    let ip = IpL2::restricted(table, m.region.as_option());
    let field_fallback = refs.iter().flatten().map(|s| ip.norm(&q.field(s))).fold(0.0, f64::max);
    let point_fallback = runs
        .iter()
        .flat_map(|r| &r.steps)
        .map(|s| {
            let (hat, _) = region_values(&s.duals[q.index()], table, m.region);
            hat.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    let mut pairs = Vec::new();
    for (run, snaps) in runs.iter().zip(refs) {
        for (i, (rec, snap)) in run.steps.iter().zip(snaps).enumerate() {
            let hf_field = q.field(snap);
            if q == Quantity::P && ip.norm(&hf_field) == 0.0 {
                continue;
            }
            pairs.push(CalibrationPair {
                loading: run.label.clone(),
                step: i,
                residual: step_residual(rec, table, m, point_fallback)?,
                error: step_error(rec, snap, table, m, field_fallback)?,
            });
        }
    }
    let inputs: Vec<f64> = pairs.iter().map(|p| p.residual).collect();
    let targets: Vec<f64> = pairs.iter().map(|p| p.error).collect();
    let model = GprModel::fit(&inputs, &targets).map_err(|e| match e {
        Error::GprFit(msg) => Error::GprFit(format!("{m}: {msg}")),
        other => other,
    })?;
    Ok(CalibrationEntry {
        monitor: m,
        field_fallback,
        point_fallback,
        pairs,
        model,
    })
}

/// Reduced solves of the offline loadings at the loose tolerance `opts`,
/// then one (residual, error) scatter and regressor per quantity and
/// region.
pub fn calibrate(
    hf: &HfModel,
    model: &ReducedModel,
    archive: &SnapshotArchive,
    loadings: &[LoadingProgram],
    regions: &[Region],
    opts: NewtonOptions,
) -> Result<Calibration> {
    let refs: Vec<Vec<&Snapshot>> = loadings.iter().map(|l| references(archive, l)).collect::<Result<_>>()?;
    let runs: Vec<RomSolution> = par::map_slice(loadings, |l| run_rom_transient(hf, model, l, opts))
        .into_iter()
        .collect::<Result<_>>()?;
    let monitors: Vec<Monitor> = Quantity::ALL
        .iter()
        .flat_map(|&q| regions.iter().map(move |&r| Monitor::new(q, r)))
        .collect();
    let entries = par::map_slice(&monitors, |&m| entry(hf.table(), &refs, &runs, m))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(Calibration { entries })
}
