//! Offline and online workflows, configuration, persistence and export.

mod config;
mod export;
mod offline;
mod online;

pub use config::{EnrichmentConfig, ExportFlags, MeshSource, PipelineConfig, Tolerances, OUTPUT_DIR_ENV};
pub use export::{element_averages, vtk_string, write_probe, write_region_integrals, write_vtk_series, FieldSeries};
pub use offline::{generate_snapshots, offline_pipeline, setup, OfflineArtifacts, OfflineManifest, Timings};
pub use online::{online_pipeline, EnrichmentLog, LogEntry, OnlineResult};

use crate::error::Result;
use crate::fem::GlobalIntegrationTable;
use crate::hf::{HfModel, SnapshotArchive};
use crate::mesh::read_mesh;
use std::path::Path;

/// HF transient of the online loading, used as enrichment source and for
/// the errors.
pub fn hf_reference(cfg: &PipelineConfig) -> Result<SnapshotArchive> {
    let mesh = cfg.build_mesh().map_err(|e| e.in_stage("setup"))?;
    let hf = HfModel::new(mesh, cfg.law.clone()).map_err(|e| e.in_stage("setup"))?;
    let program = cfg.online_program(hf.mesh()).map_err(|e| e.in_stage("setup"))?;
    hf.run_transient(&program, cfg.tolerances.hf())
        .map_err(|e| e.in_stage("reference"))
}

pub fn save_online(out: &Path, hf: &HfModel, result: &OnlineResult) -> Result<()> {
    let dir = out.join("online");
    std::fs::create_dir_all(&dir)?;
    result.log.save_csv(&dir.join("log.csv"))?;
    std::fs::write(dir.join("log.json"), serde_json::to_string_pretty(&result.log)?)?;
    FieldSeries::from_solution(&result.solution).save(&dir.join("solution"), hf.mesh().dof_count(), hf.table().len())?;
    result.model.save(&dir.join("model"))
}

/// Writes VTK files and summary tables from a persisted online solution.
pub fn export(out: &Path, flags: ExportFlags) -> Result<()> {
    let mesh = read_mesh(&out.join("mesh.txt"))?;
    let table = GlobalIntegrationTable::build(&mesh)?;
    let dir = out.join("online");
    let series = FieldSeries::load(&dir.join("solution"))?;
    if flags.csv {
        write_region_integrals(&dir.join("regions.csv"), &table, &PipelineConfig::regions(&mesh), &series)?;
        write_probe(&dir.join("probe.csv"), &series)?;
    }
    if flags.vtk {
        write_vtk_series(&dir.join("vtk"), &mesh, &table, &series)?;
    }
    Ok(())
}
