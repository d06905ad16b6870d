use super::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::hf::{HfModel, LoadingProgram, SnapshotArchive};
use crate::indicator::{calibrate, Calibration};
use crate::mesh::{write_mesh, Mesh};
use crate::par;
use crate::rom::{BuildReport, ReducedModel};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Wall-clock seconds per offline stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub data_generation: f64,
    pub reduction: f64,
    pub calibration: f64,
}

pub struct OfflineArtifacts {
    pub hf: HfModel,
    pub programs: Vec<LoadingProgram>,
    pub archive: SnapshotArchive,
    pub model: ReducedModel,
    pub report: BuildReport,
    pub calibration: Calibration,
    pub timings: Timings,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OfflineManifest {
    pub loadings: Vec<String>,
    pub dofs: usize,
    pub integration_points: usize,
    pub report: BuildReport,
    pub timings: Timings,
}

pub fn setup(cfg: &PipelineConfig) -> Result<(HfModel, Vec<LoadingProgram>)> {
    let mesh = cfg.build_mesh()?;
    let hf = HfModel::new(mesh, cfg.law.clone())?;
    let programs = cfg.offline_programs(hf.mesh())?;
    Ok((hf, programs))
}

/// HF transients of several loadings merged into one archive.
pub fn generate_snapshots(hf: &HfModel, programs: &[LoadingProgram], cfg: &PipelineConfig) -> Result<SnapshotArchive> {
    let runs = par::map_slice(programs, |p| hf.run_transient(p, cfg.tolerances.hf()));
    let mut archive = SnapshotArchive::new(hf.mesh().dof_count(), hf.table().len());
    for r in runs {
        archive.merge(r?)?;
    }
    Ok(archive)
}

/// Data generation, POD / ECM / Gappy-POD, then calibration of the error
/// indicators on the offline loadings.
pub fn offline_pipeline(cfg: &PipelineConfig) -> Result<OfflineArtifacts> {
    let (hf, programs) = setup(cfg).map_err(|e| e.in_stage("setup"))?;
    let mut timings = Timings::default();

    let start = Instant::now();
    let archive = generate_snapshots(&hf, &programs, cfg).map_err(|e| e.in_stage("data generation"))?;
    timings.data_generation = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let (model, report) =
        ReducedModel::build(&hf, &archive, cfg.tolerances.reduction()).map_err(|e| e.in_stage("reduction"))?;
    timings.reduction = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let regions = PipelineConfig::regions(hf.mesh());
    let calibration = calibrate(&hf, &model, &archive, &programs, &regions, cfg.tolerances.calibration())
        .map_err(|e| e.in_stage("calibration"))?;
    timings.calibration = start.elapsed().as_secs_f64();
    log::info!(
        "offline: data {:.2} s, reduction {:.2} s, calibration {:.2} s",
        timings.data_generation,
        timings.reduction,
        timings.calibration
    );

    Ok(OfflineArtifacts {
        hf,
        programs,
        archive,
        model,
        report,
        calibration,
        timings,
    })
}

impl OfflineArtifacts {
    pub fn save(&self, out: &Path) -> Result<()> {
        let dir = out.join("offline");
        std::fs::create_dir_all(&dir)?;
        std::fs::write(out.join("mesh.txt"), write_mesh(self.hf.mesh()))?;
        self.archive.save(&dir.join("archive"))?;
        self.model.save(&dir.join("model"))?;
        self.calibration.save(&dir.join("calibration.json"))?;
        self.calibration.save_scatter(&dir.join("calibration"))?;
        let manifest = OfflineManifest {
            loadings: self.programs.iter().map(|p| p.label.clone()).collect(),
            dofs: self.hf.mesh().dof_count(),
            integration_points: self.hf.table().len(),
            report: self.report.clone(),
            timings: self.timings.clone(),
        };
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    /// Reads the artifacts written by [`OfflineArtifacts::save`] for `cfg`.
    pub fn load(cfg: &PipelineConfig, out: &Path) -> Result<Self> {
        let dir = out.join("offline");
        let manifest: OfflineManifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
        let (hf, programs) = setup(cfg)?;
        let stored: Mesh = crate::mesh::read_mesh(&out.join("mesh.txt"))?;
        if stored.dof_count() != hf.mesh().dof_count() || manifest.integration_points != hf.table().len() {
            return Err(Error::Config(format!(
                "offline artifacts in {} were built for a different mesh",
                out.display()
            )));
        }
        let archive = SnapshotArchive::load(&dir.join("archive"))?;
        let model = ReducedModel::load(&dir.join("model"), hf.mesh(), hf.table())?;
        let calibration = Calibration::load(&dir.join("calibration.json"))?;
        Ok(OfflineArtifacts {
            hf,
            programs,
            archive,
            model,
            report: manifest.report,
            calibration,
            timings: manifest.timings,
        })
    }
}
