use crate::behavior::Law;
use crate::error::{Error, Result};
use crate::hf::{LoadingProgram, LoadingSpec, NewtonOptions};
use crate::indicator::{Monitor, Region};
use crate::mesh::{read_mesh, BoxMeshBuilder, Mesh, Waist};
use crate::rom::{Quantity, ReductionTolerances};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "NLROM_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshSource {
    Box {
        lengths: [f64; 3],
        divisions: [usize; 3],
        #[serde(default)]
        origin: [f64; 3],
        clamp: String,
        #[serde(default)]
        waist: Option<Waist>,
        /// Region boundaries as fractions of the x-length.
        #[serde(default)]
        region_splits: Vec<f64>,
    },
    File {
        path: PathBuf,
    },
}

impl MeshSource {
    pub fn build(&self, base: &Path) -> Result<Mesh> {
        match self {
            MeshSource::Box {
                lengths,
                divisions,
                origin,
                clamp,
                waist,
                region_splits,
            } => {
                let mut b = BoxMeshBuilder::new(*lengths, *divisions)
                    .origin(*origin)
                    .clamp(clamp)
                    .region_splits(region_splits.clone());
                if let Some(w) = waist {
                    b = b.waist(*w);
                }
                b.build()
            }
            MeshSource::File { path } => read_mesh(&base.join(path)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub hf_newton: f64,
    pub pod: f64,
    pub ecm: f64,
    pub rom_newton: f64,
    pub gappy: f64,
    /// Loose reduced Newton tolerance of the calibration solves.
    pub calibration_newton: f64,
    pub max_newton_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hf_newton: 1e-5,
            pod: 1e-5,
            ecm: 1e-4,
            rom_newton: 1e-4,
            gappy: 1e-5,
            calibration_newton: 0.1,
            max_newton_iterations: 25,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("hf_newton", self.hf_newton),
            ("pod", self.pod),
            ("ecm", self.ecm),
            ("rom_newton", self.rom_newton),
            ("gappy", self.gappy),
            ("calibration_newton", self.calibration_newton),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if self.max_newton_iterations == 0 {
            return Err(Error::Config("max_newton_iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn reduction(&self) -> ReductionTolerances {
        ReductionTolerances {
            pod: self.pod,
            ecm: self.ecm,
            gappy: self.gappy,
        }
    }

    pub fn hf(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.hf_newton,
            max_iter: self.max_newton_iterations,
        }
    }

    pub fn rom(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.rom_newton,
            max_iter: self.max_newton_iterations,
        }
    }

    pub fn calibration(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.calibration_newton,
            max_iter: self.max_newton_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnrichmentConfig {
    pub enabled: bool,
    pub tau: f64,
    pub quantities: Vec<Quantity>,
    pub region: Region,
}

impl Default for EnrichmentConfig {
    fn default() -> Self {
        EnrichmentConfig {
            enabled: true,
            tau: 0.2,
            quantities: vec![Quantity::P, Quantity::Sigma(0)],
            region: Region::All,
        }
    }
}

impl EnrichmentConfig {
    pub fn monitors(&self) -> Vec<Monitor> {
        self.quantities.iter().map(|&q| Monitor::new(q, self.region)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportFlags {
    pub csv: bool,
    pub vtk: bool,
}

impl Default for ExportFlags {
    fn default() -> Self {
        ExportFlags { csv: true, vtk: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output: PathBuf,
    pub mesh: MeshSource,
    pub law: Law,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub offline: Vec<LoadingSpec>,
    pub online: LoadingSpec,
    #[serde(default)]
    pub enrichment: EnrichmentConfig,
    #[serde(default)]
    pub export: ExportFlags,
    /// Directory against which relative paths are resolved.
    #[serde(skip)]
    pub base: PathBuf,
}

impl PipelineConfig {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Parse {
            file: file.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML configuration; relative paths are taken from the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = PipelineConfig::parse(&text, &path.display().to_string())?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        self.law.validate()?;
        if self.offline.is_empty() {
            return Err(Error::Config("at least one offline loading is required".into()));
        }
        let mut labels: Vec<&str> = self.offline.iter().map(|l| l.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("offline loading labels must be distinct".into()));
        }
        if !(self.enrichment.tau >= 0.0) {
            return Err(Error::Config("enrichment threshold must be nonnegative".into()));
        }
        if self.enrichment.quantities.is_empty() {
            return Err(Error::Config("at least one monitored quantity is required".into()));
        }
        Ok(())
    }

    /// Output directory, after the environment override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.base.join(&self.output),
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let mesh = self.mesh.build(&self.base)?;
        if let Region::Id(r) = self.enrichment.region {
            if !mesh.regions().contains(&r) {
                return Err(Error::Config(format!("monitored region {r} does not exist in the mesh")));
            }
        }
        Ok(mesh)
    }

    pub fn offline_programs(&self, mesh: &Mesh) -> Result<Vec<LoadingProgram>> {
        self.offline.iter().map(|l| l.materialize(mesh)).collect()
    }

    pub fn online_program(&self, mesh: &Mesh) -> Result<LoadingProgram> {
        self.online.materialize(mesh)
    }

    /// Whole mesh followed by every element region.
    pub fn regions(mesh: &Mesh) -> Vec<Region> {
        std::iter::once(Region::All)
            .chain(mesh.regions().into_iter().map(Region::Id))
            .collect()
    }
}
