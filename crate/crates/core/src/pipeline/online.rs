use super::config::PipelineConfig;
use super::offline::OfflineArtifacts;
use crate::csvio::write_table;
use crate::error::{Error, Result};
use crate::hf::{Snapshot, SnapshotArchive, Variability};
use crate::indicator::{step_error, step_residual, Monitor};
use crate::rom::{hf_step_record, reconstruct_step, reduced_newton, ReducedModel, RomSolution, RomState};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: usize,
    pub time: f64,
    pub iterations: usize,
    /// Per tracked monitor.
    pub residuals: Vec<f64>,
    pub indicators: Vec<f64>,
    /// NaN without a reference.
    pub errors: Vec<f64>,
    pub enriched: bool,
    pub modes: usize,
    pub quadrature_points: usize,
    pub dual_modes: Vec<usize>,
}

/// Per-step residuals, indicators, errors and basis sizes of an online run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentLog {
    pub tau: f64,
    /// Monitors that decide enrichment.
    pub monitored: Vec<Monitor>,
    /// Monitors reported at every step: the monitored quantities on the
    /// whole mesh and on each region.
    pub tracked: Vec<Monitor>,
    pub entries: Vec<LogEntry>,
    /// Seconds spent rebuilding the reduced model.
    pub rebuild_seconds: f64,
}

impl EnrichmentLog {
    pub fn enrichments(&self) -> usize {
        self.entries.iter().filter(|e| e.enriched).count()
    }

    fn column(&self, m: Monitor) -> Option<usize> {
        self.tracked.iter().position(|t| *t == m)
    }

    /// Errors of one tracked monitor over the steps; `skip_enriched` drops
    /// the replaced steps.
    pub fn errors(&self, m: Monitor, skip_enriched: bool) -> Vec<f64> {
        let Some(c) = self.column(m) else {
            return Vec::new();
        };
        self.entries
            .iter()
            .filter(|e| !(skip_enriched && e.enriched))
            .map(|e| e.errors[c])
            .collect()
    }

    pub fn indicators(&self, m: Monitor) -> Vec<f64> {
        let Some(c) = self.column(m) else {
            return Vec::new();
        };
        self.entries.iter().map(|e| e.indicators[c]).collect()
    }

    /// Largest error over the monitored quantities, ignoring NaN.
    pub fn max_monitored_error(&self, skip_enriched: bool) -> f64 {
        self.monitored
            .iter()
            .flat_map(|m| self.errors(*m, skip_enriched))
            .filter(|v| !v.is_nan())
            .fold(0.0, f64::max)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut header: Vec<String> = ["step", "time", "iterations", "enriched", "modes", "quadrature_points"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for m in &self.tracked {
            for kind in ["residual", "indicator", "error"] {
                header.push(format!("{kind}_{}_{}", m.quantity, m.region));
            }
        }
        let refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = self.entries.iter().map(|e| {
            let mut row = vec![
                e.step as f64,
                e.time,
                e.iterations as f64,
                if e.enriched { 1.0 } else { 0.0 },
                e.modes as f64,
                e.quadrature_points as f64,
            ];
            for c in 0..self.tracked.len() {
                row.extend([e.residuals[c], e.indicators[c], e.errors[c]]);
            }
            row
        });
        write_table(path, &refs, rows)
    }
}

pub struct OnlineResult {
    pub solution: RomSolution,
    pub log: EnrichmentLog,
    /// Reduced model at the end of the run, including enrichments.
    pub model: ReducedModel,
}

fn reference_step<'a>(reference: &'a SnapshotArchive, label: &str, i: usize) -> Result<&'a Snapshot> {
    reference
        .get(&Variability::new(label, i))
        .ok_or_else(|| Error::Config(format!("reference has no snapshot for {}", Variability::new(label, i))))
}

/// Online stage: per step, reduced solve, Gappy reconstruction and the
/// indicators. When a monitored indicator exceeds the threshold and
/// `enrich` is set, the step is replaced by the HF reference, which joins
/// the snapshot set, and the reduced model is rebuilt from scratch.
pub fn online_pipeline(
    cfg: &PipelineConfig,
    off: &OfflineArtifacts,
    reference: Option<&SnapshotArchive>,
    enrich: bool,
) -> Result<OnlineResult> {
    if enrich && reference.is_none() {
        return Err(Error::Config("enrichment needs a high-fidelity reference of the online loading".into()));
    }
    let hf = &off.hf;
    let table = hf.table();
    let program = cfg.online_program(hf.mesh())?;
    let regions = PipelineConfig::regions(hf.mesh());
    let monitored = cfg.enrichment.monitors();
    let tracked: Vec<Monitor> = cfg
        .enrichment
        .quantities
        .iter()
        .flat_map(|&q| regions.iter().map(move |&r| Monitor::new(q, r)))
        .collect();
    let mut fallbacks = Vec::with_capacity(tracked.len());
    for m in &tracked {
        let e = off.calibration.get(*m)?;
        fallbacks.push((e.point_fallback, e.field_fallback));
    }
    let decides: Vec<bool> = tracked.iter().map(|m| monitored.contains(m)).collect();

    let mut model = off.model.clone();
    let mut archive = off.archive.clone();
    let mut state = RomState::zero(&model);
    let mut solution = RomSolution {
        label: program.label.clone(),
        steps: Vec::with_capacity(program.steps()),
    };
    let mut log = EnrichmentLog {
        tau: cfg.enrichment.tau,
        monitored,
        tracked: tracked.clone(),
        entries: Vec::new(),
        rebuild_seconds: 0.0,
    };
    for i in 0..program.steps() {
        let t = program.times[i];
        let out = reduced_newton(hf, &model, &program, i, &state, cfg.tolerances.rom()).map_err(|e| e.at_step(i))?;
        let mut record = reconstruct_step(&model, t, &out).map_err(|e| e.at_step(i))?;
        let mut residuals = Vec::with_capacity(tracked.len());
        let mut indicators = Vec::with_capacity(tracked.len());
        let mut errors = Vec::with_capacity(tracked.len());
        for (m, (pf, ff)) in tracked.iter().zip(&fallbacks) {
            let r = step_residual(&record, table, *m, *pf).map_err(|e| e.at_step(i))?;
            residuals.push(r);
            indicators.push(off.calibration.indicator(*m, r)?);
            errors.push(match reference {
                Some(a) => step_error(&record, reference_step(a, &program.label, i)?, table, *m, *ff)
                    .map_err(|e| e.at_step(i))?,
                None => f64::NAN,
            });
        }
        let trigger = indicators
            .iter()
            .zip(&decides)
            .any(|(v, d)| *d && *v > cfg.enrichment.tau);
        let enriched = enrich && trigger;
        if let (true, Some(reference)) = (enriched, reference) {
            let snap = reference_step(reference, &program.label, i)?;
            archive.insert(Variability::new(&format!("{}+enrichment", program.label), i), snap.clone())?;
            let start = Instant::now();
            model = ReducedModel::build(hf, &archive, cfg.tolerances.reduction())
                .map_err(|e| e.at_step(i).in_stage("enrichment"))?
                .0;
            log.rebuild_seconds += start.elapsed().as_secs_f64();
            state = RomState::from_snapshot(hf, &model, snap);
            record = hf_step_record(&model, snap, &state.u_hat);
            residuals.fill(0.0);
            indicators.fill(0.0);
            errors.fill(0.0);
            log::info!("step {i}: enriched, n = {}, d = {}", model.n(), model.quadrature.len());
        } else {
            state = out.state;
        }
        log.entries.push(LogEntry {
            step: i,
            time: t,
            iterations: out.iterations,
            residuals,
            indicators,
            errors,
            enriched,
            modes: model.n(),
            quadrature_points: model.quadrature.len(),
            dual_modes: model.duals.iter().map(|d| d.n()).collect(),
        });
        solution.steps.push(record);
    }
    Ok(OnlineResult { solution, log, model })
}
