use clap::{Parser, Subcommand};
use nlrom::hf::SnapshotArchive;
use nlrom::pipeline::{
    export, hf_reference, offline_pipeline, online_pipeline, save_online, ExportFlags, OfflineArtifacts,
    PipelineConfig,
};
use nlrom::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Offline/online hyper-reduced order modeling with error-indicator driven
/// enrichment.
#[derive(Parser)]
#[command(name = "nlrom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// HF snapshots, reduced model and indicator calibration.
    Offline { config: PathBuf },
    /// HF run of the online loading, the enrichment source.
    Hf { config: PathBuf },
    /// Reduced run of the online loading, enriched when an indicator
    /// exceeds the threshold.
    Online {
        config: PathBuf,
        #[arg(long)]
        no_enrich: bool,
        /// Directory holding the HF reference archive (default:
        /// `<output>/reference`).
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// VTK and CSV files from a persisted online run.
    Export {
        dir: PathBuf,
        #[arg(long)]
        no_vtk: bool,
        #[arg(long)]
        no_csv: bool,
    },
}

/// Exit status per failure kind.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 3,
        Error::Io(_) | Error::Json(_) => 4,
        Error::Stage { stage, source } => match *stage {
            "setup" => match **source {
                Error::Config(_) | Error::Parse { .. } => 3,
                _ => 5,
            },
            "data generation" => 6,
            "reduction" => 7,
            "calibration" => 8,
            "reference" => 9,
            "online" => 10,
            "enrichment" => 11,
            "export" => 12,
            _ => 1,
        },
        _ => 1,
    }
}

fn reference_dir(cfg: &PipelineConfig, given: Option<PathBuf>) -> PathBuf {
    given.unwrap_or_else(|| cfg.output_dir().join("reference"))
}

fn run(cli: Cli) -> nlrom::Result<()> {
    match cli.command {
        Command::Offline { config } => {
            let cfg = PipelineConfig::load(&config)?;
            let out = cfg.output_dir();
            let off = offline_pipeline(&cfg)?;
            off.save(&out)?;
            println!(
                "offline: {} modes, {} quadrature points, artifacts in {}",
                off.model.n(),
                off.model.quadrature.len(),
                out.display()
            );
        }
        Command::Hf { config } => {
            let cfg = PipelineConfig::load(&config)?;
            let dir = reference_dir(&cfg, None);
            let archive = hf_reference(&cfg)?;
            archive.save(&dir)?;
            println!("hf: reference of {} in {}", cfg.online.label, dir.display());
        }
        Command::Online {
            config,
            no_enrich,
            reference,
        } => {
            let cfg = PipelineConfig::load(&config)?;
            let out = cfg.output_dir();
            let off = OfflineArtifacts::load(&cfg, &out)?;
            let dir = reference_dir(&cfg, reference);
            let archive = if dir.is_dir() {
                Some(SnapshotArchive::load(&dir)?)
            } else {
                None
            };
            let enrich = cfg.enrichment.enabled && !no_enrich;
            if enrich && archive.is_none() {
                return Err(Error::Config(format!(
                    "no HF reference in {}; run `nlrom hf` first or pass --no-enrich",
                    dir.display()
                )));
            }
            let res = online_pipeline(&cfg, &off, archive.as_ref(), enrich).map_err(|e| match e {
                Error::Stage { .. } | Error::Config(_) => e,
                e => e.in_stage("online"),
            })?;
            save_online(&out, &off.hf, &res)?;
            export(&out, cfg.export).map_err(|e| e.in_stage("export"))?;
            print!("online: {} steps, {} enrichments", res.solution.steps.len(), res.log.enrichments());
            if archive.is_some() {
                print!(", max monitored error {:.4}", res.log.max_monitored_error(true));
            }
            println!();
        }
        Command::Export { dir, no_vtk, no_csv } => {
            export(&dir, ExportFlags { csv: !no_csv, vtk: !no_vtk }).map_err(|e| e.in_stage("export"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
