use nlrom::fem::GlobalIntegrationTable;
use nlrom::fixtures::{desk_config, offline_loadings, smoke_config};
use nlrom::hf::{SnapshotArchive, Variability};
use nlrom::indicator::Region;
use nlrom::pipeline::*;
use nlrom::rom::{run_rom_transient, Quantity};
use nlrom::Error;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

fn desk() -> &'static (OfflineArtifacts, SnapshotArchive) {
    static DESK: OnceLock<(OfflineArtifacts, SnapshotArchive)> = OnceLock::new();
    DESK.get_or_init(|| {
        let cfg = desk_config();
        (offline_pipeline(&cfg).unwrap(), hf_reference(&cfg).unwrap())
    })
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_desk_config_matches_fixture() {
    let mut cfg = PipelineConfig::load(&configs_dir().join("desk.toml")).unwrap();
    assert_eq!(cfg.base, configs_dir());
    cfg.base = PathBuf::new();
    assert_eq!(cfg, desk_config());
}

#[test]
fn shipped_smoke_config_matches_fixture() {
    let mut cfg = PipelineConfig::load(&configs_dir().join("smoke.toml")).unwrap();
    cfg.base = PathBuf::new();
    assert_eq!(cfg, smoke_config());
}

#[test]
fn unknown_config_key_is_rejected() {
    let text = std::fs::read_to_string(configs_dir().join("desk.toml")).unwrap();
    let bad = text.replace("[tolerances]", "[tolerances]\nbogus = 1.0");
    assert!(matches!(PipelineConfig::parse(&bad, "bad.toml"), Err(Error::Parse { .. })));
}

#[test]
fn elastic_smoke_run_persists_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config();
    let off = offline_pipeline(&cfg).unwrap();
    off.save(dir.path()).unwrap();
    let back = OfflineArtifacts::load(&cfg, dir.path()).unwrap();
    assert_eq!(back.model.n(), off.model.n());
    assert_eq!(
        serde_json::to_string(&back.calibration).unwrap(),
        serde_json::to_string(&off.calibration).unwrap()
    );

    let res = online_pipeline(&cfg, &back, None, false).unwrap();
    assert_eq!(res.solution.steps.len(), 3);
    assert_eq!(res.log.enrichments(), 0);
    assert!(res.log.entries.iter().all(|e| e.errors.iter().all(|v| v.is_nan())));
    save_online(dir.path(), &back.hf, &res).unwrap();
    export(dir.path(), ExportFlags::default()).unwrap();
    for f in ["online/log.csv", "online/regions.csv", "online/probe.csv", "online/vtk/step_0002.vtk"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }

    // elastic response is linear in the pressure amplitude
    let hf_online = hf_reference(&cfg).unwrap();
    let last = hf_online.get(&Variability::new("mid", 2)).unwrap();
    let rom_u = &res.solution.steps[2].u;
    let scale = last.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = rom_u.iter().zip(&last.u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff < 1e-6 * scale, "{diff} vs {scale}");
}

#[test]
fn loose_pod_tolerance_keeps_one_mode() {
    let mut cfg = smoke_config();
    cfg.tolerances.pod = 0.999;
    let off = offline_pipeline(&cfg).unwrap();
    assert_eq!(off.model.n(), 1);
}

#[test]
fn artifacts_of_another_mesh_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config();
    offline_pipeline(&cfg).unwrap().save(dir.path()).unwrap();
    let mut other = cfg.clone();
    if let MeshSource::Box { divisions, .. } = &mut other.mesh {
        divisions[0] = 5;
    }
    assert!(matches!(OfflineArtifacts::load(&other, dir.path()), Err(Error::Config(_))));
}

#[test]
fn enrichment_without_reference_is_a_config_error() {
    let cfg = smoke_config();
    let off = offline_pipeline(&cfg).unwrap();
    assert!(matches!(online_pipeline(&cfg, &off, None, true), Err(Error::Config(_))));
}

#[test]
fn infinite_threshold_reproduces_plain_reduced_run() {
    let (off, reference) = desk();
    let mut cfg = desk_config();
    cfg.enrichment.tau = f64::INFINITY;
    let res = online_pipeline(&cfg, off, Some(reference), true).unwrap();
    assert_eq!(res.log.enrichments(), 0);
    let program = cfg.online_program(off.hf.mesh()).unwrap();
    let plain = run_rom_transient(&off.hf, &off.model, &program, cfg.tolerances.rom()).unwrap();
    assert_eq!(res.solution, plain);
}

#[test]
fn included_variability_enriches_only_where_calibration_erred() {
    let (off, _) = desk();
    let mut cfg = desk_config();
    cfg.online = offline_loadings().remove(0);
    let res = online_pipeline(&cfg, off, Some(&off.archive), true).unwrap();
    let log = &res.log;
    assert!(log.max_monitored_error(true) < cfg.enrichment.tau);
    for e in log.entries.iter().filter(|e| e.enriched) {
        let seen = log.monitored.iter().any(|m| {
            off.calibration.get(*m).unwrap().pairs.iter().any(|p| {
                p.loading == cfg.online.label && p.step == e.step && p.error > cfg.enrichment.tau
            })
        });
        assert!(seen, "step {} enriched without a matching calibration error", e.step);
    }
}

#[test]
fn enrichment_log_is_consistent() {
    let (off, reference) = desk();
    let cfg = desk_config();
    let res = online_pipeline(&cfg, off, Some(reference), true).unwrap();
    let log = &res.log;
    assert!(log.enrichments() >= 1);
    assert_eq!(log.entries.len(), 24);
    assert!(log.entries.windows(2).all(|w| w[1].modes >= w[0].modes));
    assert_eq!(log.entries.last().unwrap().modes, res.model.n());
    for (e, s) in log.entries.iter().zip(&res.solution.steps) {
        assert_eq!(e.enriched, s.enriched);
        if e.enriched {
            assert!(e.indicators.iter().chain(&e.errors).chain(&e.residuals).all(|v| *v == 0.0));
        } else {
            let trig = log
                .tracked
                .iter()
                .enumerate()
                .any(|(c, m)| log.monitored.contains(m) && e.indicators[c] > log.tau);
            assert!(!trig, "step {} should have been enriched", e.step);
        }
    }
    let tracked: Vec<String> = log.tracked.iter().map(|m| m.to_string()).collect();
    assert_eq!(tracked, ["p@all", "p@0", "p@1", "s11@all", "s11@0", "s11@1"]);
}

#[test]
fn empty_series_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config();
    let mesh = cfg.build_mesh().unwrap();
    let table = GlobalIntegrationTable::build(&mesh).unwrap();
    let series = FieldSeries {
        duals: vec![Vec::new(); Quantity::ALL.len()],
        ..FieldSeries::default()
    };
    let path = dir.path().join("regions.csv");
    write_region_integrals(&path, &table, &PipelineConfig::regions(&mesh), &series).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("step,time,p_all,p_0,p_1,s11_all"));
    write_probe(&dir.path().join("probe.csv"), &series).unwrap();
    let probe = std::fs::read_to_string(dir.path().join("probe.csv")).unwrap();
    assert_eq!(probe.trim(), "step,time,point,p,s11,s22,s33,s12,s23,s31");
}

#[test]
fn region_integrals_add_up_and_vtk_counts_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config();
    let off = offline_pipeline(&cfg).unwrap();
    let res = online_pipeline(&cfg, &off, None, false).unwrap();
    let series = FieldSeries::from_solution(&res.solution);
    let mesh = off.hf.mesh();
    let table = off.hf.table();
    let regions = PipelineConfig::regions(mesh);
    assert_eq!(regions, [Region::All, Region::Id(0), Region::Id(1)]);
    let path = dir.path().join("regions.csv");
    write_region_integrals(&path, table, &regions, &series).unwrap();
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    for row in rdr.records() {
        let v: Vec<f64> = row.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        for q in 0..Quantity::ALL.len() {
            let c = 2 + 3 * q;
            assert!((v[c] - v[c + 1] - v[c + 2]).abs() <= 1e-9 * v[c].abs().max(1e-9));
        }
    }

    let u = &series.u[2];
    let s11 = &series.duals[Quantity::Sigma(0).index()][2];
    let text = vtk_string(mesh, table, "t", u, &[("s11", s11)]);
    let n = mesh.elements().len();
    assert!(text.contains(&format!("POINTS {} double", mesh.node_count())));
    assert!(text.contains(&format!("CELLS {n} {}", n * 9)));
    assert!(text.contains(&format!("CELL_TYPES {n}")));
    let averages = element_averages(mesh, table, s11);
    assert_eq!(averages.len(), n);
    let after = text.split("SCALARS s11 double 1\nLOOKUP_TABLE default\n").nth(1).unwrap();
    let written: Vec<f64> = after.lines().take(n).map(|l| l.parse().unwrap()).collect();
    assert_eq!(written, averages);
}

#[test]
fn offline_outputs_are_deterministic() {
    let cfg = smoke_config();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    offline_pipeline(&cfg).unwrap().save(a.path()).unwrap();
    offline_pipeline(&cfg).unwrap().save(b.path()).unwrap();
    let files = |root: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        let mut out = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in std::fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else if p.file_name().unwrap() != "manifest.json" {
                    out.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
                }
            }
        }
        out.sort();
        out
    };
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
}
