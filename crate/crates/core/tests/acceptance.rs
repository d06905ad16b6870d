//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Every criterion is always evaluated and reported. The process exits with
//! a failure status on a FAIL line only when `NLROM_ACCEPTANCE_STRICT` is set.

use nalgebra::{DMatrix, DVector};
use nlrom::behavior::{ElasParams, Law, MaterialState};
use nlrom::fem::{InnerProduct, IpL2, NodalL2};
use nlrom::fixtures::{desk_config, desk_law, return_mapping_errors};
use nlrom::hf::{
    HfModel, KeyframeSpec, LoadingProgram, LoadingSpec, NewtonOptions, PiecewiseLinear, PressureSpec, RotationAxis,
    SnapshotArchive, TemperatureSpec,
};
use nlrom::hyper::{full_quadrature, nnls};
use nlrom::indicator::{gappy_residual, pearson, Monitor, Region};
use nlrom::mesh::{BoxMeshBuilder, Mesh};
use nlrom::pipeline::*;
use nlrom::pod::{snapshot_pod, ReducedBasis};
use nlrom::rom::{gappy_offline, run_rom_transient, Quantity, ReducedModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

const TAU: f64 = 0.2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Euclid;

impl InnerProduct for Euclid {
    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn bar_loading(mesh: &Mesh, label: &str, times: Vec<f64>, pressure: PiecewiseLinear, rpm: PiecewiseLinear) -> LoadingProgram {
    let t0 = times[0];
    LoadingSpec {
        label: label.into(),
        times,
        rotation_rpm: rpm,
        axis: RotationAxis {
            point: [-2.0, 0.5, 0.0],
            direction: [0.0, 0.0, 1.0],
        },
        density: 8000.0,
        pressure: PressureSpec {
            surface: "xmax".into(),
            coefficient: pressure,
            shape: None,
        },
        temperature: vec![KeyframeSpec {
            time: t0,
            field: TemperatureSpec::Uniform { value: 20.0 },
        }],
    }
    .materialize(mesh)
    .unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (es, ep) = return_mapping_errors(&desk_law(), 100, 10_000).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        es <= 1e-5 && ep <= 1e-5 && secs < 5.0,
        format!("sigma rel err {es:.2e}, p rel err {ep:.2e} (tol 1e-5), {secs:.2} s incl. oracle (< 5 s)"),
    )
}

fn criterion_2() -> Outcome {
    let mesh = BoxMeshBuilder::new([2.0, 1.0, 1.0], [2, 2, 2]).clamp("xmin").build().unwrap();
    let hf = HfModel::new(mesh.clone(), Law::Elas(ElasParams::isotropic(200_000.0, 0.0, 1e-5))).unwrap();
    let traction = 150.0;
    let prog = bar_loading(
        &mesh,
        "patch",
        vec![1.0],
        PiecewiseLinear::constant(traction),
        PiecewiseLinear::constant(0.0),
    );
    let states = vec![MaterialState::default(); hf.table().len()];
    let out = hf
        .newton_solve(&prog, 0, &states, &vec![0.0; mesh.dof_count()], NewtonOptions::default())
        .unwrap();
    let dev = out.stresses.iter().fold(0.0f64, |m, s| {
        let axial = (s.0[0] - traction).abs();
        m.max(axial).max(max_abs(&s.0[1..]))
    });
    outcome(
        dev < 1e-8 && out.iterations == 1,
        format!("max |sigma - (t,0,..)| {dev:.1e} (tol 1e-8), {} Newton iteration(s)", out.iterations),
    )
}

fn random_rank(rank: usize, count: usize, len: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen: Vec<Vec<f64>> = (0..rank).map(|_| (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..rank).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (0..len).map(|i| (0..rank).map(|r| c[r] * gen[r][i]).sum()).collect()
        })
        .collect()
}

/// Energy retention and Gram defect of a basis.
fn pod_contract(b: &ReducedBasis, eps: f64, ip: &dyn InnerProduct) -> (bool, f64) {
    let total: f64 = b.eigenvalues.iter().sum();
    let kept: f64 = b.eigenvalues[..b.n()].iter().sum();
    let gram = (b.gram(ip) - DMatrix::identity(b.n(), b.n())).amax();
    (kept >= (1.0 - eps * eps) * total, gram)
}

fn criterion_3(hf: &HfModel, archive: &SnapshotArchive, eps: f64) -> Outcome {
    let u: Vec<&[f64]> = archive.iter().map(|(_, s)| s.u.as_slice()).collect();
    let ip = NodalL2::new(hf.mesh(), hf.table());
    let desk = snapshot_pod(&u, eps, &ip).unwrap();
    let (desk_energy, desk_gram) = pod_contract(&desk, eps, &ip);

    let snaps = random_rank(3, 10, 40, 11);
    let refs: Vec<&[f64]> = snaps.iter().map(Vec::as_slice).collect();
    let synth = snapshot_pod(&refs, eps, &Euclid).unwrap();
    let (synth_energy, synth_gram) = pod_contract(&synth, eps, &Euclid);
    let svd = DMatrix::from_fn(40, 10, |i, j| snaps[j][i]).svd(true, false);
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * svd.singular_values[0]).count();
    let left = svd.u.unwrap();
    let span = synth.modes.iter().fold(0.0f64, |m, mode| {
        let v = DVector::from_column_slice(mode);
        let inside: f64 = (0..3).map(|k| left.column(k).dot(&v).powi(2)).sum();
        m.max((inside - 1.0).abs())
    });
    let pass = desk_energy && synth_energy && desk_gram < 1e-10 && synth_gram < 1e-10
        && synth.n() == 3 && rank == 3 && span < 1e-10;
    outcome(
        pass,
        format!(
            "fixture n={} gram defect {desk_gram:.1e}; rank-3 set n={} (SVD rank {rank}), span defect {span:.1e}, gram defect {synth_gram:.1e} (tol 1e-10)",
            desk.n(),
            synth.n()
        ),
    )
}

fn brute_force_nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut x = DVector::zeros(n);
        if !cols.is_empty() {
            let z = a.select_columns(&cols).svd(true, true).solve(b, 1e-14).unwrap();
            if z.iter().any(|v| *v < 0.0) {
                continue;
            }
            for (c, v) in cols.iter().zip(z.iter()) {
                x[*c] = *v;
            }
        }
        let obj = (a * &x - b).norm();
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, x));
        }
    }
    best.unwrap().1
}

fn criterion_4(hf: &HfModel, off: &OfflineArtifacts, ecm: f64) -> Outcome {
    let report = &off.report;
    let ng = hf.table().len();
    let weights = &off.model.quadrature.weights;
    let positive = weights.iter().all(|w| *w > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut nnls_dev = 0.0f64;
    for _ in 0..200 {
        let a = DMatrix::from_fn(10, 4, |_, _| rng.gen_range(-1.0..1.0));
        let b = DVector::from_fn(10, |_, _| rng.gen_range(-1.0..1.0));
        let x = nnls(&a, &b).unwrap();
        nnls_dev = nnls_dev.max((x - brute_force_nnls(&a, &b)).amax());
    }
    let d = report.quadrature_points;
    let pass = report.quadrature_residual <= ecm && positive && 5 * d <= ng && nnls_dev < 1e-10;
    outcome(
        pass,
        format!(
            "residual {:.2e} (<= {ecm:.0e}), d = {d} (<= N_G/5 = {}), weights > 0: {positive}; NNLS vs enumeration on 200 10x4 cases: max dev {nnls_dev:.1e} (tol 1e-10)",
            report.quadrature_residual,
            ng / 5
        ),
    )
}

fn criterion_5(off: &OfflineArtifacts) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut res, mut zdev) = (0.0f64, 0.0f64);
    for q in Quantity::ALL {
        let g = off.model.dual(q);
        let zstar = DVector::from_fn(g.n(), |_, _| rng.gen_range(-1.0..1.0));
        let hat = g.at_points(&zstar);
        let (z, _) = nlrom::rom::gappy_online(g, &hat).unwrap();
        res = res.max(gappy_residual(&hat, &g.at_points(&z), 1.0).unwrap());
        zdev = zdev.max((&z - &zstar).amax() / zstar.amax());
    }
    outcome(
        res < 1e-10 && zdev < 1e-10,
        format!("max residual {res:.1e}, max coefficient dev {zdev:.1e} over 7 dual quantities (tol 1e-10)"),
    )
}

fn criterion_6() -> Outcome {
    let mesh = BoxMeshBuilder::new([4.0, 1.0, 1.0], [4, 1, 1]).clamp("xmin").build().unwrap();
    let hf = HfModel::new(mesh.clone(), Law::Evp(desk_law())).unwrap();
    let prog = bar_loading(
        &mesh,
        "load",
        (1..=5).map(f64::from).collect(),
        PiecewiseLinear {
            times: vec![0.0, 5.0],
            values: vec![0.0, 450.0],
        },
        PiecewiseLinear {
            times: vec![0.0, 5.0],
            values: vec![0.0, 20_000.0],
        },
    );
    let opts = NewtonOptions { tol: 1e-12, max_iter: 30 };
    let archive = hf.run_transient(&prog, opts).unwrap();
    let quad = full_quadrature(&hf.table().measures());
    let ip = IpL2::new(hf.table());
    let duals = Quantity::ALL
        .iter()
        .map(|q| {
            let f: Vec<Vec<f64>> = archive.iter().map(|(_, s)| q.field(s)).collect();
            let r: Vec<&[f64]> = f.iter().map(Vec::as_slice).collect();
            gappy_offline(&r, 1e-5, &quad.indices, &ip).unwrap()
        })
        .collect();
    let primal = ReducedBasis {
        modes: hf.basis().as_modes(),
        eigenvalues: Vec::new(),
    };
    let model = ReducedModel::new(hf.mesh(), hf.table(), primal, quad, duals).unwrap();
    let rom = run_rom_transient(&hf, &model, &prog, opts).unwrap();
    let traj = archive.trajectory("load");
    let plastic = traj.last().unwrap().p().iter().any(|p| *p > 0.0);
    let (mut du, mut dd) = (0.0f64, 0.0f64);
    for (r, s) in rom.steps.iter().zip(&traj) {
        du = du.max(max_diff(&r.u, &s.u) / max_abs(&s.u).max(1e-300));
        let smax = s.stresses.iter().fold(0.0f64, |m, t| m.max(t.max_abs()));
        for q in Quantity::ALL {
            let field = q.field(s);
            let scale = match q {
                Quantity::P => max_abs(&field).max(1e-300),
                Quantity::Sigma(_) => smax,
            };
            let rec = &r.duals[q.index()];
            for (k, v) in rec.points.iter().zip(&rec.hat) {
                dd = dd.max((field[*k] - v).abs() / scale);
            }
        }
    }
    outcome(
        plastic && du <= 1e-8 && dd <= 1e-8,
        format!("{} steps (plastic: {plastic}), max rel dev u {du:.1e}, duals {dd:.1e} (tol 1e-8)", traj.len()),
    )
}

fn criterion_7(off: &OfflineArtifacts) -> Outcome {
    let entry = off.calibration.get(Monitor::new(Quantity::P, Region::All)).unwrap();
    let x: Vec<f64> = entry.pairs.iter().map(|p| p.residual).collect();
    let y: Vec<f64> = entry.pairs.iter().map(|p| p.error).collect();
    let r = pearson(&x, &y).unwrap_or(f64::NAN);
    let secs = off.timings.calibration;
    outcome(
        r >= 0.8 && secs < 120.0,
        format!("Pearson(residual, error) for p = {r:.3} over {} plastic steps (>= 0.8), calibration {secs:.2} s (< 120 s)", x.len()),
    )
}

fn criterion_8(plain: &OnlineResult, enriched: &OnlineResult) -> Outcome {
    let before = plain.log.max_monitored_error(false);
    let n = enriched.log.enrichments();
    let after = enriched.log.max_monitored_error(true);
    let zeroed = enriched
        .log
        .entries
        .iter()
        .filter(|e| e.enriched)
        .all(|e| e.indicators.iter().chain(&e.errors).all(|v| *v == 0.0));
    outcome(
        before > TAU && (1..=10).contains(&n) && after < TAU && zeroed,
        format!(
            "no enrichment: max error {before:.3} (> {TAU}); enriched: {n} enrichments (1..=10), max error at other steps {after:.3} (< {TAU}), enriched steps zeroed: {zeroed}"
        ),
    )
}

fn region_error(log: &EnrichmentLog, region: Region, quantities: &[Quantity]) -> f64 {
    quantities
        .iter()
        .flat_map(|q| log.errors(Monitor::new(*q, region), true))
        .filter(|v| !v.is_nan())
        .fold(0.0, f64::max)
}

fn criterion_9(off: &OfflineArtifacts, reference: &SnapshotArchive) -> Outcome {
    let mut cfg = desk_config();
    cfg.enrichment.region = Region::Id(1);
    let res = online_pipeline(&cfg, off, Some(reference), true).unwrap();
    let n = res.log.enrichments();
    let a = region_error(&res.log, Region::Id(1), &cfg.enrichment.quantities);
    let b = region_error(&res.log, Region::Id(0), &cfg.enrichment.quantities);
    outcome(
        n >= 1 && a < TAU,
        format!("monitoring region 1 (hot spot): {n} enrichments, region 1 max error {a:.3} (< {TAU}); region 0 max error {b:.3} (unconstrained)"),
    )
}

fn csv_hashes(root: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let digest = Sha256::digest(std::fs::read(&p).unwrap());
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), hex);
            }
        }
    }
    out
}

fn persist(dir: &Path, off: &OfflineArtifacts, res: &OnlineResult) {
    off.save(dir).unwrap();
    save_online(dir, &off.hf, res).unwrap();
    export(dir, ExportFlags { csv: true, vtk: false }).unwrap();
}

fn criterion_10(off: &OfflineArtifacts, reference: &SnapshotArchive, enriched: &OnlineResult) -> Outcome {
    let cfg = desk_config();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    persist(a.path(), off, enriched);
    let off2 = offline_pipeline(&cfg).unwrap();
    let res2 = online_pipeline(&cfg, &off2, Some(reference), true).unwrap();
    persist(b.path(), &off2, &res2);
    let (ha, hb) = (csv_hashes(a.path()), csv_hashes(b.path()));
    let differing = ha.iter().filter(|(k, v)| hb.get(*k) != Some(v)).count();
    outcome(
        !ha.is_empty() && ha.len() == hb.len() && differing == 0,
        format!("{} CSV files hashed per run, {differing} differ; enrichment logs equal: {}", ha.len(), enriched.log.entries == res2.log.entries),
    )
}

fn main() {
    let cfg = desk_config();
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut report = |i: usize, o: Outcome| {
        println!("criterion {i:>2}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((i, o));
    };

    report(1, criterion_1());
    report(2, criterion_2());
    let off = offline_pipeline(&cfg).unwrap();
    report(3, criterion_3(&off.hf, &off.archive, cfg.tolerances.pod));
    report(4, criterion_4(&off.hf, &off, cfg.tolerances.ecm));
    report(5, criterion_5(&off));
    report(6, criterion_6());
    report(7, criterion_7(&off));
    let reference = hf_reference(&cfg).unwrap();
    let plain = online_pipeline(&cfg, &off, Some(&reference), false).unwrap();
    let enriched = online_pipeline(&cfg, &off, Some(&reference), true).unwrap();
    report(8, criterion_8(&plain, &enriched));
    report(9, criterion_9(&off, &reference));
    report(10, criterion_10(&off, &reference, &enriched));

    let failed: Vec<String> = results.iter().filter(|(_, o)| !o.pass).map(|(i, _)| i.to_string()).collect();
    println!("acceptance: {}/{} passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failing: {}", failed.join(", "));
        if std::env::var_os("NLROM_ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
