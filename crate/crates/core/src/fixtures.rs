//! Desk-scale fixture: a clamped bow-tie bar under rotation, end pressure
//! and a moving hot spot, split into two regions along x.

use crate::behavior::{evp_oracle, update_evp, PathPoint, ElasParams, EvpParams, Law, MaterialState, TemperatureTable};
use crate::error::Result;
use crate::hf::{KeyframeSpec, LoadingSpec, PiecewiseLinear, PressureSpec, RotationAxis, TemperatureSpec};
use crate::indicator::Region;
use crate::mesh::Waist;
use crate::pipeline::{EnrichmentConfig, ExportFlags, MeshSource, PipelineConfig, Tolerances};
use crate::rom::Quantity;
use crate::tensor::{SymTensor, Voigt};
use std::f64::consts::PI;
use std::path::PathBuf;

pub const LENGTH: f64 = 40.0;
pub const WIDTH: f64 = 8.0;

/// Viscoplastic law softening with temperature.
pub fn desk_law() -> EvpParams {
    let temps = vec![20.0, 300.0, 600.0];
    EvpParams {
        elastic: ElasParams::isotropic(200_000.0, 0.3, 1e-5),
        c: TemperatureTable::constant(1e4),
        d: TemperatureTable::constant(50.0),
        k: TemperatureTable::new(temps.clone(), vec![500.0, 400.0, 250.0]).expect("increasing temperatures"),
        m: TemperatureTable::constant(5.0),
        r0: TemperatureTable::new(temps, vec![200.0, 160.0, 90.0]).expect("increasing temperatures"),
    }
}

pub fn desk_mesh() -> MeshSource {
    MeshSource::Box {
        lengths: [LENGTH, WIDTH, WIDTH],
        divisions: [10, 3, 3],
        origin: [0.0; 3],
        clamp: "xmin".into(),
        waist: Some(Waist { depth: 0.3 }),
        region_splits: vec![0.5],
    }
}

/// Hot spot of `peak` degrees above 20 centred at `x` along the bar.
pub fn hot_spot(x: f64, y: f64, peak: f64) -> TemperatureSpec {
    TemperatureSpec::Gaussian {
        base: 20.0,
        peak,
        center: [x, y, 0.5 * WIDTH],
        radius: 8.0,
    }
}

/// Load-up, hold and unload cycle of `STEPS` one-second steps; the
/// temperature follows the rotation speed.
pub const STEPS: usize = 24;

pub fn cycle(label: &str, field: TemperatureSpec) -> LoadingSpec {
    let profile = |peak: f64| PiecewiseLinear {
        times: vec![0.0, 8.0, 16.0, 24.0],
        values: vec![0.0, peak, peak, 0.0],
    };
    LoadingSpec {
        label: label.into(),
        times: (1..=STEPS).map(|i| i as f64).collect(),
        rotation_rpm: profile(20_000.0),
        axis: RotationAxis {
            point: [-100.0, 0.5 * WIDTH, 0.0],
            direction: [0.0, 0.0, 1.0],
        },
        density: 8000.0,
        pressure: PressureSpec {
            surface: "xmax".into(),
            coefficient: profile(80.0),
            shape: None,
        },
        temperature: vec![
            KeyframeSpec {
                time: 1.0,
                field: TemperatureSpec::Scaled {
                    factor: 0.125,
                    of: Box::new(field.clone()),
                },
            },
            KeyframeSpec {
                time: 8.0,
                field: field.clone(),
            },
            KeyframeSpec { time: 16.0, field },
            KeyframeSpec {
                time: 24.0,
                field: TemperatureSpec::Uniform { value: 20.0 },
            },
        ],
    }
}

/// Offline "computation 1/2": one hot spot in each region.
pub fn offline_loadings() -> Vec<LoadingSpec> {
    vec![
        cycle("computation1", hot_spot(10.0, 0.5 * WIDTH, 400.0)),
        cycle("computation2", hot_spot(25.0, 0.5 * WIDTH, 400.0)),
    ]
}

/// Online loading with a hot spot never seen offline, towards the tip and
/// off-centre.
pub fn unseen_loading() -> LoadingSpec {
    cycle("new", hot_spot(30.0, 0.0, 500.0))
}

pub fn desk_config() -> PipelineConfig {
    PipelineConfig {
        output: PathBuf::from("desk_output"),
        mesh: desk_mesh(),
        law: Law::Evp(desk_law()),
        tolerances: Tolerances::default(),
        offline: offline_loadings(),
        online: unseen_loading(),
        enrichment: EnrichmentConfig {
            enabled: true,
            tau: 0.2,
            quantities: vec![Quantity::P, Quantity::Sigma(0)],
            region: Region::All,
        },
        export: ExportFlags::default(),
        base: PathBuf::new(),
    }
}

/// Elastic bar under end pressure only, small enough for smoke tests:
/// two offline amplitudes, a third online.
pub fn smoke_config() -> PipelineConfig {
    let loading = |label: &str, peak: f64| LoadingSpec {
        label: label.into(),
        times: vec![1.0, 2.0, 3.0],
        rotation_rpm: PiecewiseLinear {
            times: vec![0.0],
            values: vec![0.0],
        },
        axis: RotationAxis {
            point: [0.0; 3],
            direction: [0.0, 0.0, 1.0],
        },
        density: 0.0,
        pressure: PressureSpec {
            surface: "xmax".into(),
            coefficient: PiecewiseLinear {
                times: vec![0.0, 3.0],
                values: vec![0.0, peak],
            },
            shape: None,
        },
        temperature: vec![KeyframeSpec {
            time: 1.0,
            field: TemperatureSpec::Uniform { value: 20.0 },
        }],
    };
    PipelineConfig {
        output: PathBuf::from("smoke_output"),
        mesh: MeshSource::Box {
            lengths: [8.0, 2.0, 2.0],
            divisions: [4, 1, 1],
            origin: [0.0; 3],
            clamp: "xmin".into(),
            waist: None,
            region_splits: vec![0.5],
        },
        law: Law::Elas(ElasParams::isotropic(200_000.0, 0.3, 1e-5)),
        tolerances: Tolerances::default(),
        offline: vec![loading("low", 50.0), loading("high", 100.0)],
        online: loading("mid", 75.0),
        enrichment: EnrichmentConfig::default(),
        export: ExportFlags::default(),
        base: PathBuf::new(),
    }
}

/// Mixed tension / shear strain path over 100 s with a 20 to 420 degree
/// ramp, sampled at `steps + 1` equally spaced times.
pub fn mixed_strain_path(steps: usize) -> Vec<PathPoint> {
    (0..=steps)
        .map(|i| {
            let s = i as f64 / steps as f64;
            let e11 = 4e-3 * (PI * s).sin();
            let g12 = 5e-3 * (2.0 * PI * s).sin();
            let v = Voigt::from_row_slice(&[e11, -0.3 * e11, -0.3 * e11, g12, 0.0, 0.5 * g12]);
            PathPoint {
                time: 100.0 * s,
                strain: SymTensor::from_strain_voigt(&v),
                temperature: 20.0 + 400.0 * s,
            }
        })
        .collect()
}

/// Backward-Euler stress and state at every path point after the first.
pub fn backward_euler_path(params: &EvpParams, path: &[PathPoint]) -> Result<Vec<(SymTensor, MaterialState)>> {
    let mut state = MaterialState::default();
    let mut out = Vec::with_capacity(path.len().saturating_sub(1));
    for w in path.windows(2) {
        let (sigma, next, _) = update_evp(params, &state, &w[1].strain, w[1].temperature, w[1].time - w[0].time)?;
        state = next;
        out.push((sigma, state));
    }
    Ok(out)
}

/// Largest stress and cumulated-plasticity deviations of backward Euler on
/// `mixed_strain_path(steps)` from the RK4 oracle, relative to the largest
/// oracle values over the path.
pub fn return_mapping_errors(params: &EvpParams, steps: usize, substeps: usize) -> Result<(f64, f64)> {
    let path = mixed_strain_path(steps);
    let be = backward_euler_path(params, &path)?;
    let oracle = evp_oracle(params, &MaterialState::default(), &path, substeps)?;
    let s_ref = oracle.iter().map(|o| o.stress.norm()).fold(0.0, f64::max);
    let p_ref = oracle.iter().map(|o| o.state.p).fold(0.0, f64::max);
    let mut es: f64 = 0.0;
    let mut ep: f64 = 0.0;
    for ((sigma, st), o) in be.iter().zip(&oracle) {
        es = es.max((*sigma - o.stress).norm() / s_ref);
        ep = ep.max((st.p - o.state.p).abs() / p_ref);
    }
    Ok((es, ep))
}
