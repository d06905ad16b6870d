//! Error measures, Gaussian-process calibration and the error indicator.

mod calibration;
mod gpr;
mod measures;

pub use calibration::{calibrate, step_error, step_residual, Calibration, CalibrationEntry, CalibrationPair, Monitor};
pub use gpr::{GprData, GprHyper, GprModel, SIGNAL_VAR};
pub use measures::{gappy_residual, region_values, relative_error, Region};

/// Pearson correlation coefficient; `None` when either sample is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{test_fixture_evp, Law};
    use crate::fem::{GlobalIntegrationTable, IpL2};
    use crate::hf::{
        HfModel, KeyframeSpec, LoadingSpec, NewtonOptions, PiecewiseLinear, PressureSpec, RotationAxis, TemperatureSpec,
    };
    use crate::hyper::full_quadrature;
    use crate::indicator::gpr::NOISE_FLOOR;
    use crate::mesh::BoxMeshBuilder;
    use crate::pod::ReducedBasis;
    use crate::rom::{gappy_offline, Quantity, ReducedModel};
    use crate::Error;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_element() -> GlobalIntegrationTable {
        let mesh = BoxMeshBuilder::new([2.0, 1.0, 1.0], [1, 1, 1]).build().unwrap();
        GlobalIntegrationTable::build(&mesh).unwrap()
    }

    #[test]
    fn relative_error_cases() {
        let table = one_element();
        let ip = IpL2::new(&table);
        let n = table.len();
        let mut hf = vec![0.0; n];
        let mut rec = vec![0.0; n];
        hf[0] = 2.0;
        hf[5] = -1.0;
        rec[0] = 1.5;
        rec[5] = 0.0;
        assert_eq!(relative_error(&hf, &hf, &ip, 1.0).unwrap(), 0.0);
        let (w0, w5) = (table.point(0).measure, table.point(5).measure);
        let expect = ((w0 * 0.25 + w5 * 1.0) / (w0 * 4.0 + w5 * 1.0)).sqrt();
        assert!((relative_error(&hf, &rec, &ip, 1.0).unwrap() - expect).abs() < 1e-14);

        let zero = vec![0.0; n];
        let e = relative_error(&zero, &rec, &ip, 3.0).unwrap();
        assert!((e - (w0 * 2.25).sqrt() / 3.0).abs() < 1e-14);
        assert!(matches!(relative_error(&zero, &rec, &ip, 0.0), Err(Error::UndefinedRelativeError)));
        assert_eq!(relative_error(&zero, &zero, &ip, 0.0).unwrap(), 0.0);
        assert!(relative_error(&hf, &rec[1..], &ip, 1.0).is_err());
    }

    #[test]
    fn gappy_residual_cases() {
        assert!((gappy_residual(&[3.0, 4.0], &[3.0, 0.0], 1.0).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(gappy_residual(&[1.0, 2.0], &[1.0, 2.0], 0.0).unwrap(), 0.0);
        let r = gappy_residual(&[0.0, 0.0], &[1.0, 1.0], 2.0).unwrap();
        assert!((r - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(matches!(gappy_residual(&[0.0], &[1.0], 0.0), Err(Error::UndefinedRelativeError)));
    }

    #[test]
    fn region_parsing() {
        assert_eq!(Region::parse("all").unwrap(), Region::All);
        assert_eq!(Region::parse("2").unwrap(), Region::Id(2));
        assert!(Region::parse("west").is_err());
        let s = serde_json::to_string(&Monitor::new(Quantity::Sigma(0), Region::Id(1))).unwrap();
        assert_eq!(s, r#"{"quantity":"s11","region":"1"}"#);
    }

    /// Closed-form GP mean and variance through an explicit inverse.
    fn dense_oracle(x: &[f64], y: &[f64], h: GprHyper, q: f64) -> (f64, f64) {
        let k = |a: f64, b: f64| h.signal_var * (-(a - b) * (a - b) / (2.0 * h.length_scale * h.length_scale)).exp();
        let n = x.len();
        let m = y.iter().sum::<f64>() / n as f64;
        let kk = DMatrix::from_fn(n, n, |i, j| k(x[i], x[j]) + if i == j { h.noise_var } else { 0.0 });
        let inv = kk.try_inverse().unwrap();
        let ks = DVector::from_fn(n, |i, _| k(q, x[i]));
        let yc = DVector::from_fn(n, |i, _| y[i] - m);
        (m + (ks.transpose() * &inv * yc)[0], h.signal_var + h.noise_var - (ks.transpose() * &inv * &ks)[0])
    }

    #[test]
    fn fixed_hyperparameters_match_closed_form() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 + 2.0 * v).collect();
        let h = GprHyper {
            signal_var: 1.0,
            length_scale: 0.5,
            noise_var: 1e-8,
        };
        let g = GprModel::with_hyper(&x, &y, h).unwrap();
        for q in [0.0, 0.37, 0.5, 1.4] {
            let (mu, var) = g.predict(q);
            let (om, ov) = dense_oracle(&x, &y, h, q);
            assert!((mu - om).abs() < 1e-6, "{mu} {om}");
            assert!((var - ov.max(0.0)).abs() < 1e-6);
        }
        for (xi, yi) in x.iter().zip(&y) {
            assert!((g.predict(*xi).0 - yi).abs() < 1e-3);
            assert!((g.indicator(*xi) - yi).abs() < 1e-3);
        }
        let far = g.predict(100.0);
        assert!((far.0 - g.data().mean).abs() < 1e-12 && (far.1 - 1.0 - 1e-8).abs() < 1e-12);
    }

    #[test]
    fn fitted_linear_targets_are_interpolated() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.1 + 0.8 * v).collect();
        let g = GprModel::fit(&x, &y).unwrap();
        assert!(!g.is_degenerate());
        for (xi, yi) in x.iter().zip(&y) {
            assert!((g.predict(*xi).0 - yi).abs() < 1e-3);
        }
        let again = GprModel::fit(&x, &y).unwrap();
        assert_eq!(g.data(), again.data());
        assert!((g.indicator(0.5) - g.indicator(0.5 + 1e-9)).abs() < 1e-6);
    }

    #[test]
    fn constant_targets_give_constant_mean() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y = vec![0.25; 10];
        let g = GprModel::fit(&x, &y).unwrap();
        for q in [0.0, 3.5, 9.0, 50.0] {
            assert!((g.predict(q).0 - 0.25).abs() < 1e-9);
        }
        assert!(g.predict(4.0).1 < 10.0 * NOISE_FLOOR);
    }

    #[test]
    fn single_input_is_degenerate() {
        let g = GprModel::fit(&[0.1, 0.1], &[0.2, 0.4]).unwrap();
        assert!(g.is_degenerate());
        assert!((g.predict(5.0).0 - 0.3).abs() < 1e-15);
        assert!((g.indicator(5.0) - (0.3 + 3.0 * 0.1)).abs() < 1e-12);
        let empty = GprModel::fit(&[], &[]).unwrap();
        assert!(empty.is_degenerate() && empty.indicator(1.0) == 0.0);
        assert!(GprModel::fit(&[0.0, f64::NAN], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn zero_query_on_zero_pair_is_near_zero() {
        let x = [0.0, 0.1, 0.2, 0.3];
        let y = [0.0, 0.05, 0.1, 0.15];
        let h = GprHyper {
            signal_var: 0.01,
            length_scale: 0.2,
            noise_var: 1e-14,
        };
        let g = GprModel::with_hyper(&x, &y, h).unwrap();
        assert!(g.indicator(0.0).abs() < 1e-5);
    }

    #[test]
    fn noisy_training_pairs_are_covered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..60).map(|_| rng.gen_range(0.0..0.5)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.6 * v + rng.gen_range(-0.02..0.02)).collect();
        let g = GprModel::fit(&x, &y).unwrap();
        let covered = x.iter().zip(&y).filter(|(a, b)| g.indicator(**a) >= **b).count();
        assert!(covered as f64 >= 0.9 * x.len() as f64, "{covered}");
        assert!(x.iter().all(|a| g.predict(*a).1 >= 0.0));
    }

    #[test]
    fn json_round_trip_preserves_predictions() {
        let x = [0.0, 0.2, 0.5, 0.9];
        let y = [0.01, 0.1, 0.3, 0.5];
        let g = GprModel::fit(&x, &y).unwrap();
        let back: GprModel = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        for q in [0.0, 0.33, 2.0] {
            assert_eq!(g.predict(q), back.predict(q));
        }
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn exact_basis_calibrates_to_zero() {
        let mesh = BoxMeshBuilder::new([4.0, 1.0, 1.0], [4, 1, 1])
            .clamp("xmin")
            .region_splits(vec![0.5])
            .build()
            .unwrap();
        let hf = HfModel::new(mesh, Law::Evp(test_fixture_evp())).unwrap();
        let prog = LoadingSpec {
            label: "c".into(),
            times: (1..=5).map(|i| i as f64).collect(),
            rotation_rpm: PiecewiseLinear::constant(0.0),
            axis: RotationAxis {
                point: [0.0; 3],
                direction: [0.0, 0.0, 1.0],
            },
            density: 8000.0,
            pressure: PressureSpec {
                surface: "xmax".into(),
                coefficient: PiecewiseLinear {
                    times: vec![0.0, 5.0],
                    values: vec![0.0, 420.0],
                },
                shape: None,
            },
            temperature: vec![KeyframeSpec {
                time: 1.0,
                field: TemperatureSpec::Uniform { value: 20.0 },
            }],
        }
        .materialize(hf.mesh())
        .unwrap();
        let opts = NewtonOptions { tol: 1e-12, max_iter: 30 };
        let archive = hf.run_transient(&prog, opts).unwrap();
        let quad = full_quadrature(&hf.table().measures());
        let ip = IpL2::new(hf.table());
        let duals = Quantity::ALL
            .iter()
            .map(|q| {
                let f: Vec<Vec<f64>> = archive.iter().map(|(_, s)| q.field(s)).collect();
                let r: Vec<&[f64]> = f.iter().map(Vec::as_slice).collect();
                gappy_offline(&r, 1e-12, &quad.indices, &ip).unwrap()
            })
            .collect();
        let primal = ReducedBasis {
            modes: hf.basis().as_modes(),
            eigenvalues: Vec::new(),
        };
        let model = ReducedModel::new(hf.mesh(), hf.table(), primal, quad, duals).unwrap();
        let regions = [Region::All, Region::Id(0), Region::Id(1)];
        let cal = calibrate(&hf, &model, &archive, &[prog], &regions, opts).unwrap();
        assert_eq!(cal.entries.len(), 21);
        for e in &cal.entries {
            if e.field_fallback < 1e-6 {
                continue;
            }
            assert!(e.pairs.iter().all(|p| p.residual < 1e-6 && p.error < 1e-6), "{}", e.monitor);
        }
        let p_all = cal.get(Monitor::new(Quantity::P, Region::All)).unwrap();
        assert!(!p_all.pairs.is_empty() && p_all.pairs.len() < 5);
        assert!(cal.indicator(Monitor::new(Quantity::Sigma(0), Region::All), 0.0).unwrap() < 1e-3);

        let dir = tempfile::tempdir().unwrap();
        cal.save(&dir.path().join("cal.json")).unwrap();
        let back = Calibration::load(&dir.path().join("cal.json")).unwrap();
        assert_eq!(back.entries.len(), 21);
        cal.save_scatter(dir.path()).unwrap();
        assert!(dir.path().join("calibration_p_all.csv").exists());
    }
}
