//! Reference integrator for the viscoplastic ODE system: classical RK4 with
//! many substeps per path segment, strain and temperature interpolated
//! linearly inside each segment. Verification only.

use super::elas::thermal_strain;
use super::evp::{flow, EvpParams};
use super::MaterialState;
use crate::error::{Error, Result};
use crate::tensor::SymTensor;

/// A point of a prescribed loading path.
#[derive(Clone, Copy, Debug)]
pub struct PathPoint {
    pub time: f64,
    pub strain: SymTensor,
    pub temperature: f64,
}

/// Oracle trajectory entry at the end of each segment.
#[derive(Clone, Copy, Debug)]
pub struct OracleSample {
    pub state: MaterialState,
    pub stress: SymTensor,
}

#[derive(Clone, Copy)]
struct Y {
    eps_p: SymTensor,
    alpha: SymTensor,
    p: f64,
}

impl Y {
    fn axpy(&self, h: f64, d: &Y) -> Y {
        Y {
            eps_p: self.eps_p + d.eps_p * h,
            alpha: self.alpha + d.alpha * h,
            p: self.p + h * d.p,
        }
    }
}

fn stress(params: &EvpParams, y: &Y, eps: &SymTensor, t: f64) -> SymTensor {
    params
        .elastic
        .moduli(t)
        .apply(&(*eps - thermal_strain(&params.elastic, t) - y.eps_p))
}

fn rate(params: &EvpParams, y: &Y, eps: &SymTensor, t: f64) -> Y {
    let co = params.coefficients(t);
    let sigma = stress(params, y, eps, t);
    let xi = sigma.deviator() - y.alpha * (2.0 / 3.0 * co.c);
    let (pdot, n) = flow(&xi, &co);
    let deps_p = n * pdot;
    Y {
        eps_p: deps_p,
        alpha: deps_p - y.alpha * (pdot * co.d),
        p: pdot,
    }
}

/// Integrates the exact ODE system along `path`; `state` is the state at
/// `path[0]`. Returns one sample per subsequent path point.
pub fn evp_oracle(
    params: &EvpParams,
    state: &MaterialState,
    path: &[PathPoint],
    substeps: usize,
) -> Result<Vec<OracleSample>> {
    if substeps < 1000 {
        return Err(Error::Config("the ODE oracle needs at least 1000 substeps".into()));
    }
    let mut y = Y {
        eps_p: state.eps_p,
        alpha: state.alpha,
        p: state.p,
    };
    let mut out = Vec::with_capacity(path.len().saturating_sub(1));
    for seg in path.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        let span = b.time - a.time;
        let h = span / substeps as f64;
        let at = |s: f64| -> (SymTensor, f64) {
            let w = s / span;
            (
                a.strain * (1.0 - w) + b.strain * w,
                a.temperature * (1.0 - w) + b.temperature * w,
            )
        };
        for i in 0..substeps {
            let s0 = i as f64 * h;
            let (e0, t0) = at(s0);
            let (em, tm) = at(s0 + 0.5 * h);
            let (e1, t1) = at(s0 + h);
            let k1 = rate(params, &y, &e0, t0);
            let k2 = rate(params, &y.axpy(0.5 * h, &k1), &em, tm);
            let k3 = rate(params, &y.axpy(0.5 * h, &k2), &em, tm);
            let k4 = rate(params, &y.axpy(h, &k3), &e1, t1);
            y = Y {
                eps_p: y.eps_p + (k1.eps_p + k2.eps_p * 2.0 + k3.eps_p * 2.0 + k4.eps_p) * (h / 6.0),
                alpha: y.alpha + (k1.alpha + k2.alpha * 2.0 + k3.alpha * 2.0 + k4.alpha) * (h / 6.0),
                p: y.p + (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p) * (h / 6.0),
            };
        }
        out.push(OracleSample {
            state: MaterialState {
                eps_p: y.eps_p,
                alpha: y.alpha,
                p: y.p,
            },
            stress: stress(params, &y, &b.strain, b.temperature),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::test_fixture_evp;

    fn pt(time: f64, strain: SymTensor) -> PathPoint {
        PathPoint {
            time,
            strain,
            temperature: 20.0,
        }
    }

    #[test]
    fn zero_path_keeps_state() {
        let p = test_fixture_evp();
        let s = MaterialState::default();
        let path = [pt(0.0, SymTensor::ZERO), pt(1.0, SymTensor::ZERO)];
        let out = evp_oracle(&p, &s, &path, 1000).unwrap();
        assert_eq!(out[0].state, s);
    }

    #[test]
    fn elastic_path_accumulates_no_plasticity() {
        let p = test_fixture_evp();
        let e = SymTensor([2e-4, -1e-4, -1e-4, 0.0, 0.0, 0.0]);
        let path = [pt(0.0, SymTensor::ZERO), pt(1.0, e), pt(2.0, SymTensor::ZERO)];
        let out = evp_oracle(&p, &MaterialState::default(), &path, 1000).unwrap();
        assert!(out.iter().all(|o| o.state.p == 0.0));
    }

    #[test]
    fn rejects_coarse_substepping() {
        let p = test_fixture_evp();
        assert!(evp_oracle(&p, &MaterialState::default(), &[], 10).is_err());
    }
}
