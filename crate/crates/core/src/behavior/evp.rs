//! Norton viscoplasticity with nonlinear kinematic hardening.
//!
//! Local update: backward Euler on the flow rule, reduced to one scalar
//! equation in the overstress variable `v = (dp/dt)^(1/m)`, so that the
//! yield function at the end of the step is `J = R0 + K v`. The cubic
//! stiffness acts on deviators through two moduli (normal and shear
//! components), which keeps the reduction exact without assuming isotropy.

use super::elas::{thermal_strain, CubicModuli, ElasParams};
use super::{MaterialState, TemperatureTable};
use crate::error::{Error, Result};
use crate::tensor::{Stiffness, SymTensor};
use serde::{Deserialize, Serialize};

const MAX_LOCAL_ITERATIONS: usize = 100;
const LOCAL_TOLERANCE: f64 = 1e-12;
/// Relative central-difference step of the numerical tangent.
pub const TANGENT_STEP: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvpParams {
    #[serde(flatten)]
    pub elastic: ElasParams,
    /// Kinematic hardening modulus (MPa).
    pub c: TemperatureTable,
    /// Dynamic recovery coefficient.
    pub d: TemperatureTable,
    /// Norton resistance (MPa s^(1/m)).
    pub k: TemperatureTable,
    /// Norton exponent.
    pub m: TemperatureTable,
    /// Initial yield stress (MPa).
    pub r0: TemperatureTable,
}

impl EvpParams {
    pub fn validate(&self) -> Result<()> {
        self.elastic.validate()?;
        if !self.k.all_values(|v| v > 0.0) {
            return Err(Error::Config("Norton resistance K must be positive".into()));
        }
        if !self.m.all_values(|v| v >= 1.0) {
            return Err(Error::Config("Norton exponent m must be at least 1".into()));
        }
        if !self.r0.all_values(|v| v > 0.0) {
            return Err(Error::Config("yield stress R0 must be positive".into()));
        }
        if !self.c.all_values(|v| v >= 0.0) || !self.d.all_values(|v| v >= 0.0) {
            return Err(Error::Config("hardening coefficients must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn coefficients(&self, t: f64) -> EvpCoefficients {
        EvpCoefficients {
            moduli: self.elastic.moduli(t),
            c: self.c.eval(t),
            d: self.d.eval(t),
            k: self.k.eval(t),
            m: self.m.eval(t),
            r0: self.r0.eval(t),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvpCoefficients {
    pub moduli: CubicModuli,
    pub c: f64,
    pub d: f64,
    pub k: f64,
    pub m: f64,
    pub r0: f64,
}

/// `<x>^m` computed on the positive branch only.
pub fn positive_power(x: f64, m: f64) -> f64 {
    if x > 0.0 {
        (m * x.ln()).exp()
    } else {
        0.0
    }
}

/// Flow rates `(dp/dt, n)` for a given relative stress `xi = s - 2/3 C alpha`.
pub fn flow(xi: &SymTensor, co: &EvpCoefficients) -> (f64, SymTensor) {
    let j = xi.equivalent();
    let rate = positive_power((j - co.r0) / co.k, co.m);
    if rate == 0.0 || j == 0.0 {
        return (0.0, SymTensor::ZERO);
    }
    (rate, *xi * (1.5 / j))
}

struct Trial {
    sigma: SymTensor,
    f: f64,
}

fn trial(params: &EvpParams, co: &EvpCoefficients, state: &MaterialState, eps: &SymTensor, t: f64) -> Trial {
    let sigma = co.moduli.apply(&(*eps - thermal_strain(&params.elastic, t) - state.eps_p));
    let xi = sigma.deviator() - state.alpha * (2.0 / 3.0 * co.c);
    let f = xi.equivalent() - co.r0;
    Trial { sigma, f }
}

/// Relative stress at the end of the step for overstress `v`, and the
/// consistency residual `J(xi) - (R0 + K v)`.
fn relative_stress(
    s_trial: &SymTensor,
    alpha_old: &SymTensor,
    co: &EvpCoefficients,
    dt: f64,
    v: f64,
) -> (SymTensor, f64, f64) {
    let dp = dt * positive_power(v, co.m);
    let j = co.r0 + co.k * v;
    let h = 2.0 / 3.0 * co.c / (1.0 + co.d * dp);
    let star = *s_trial - *alpha_old * h;
    let an = 1.5 * dp * (co.moduli.two_mu_normal() + h);
    let as_ = 1.5 * dp * (co.moduli.two_mu_shear() + h);
    let mut xi = star;
    for c in 0..3 {
        xi.0[c] *= j / (j + an);
    }
    for c in 3..6 {
        xi.0[c] *= j / (j + as_);
    }
    (xi, dp, xi.equivalent() - j)
}

fn solve_overstress(s_trial: &SymTensor, alpha_old: &SymTensor, co: &EvpCoefficients, dt: f64) -> Result<f64> {
    let g = |v: f64| relative_stress(s_trial, alpha_old, co, dt, v).2;
    let mut lo = 0.0;
    let mut hi = (s_trial.equivalent() + 2.0 / 3.0 * co.c * alpha_old.equivalent()) / co.k;
    let scale = co.r0 + co.k * hi;
    let mut v = 0.5 * hi;
    let mut gv = g(v);
    let mut last_step = hi;
    for _ in 0..MAX_LOCAL_ITERATIONS {
        if gv.abs() <= LOCAL_TOLERANCE * scale || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(v);
        }
        if gv > 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let h = 1e-7 * (v.abs() + 1e-9 * hi);
        let slope = (g(v + h) - g(v - h)) / (2.0 * h);
        let step = -gv / slope;
        let newton = v + step;
        let bisect = !(slope.is_finite() && slope < 0.0 && newton > lo && newton < hi)
            || step.abs() > 0.5 * last_step;
        v = if bisect { 0.5 * (lo + hi) } else { newton };
        last_step = if bisect { 0.5 * (hi - lo) } else { step.abs() };
        gv = g(v);
    }
    if gv.abs() <= LOCAL_TOLERANCE * scale || hi - lo <= 4.0 * f64::EPSILON * hi {
        Ok(v)
    } else {
        Err(Error::Behavior {
            iterations: MAX_LOCAL_ITERATIONS,
            residual: gv,
        })
    }
}

/// Stress and new state without the tangent.
pub fn update_evp(
    params: &EvpParams,
    state: &MaterialState,
    eps: &SymTensor,
    t: f64,
    dt: f64,
) -> Result<(SymTensor, MaterialState, bool)> {
    let co = params.coefficients(t);
    let tr = trial(params, &co, state, eps, t);
    if tr.f <= 0.0 {
        return Ok((tr.sigma, *state, false));
    }
    let s_trial = tr.sigma.deviator();
    let v = solve_overstress(&s_trial, &state.alpha, &co, dt)?;
    let (xi, dp, _) = relative_stress(&s_trial, &state.alpha, &co, dt, v);
    let j = co.r0 + co.k * v;
    let n = xi * (1.5 / j);
    let mut deps_p = n * dp;
    // flow is deviatoric; remove round-off drift of the trace
    let drift = deps_p.trace() / 3.0;
    for c in 0..3 {
        deps_p.0[c] -= drift;
    }
    let alpha = (state.alpha + deps_p) * (1.0 / (1.0 + co.d * dp));
    let new_state = MaterialState {
        eps_p: state.eps_p + deps_p,
        alpha,
        p: state.p + dp,
    };
    let sigma = tr.sigma - co.moduli.apply(&deps_p);
    Ok((sigma, new_state, true))
}

/// Backward-Euler update with a central-difference consistent tangent.
pub fn integrate_evp(
    params: &EvpParams,
    state: &MaterialState,
    eps: &SymTensor,
    t: f64,
    dt: f64,
) -> Result<(SymTensor, Stiffness, MaterialState)> {
    let (sigma, new_state, plastic) = update_evp(params, state, eps, t, dt)?;
    let tangent = numerical_tangent(params, state, eps, t, dt, TANGENT_STEP, plastic)?;
    Ok((sigma, tangent, new_state))
}

/// Central-difference derivative of the stress update with respect to the
/// engineering-Voigt strain. Returns the elastic matrix exactly when the base
/// point and every perturbation stay elastic.
pub fn numerical_tangent(
    params: &EvpParams,
    state: &MaterialState,
    eps: &SymTensor,
    t: f64,
    dt: f64,
    relative_step: f64,
    base_plastic: bool,
) -> Result<Stiffness> {
    let h = relative_step * eps.max_abs().max(1e-3);
    let mut tangent = Stiffness::zeros();
    let mut any_plastic = base_plastic;
    for j in 0..6 {
        let mut dv = crate::tensor::Voigt::zeros();
        dv[j] = h;
        let de = SymTensor::from_strain_voigt(&dv);
        let (sp, _, pp) = update_evp(params, state, &(*eps + de), t, dt)?;
        let (sm, _, pm) = update_evp(params, state, &(*eps - de), t, dt)?;
        any_plastic |= pp || pm;
        let col = (sp - sm).to_stress_voigt() / (2.0 * h);
        tangent.set_column(j, &col);
    }
    if any_plastic {
        Ok(tangent)
    } else {
        Ok(params.elastic.moduli(t).matrix())
    }
}
