//! Temperature-dependent behavior laws: cubic thermoelasticity and Norton
//! viscoplasticity with nonlinear kinematic hardening.

mod elas;
mod evp;
mod oracle;
mod table;

pub use elas::{
    elastic_stiffness, integrate_elas, thermal_strain, CubicModuli, ElasParams, REFERENCE_TEMPERATURE,
};
pub use evp::{
    flow, integrate_evp, numerical_tangent, positive_power, update_evp, EvpCoefficients, EvpParams, TANGENT_STEP,
};
pub use oracle::{evp_oracle, OracleSample, PathPoint};
pub use table::TemperatureTable;

use crate::error::Result;
use crate::tensor::{Stiffness, SymTensor};
use serde::{Deserialize, Serialize};

/// Internal variables at one integration point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialState {
    pub eps_p: SymTensor,
    pub alpha: SymTensor,
    pub p: f64,
}

impl MaterialState {
    /// Flat layout `[eps_p(6), alpha(6), p]` used by the archives.
    pub fn to_row(&self) -> [f64; 13] {
        let mut r = [0.0; 13];
        r[..6].copy_from_slice(&self.eps_p.0);
        r[6..12].copy_from_slice(&self.alpha.0);
        r[12] = self.p;
        r
    }

    pub fn from_row(r: &[f64]) -> Self {
        let mut eps_p = [0.0; 6];
        let mut alpha = [0.0; 6];
        eps_p.copy_from_slice(&r[..6]);
        alpha.copy_from_slice(&r[6..12]);
        MaterialState {
            eps_p: SymTensor(eps_p),
            alpha: SymTensor(alpha),
            p: r[12],
        }
    }
}

/// Outcome of one local integration.
#[derive(Clone, Copy, Debug)]
pub struct LawResponse {
    pub stress: SymTensor,
    pub tangent: Option<Stiffness>,
    pub state: MaterialState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum Law {
    Elas(ElasParams),
    Evp(EvpParams),
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        match self {
            Law::Elas(p) => p.validate(),
            Law::Evp(p) => p.validate(),
        }
    }

    pub fn elastic(&self) -> &ElasParams {
        match self {
            Law::Elas(p) => p,
            Law::Evp(p) => &p.elastic,
        }
    }

    /// Integrates the law over one time step. The tangent is computed only
    /// when requested.
    pub fn integrate(
        &self,
        state: &MaterialState,
        eps: &SymTensor,
        temperature: f64,
        dt: f64,
        with_tangent: bool,
    ) -> Result<LawResponse> {
        match self {
            Law::Elas(p) => {
                let (stress, tangent) = integrate_elas(p, eps, temperature);
                Ok(LawResponse {
                    stress,
                    tangent: with_tangent.then_some(tangent),
                    state: *state,
                })
            }
            Law::Evp(p) => {
                let (stress, new_state, plastic) = update_evp(p, state, eps, temperature, dt)?;
                let tangent = if with_tangent {
                    Some(numerical_tangent(p, state, eps, temperature, dt, TANGENT_STEP, plastic)?)
                } else {
                    None
                };
                Ok(LawResponse {
                    stress,
                    tangent,
                    state: new_state,
                })
            }
        }
    }
}

/// Desk-scale parameter set used by tests and example configurations:
/// isotropic steel-like elasticity (E = 200 GPa, nu = 0.3), R0 = 200 MPa,
/// C = 1e4 MPa, D = 50, K = 500, m = 5, alpha_th = 1e-5 / K.
pub fn test_fixture_evp() -> EvpParams {
    EvpParams {
        elastic: ElasParams::isotropic(200_000.0, 0.3, 1e-5),
        c: TemperatureTable::constant(1e4),
        d: TemperatureTable::constant(50.0),
        k: TemperatureTable::constant(500.0),
        m: TemperatureTable::constant(5.0),
        r0: TemperatureTable::constant(200.0),
    }
}
