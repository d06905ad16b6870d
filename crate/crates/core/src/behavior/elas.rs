use super::TemperatureTable;
use crate::error::{Error, Result};
use crate::tensor::{Stiffness, SymTensor};
use serde::{Deserialize, Serialize};

/// Reference temperature of the thermal strain, in degrees Celsius.
pub const REFERENCE_TEMPERATURE: f64 = 20.0;

/// Cubic thermoelasticity coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasParams {
    pub y1111: TemperatureTable,
    pub y1122: TemperatureTable,
    pub y1212: TemperatureTable,
    /// Thermal expansion coefficient, per kelvin.
    pub alpha_th: TemperatureTable,
}

impl ElasParams {
    /// Isotropic parameters from Young's modulus and Poisson's ratio.
    pub fn isotropic(young: f64, poisson: f64, alpha_th: f64) -> Self {
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        let mu = young / (2.0 * (1.0 + poisson));
        ElasParams {
            y1111: TemperatureTable::constant(lambda + 2.0 * mu),
            y1122: TemperatureTable::constant(lambda),
            y1212: TemperatureTable::constant(mu),
            alpha_th: TemperatureTable::constant(alpha_th),
        }
    }

    /// Positive definiteness of the cubic stiffness at every breakpoint.
    pub fn validate(&self) -> Result<()> {
        let mut temps: Vec<f64> = [&self.y1111, &self.y1122, &self.y1212]
            .iter()
            .flat_map(|t| t.breakpoints().iter().copied())
            .collect();
        temps.sort_by(f64::total_cmp);
        for t in temps {
            let (a, b, c) = (self.y1111.eval(t), self.y1122.eval(t), self.y1212.eval(t));
            // eigenvalues of the cubic matrix: a + 2b, a - b (twice), c (three times)
            if !(a + 2.0 * b > 0.0 && a - b > 0.0 && c > 0.0) {
                return Err(Error::Config(format!(
                    "elastic stiffness is not positive definite at T = {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn moduli(&self, t: f64) -> CubicModuli {
        CubicModuli {
            y1111: self.y1111.eval(t),
            y1122: self.y1122.eval(t),
            y1212: self.y1212.eval(t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicModuli {
    pub y1111: f64,
    pub y1122: f64,
    pub y1212: f64,
}

impl CubicModuli {
    pub fn matrix(&self) -> Stiffness {
        let mut a = Stiffness::zeros();
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = if i == j { self.y1111 } else { self.y1122 };
            }
            a[(i + 3, i + 3)] = self.y1212;
        }
        a
    }

    /// `A : e` for a strain tensor.
    pub fn apply(&self, e: &SymTensor) -> SymTensor {
        let t = &e.0;
        let tr = t[0] + t[1] + t[2];
        let d = self.y1111 - self.y1122;
        let s = 2.0 * self.y1212;
        SymTensor([
            self.y1122 * tr + d * t[0],
            self.y1122 * tr + d * t[1],
            self.y1122 * tr + d * t[2],
            s * t[3],
            s * t[4],
            s * t[5],
        ])
    }

    /// Twice the shear modulus acting on normal deviatoric components.
    pub fn two_mu_normal(&self) -> f64 {
        self.y1111 - self.y1122
    }

    /// Twice the shear modulus acting on off-diagonal components.
    pub fn two_mu_shear(&self) -> f64 {
        2.0 * self.y1212
    }
}

/// Stiffness in Voigt notation (engineering shear strains).
pub fn elastic_stiffness(params: &ElasParams, t: f64) -> Stiffness {
    params.moduli(t).matrix()
}

pub fn thermal_strain(params: &ElasParams, t: f64) -> SymTensor {
    SymTensor::identity() * (params.alpha_th.eval(t) * (t - REFERENCE_TEMPERATURE))
}

/// Stateless thermoelastic update `sigma = A(T) : (eps - eps_th(T))`.
pub fn integrate_elas(params: &ElasParams, eps: &SymTensor, t: f64) -> (SymTensor, Stiffness) {
    let moduli = params.moduli(t);
    let sigma = moduli.apply(&(*eps - thermal_strain(params, t)));
    (sigma, moduli.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso() -> ElasParams {
        ElasParams::isotropic(200_000.0, 0.3, 1e-5)
    }

    #[test]
    fn isotropic_choice_gives_lame_tensor() {
        let p = ElasParams {
            y1111: TemperatureTable::constant(300.0),
            y1122: TemperatureTable::constant(100.0),
            y1212: TemperatureTable::constant(100.0),
            alpha_th: TemperatureTable::constant(0.0),
        };
        let (lambda, mu) = (100.0, 100.0);
        let a = elastic_stiffness(&p, 20.0);
        for i in 0..6 {
            for j in 0..6 {
                let lame = if i < 3 && j < 3 {
                    lambda + if i == j { 2.0 * mu } else { 0.0 }
                } else if i == j {
                    mu
                } else {
                    0.0
                };
                assert_eq!(a[(i, j)], lame);
            }
        }
    }

    #[test]
    fn coefficients_follow_the_table() {
        let mut p = iso();
        p.y1212 = TemperatureTable::new(vec![100.0, 200.0], vec![10.0, 30.0]).unwrap();
        assert_eq!(elastic_stiffness(&p, 100.0)[(3, 3)], 10.0);
        assert_eq!(elastic_stiffness(&p, 150.0)[(4, 4)], 20.0);
    }

    #[test]
    fn thermal_strain_examples() {
        let p = iso();
        assert_eq!(thermal_strain(&p, 20.0), SymTensor::ZERO);
        let e = thermal_strain(&p, 120.0);
        assert!((e.0[0] - 1e-3).abs() < 1e-18);
        assert_eq!(e.0[3], 0.0);
        let mut q = iso();
        q.alpha_th = TemperatureTable::new(vec![20.0, 220.0], vec![1e-5, 3e-5]).unwrap();
        assert!((thermal_strain(&q, 120.0).0[1] - 2e-5 * 100.0).abs() < 1e-18);
    }

    #[test]
    fn free_thermal_expansion_is_stress_free() {
        let p = iso();
        let (s, _) = integrate_elas(&p, &thermal_strain(&p, 300.0), 300.0);
        assert!(s.max_abs() < 1e-9);
        let (s0, _) = integrate_elas(&p, &SymTensor::ZERO, 20.0);
        assert_eq!(s0, SymTensor::ZERO);
    }

    #[test]
    fn uniaxial_strain_matches_voigt_product() {
        let p = iso();
        let e = 1e-3;
        let eps = SymTensor([e, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let (s, a) = integrate_elas(&p, &eps, 20.0);
        let v = a * eps.to_strain_voigt();
        for i in 0..6 {
            assert!((s.0[i] - v[i]).abs() < 1e-9);
        }
        // oracle: lambda + 2 mu and lambda
        let (lambda, mu) = (115_384.615_384_615_4, 76_923.076_923_076_9);
        assert!((s.0[0] - (lambda + 2.0 * mu) * e).abs() < 1e-6);
        assert!((s.0[1] - lambda * e).abs() < 1e-6);
    }

    #[test]
    fn shear_application_matches_matrix() {
        let m = CubicModuli {
            y1111: 250.0,
            y1122: 90.0,
            y1212: 70.0,
        };
        let e = SymTensor([0.1, -0.3, 0.2, 0.05, -0.02, 0.07]);
        let via_matrix = SymTensor::from_stress_voigt(&(m.matrix() * e.to_strain_voigt()));
        let direct = m.apply(&e);
        for i in 0..6 {
            assert!((via_matrix.0[i] - direct.0[i]).abs() < 1e-12);
        }
    }
}
