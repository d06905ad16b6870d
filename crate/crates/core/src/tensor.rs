//! Symmetric second-order tensors and the Voigt conventions used throughout.
//!
//! Component order is `[11, 22, 33, 12, 23, 31]`. Strains handed to stiffness
//! matrices use engineering shear (`2 e12`), stresses use tensor shear, so
//! that `sigma : eps = stress_voigt . strain_voigt`.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub type Voigt = SVector<f64, 6>;
pub type Stiffness = SMatrix<f64, 6, 6>;

/// Component labels in storage order.
pub const COMPONENTS: [&str; 6] = ["11", "22", "33", "12", "23", "31"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTensor(pub [f64; 6]);

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor([0.0; 6]);

    pub fn identity() -> Self {
        SymTensor([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    }

    /// Builds the symmetric part of a full 3x3 matrix given row-major.
    pub fn sym_from_matrix(m: &[[f64; 3]; 3]) -> Self {
        SymTensor([
            m[0][0],
            m[1][1],
            m[2][2],
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[1][2] + m[2][1]),
            0.5 * (m[2][0] + m[0][2]),
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn deviator(&self) -> Self {
        let m = self.trace() / 3.0;
        let mut d = *self;
        for c in &mut d.0[..3] {
            *c -= m;
        }
        d
    }

    /// Double contraction `a : b`.
    pub fn ddot(&self, other: &SymTensor) -> f64 {
        let a = &self.0;
        let b = &other.0;
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    /// von Mises-type equivalent `sqrt(3/2 a:a)`.
    pub fn equivalent(&self) -> f64 {
        (1.5 * self.ddot(self)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Engineering-shear Voigt vector (strain convention).
    pub fn to_strain_voigt(&self) -> Voigt {
        let a = &self.0;
        Voigt::new(a[0], a[1], a[2], 2.0 * a[3], 2.0 * a[4], 2.0 * a[5])
    }

    pub fn from_strain_voigt(v: &Voigt) -> Self {
        SymTensor([v[0], v[1], v[2], 0.5 * v[3], 0.5 * v[4], 0.5 * v[5]])
    }

    /// Tensor-shear Voigt vector (stress convention).
    pub fn to_stress_voigt(&self) -> Voigt {
        Voigt::from_row_slice(&self.0)
    }

    pub fn from_stress_voigt(v: &Voigt) -> Self {
        SymTensor([v[0], v[1], v[2], v[3], v[4], v[5]])
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(mut self, rhs: SymTensor) -> SymTensor {
        self += rhs;
        self
    }
}

impl AddAssign for SymTensor {
    fn add_assign(&mut self, rhs: SymTensor) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(mut self, rhs: SymTensor) -> SymTensor {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        self * -1.0
    }
}

impl Mul<f64> for SymTensor {
    type Output = SymTensor;
    fn mul(mut self, s: f64) -> SymTensor {
        for a in &mut self.0 {
            *a *= s;
        }
        self
    }
}

impl Mul<SymTensor> for f64 {
    type Output = SymTensor;
    fn mul(self, t: SymTensor) -> SymTensor {
        t * self
    }
}
