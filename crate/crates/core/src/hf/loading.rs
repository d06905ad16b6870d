use crate::behavior::REFERENCE_TEMPERATURE;
use crate::error::{Error, Result};
use crate::fem::{facet_quadrature, GlobalIntegrationTable};
use crate::mesh::{Mesh, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const RPM_TO_RAD_S: f64 = std::f64::consts::PI / 30.0;
/// kg/m^3 times mm/s^2 to N/mm^3.
const DENSITY_SCALE: f64 = 1e-12;

/// Piecewise-linear function of time, constant outside its breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseLinear {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn constant(value: f64) -> Self {
        PiecewiseLinear {
            times: vec![0.0],
            values: vec![value],
        }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if self.times.is_empty() || self.times.len() != self.values.len() {
            return Err(Error::Config(format!("{what}: times and values must match and be non-empty")));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!("{what}: times must increase strictly")));
        }
        if self.times.iter().chain(&self.values).any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("{what}: entries must be finite")));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (ts, vs) = (&self.times, &self.values);
        if t <= ts[0] {
            return vs[0];
        }
        if t >= ts[ts.len() - 1] {
            return vs[vs.len() - 1];
        }
        let i = ts.partition_point(|&x| x <= t) - 1;
        let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
        vs[i] + w * (vs[i + 1] - vs[i])
    }

    fn scaled(&self, s: f64) -> Self {
        PiecewiseLinear {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationAxis {
    pub point: Point,
    pub direction: [f64; 3],
}

impl RotationAxis {
    /// Vector from the axis to `x`, orthogonal to the axis.
    pub fn radial(&self, x: &Point) -> [f64; 3] {
        let n = (self.direction.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let d = self.direction.map(|v| v / n);
        let r = [x[0] - self.point[0], x[1] - self.point[1], x[2] - self.point[2]];
        let along = r[0] * d[0] + r[1] * d[1] + r[2] * d[2];
        [r[0] - along * d[0], r[1] - along * d[1], r[2] - along * d[2]]
    }
}

/// Nodal temperature field at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub time: f64,
    pub field: Vec<f64>,
}

/// Loading history of one nonparametrized variability. Angular speeds are
/// in rad/s, pressure coefficients in MPa, density in kg/m^3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadingProgram {
    pub label: String,
    pub times: Vec<f64>,
    pub rotation_speed: PiecewiseLinear,
    pub rotation_axis: RotationAxis,
    pub density: f64,
    pub pressure_coefficient: PiecewiseLinear,
    /// Facet label of the loaded surface.
    pub pressure_surface: String,
    /// One factor per facet carrying `pressure_surface`, in mesh order.
    pub pressure_shape: Vec<f64>,
    pub temperature_keyframes: Vec<Keyframe>,
}

impl LoadingProgram {
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("loading '{}': {m}", self.label)));
        if self.times.is_empty() || self.times[0] <= 0.0 {
            return bad("times must be non-empty and positive".into());
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("times must increase strictly".into());
        }
        self.rotation_speed.validate("rotation speed")?;
        self.pressure_coefficient.validate("pressure coefficient")?;
        if !(self.density >= 0.0) {
            return bad("density must be non-negative".into());
        }
        let facets: Vec<usize> = self.pressure_facets(mesh);
        if facets.len() != self.pressure_shape.len() {
            return bad(format!(
                "pressure shape has {} values for {} facets labeled '{}'",
                self.pressure_shape.len(),
                facets.len(),
                self.pressure_surface
            ));
        }
        if facets
            .iter()
            .any(|&f| mesh.facets()[f].nodes.iter().all(|&i| mesh.is_constrained(i)))
        {
            return bad("pressure surface overlaps the clamped boundary".into());
        }
        if self.temperature_keyframes.is_empty() {
            return bad("at least one temperature keyframe is required".into());
        }
        let (first, last) = (self.times[0], self.times[self.times.len() - 1]);
        for (i, k) in self.temperature_keyframes.iter().enumerate() {
            if k.field.len() != mesh.node_count() {
                return bad(format!("temperature keyframe {i} has {} values", k.field.len()));
            }
            if k.time < first || k.time > last {
                return bad(format!("temperature keyframe time {} outside [{first}, {last}]", k.time));
            }
            if i > 0 && !(k.time > self.temperature_keyframes[i - 1].time) {
                return bad("temperature keyframe times must increase strictly".into());
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.times.len()
    }

    /// Time increment ending at step `i`; the program starts at t = 0.
    pub fn dt(&self, i: usize) -> f64 {
        if i == 0 {
            self.times[0]
        } else {
            self.times[i] - self.times[i - 1]
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t < self.times[0] || t > self.times[self.times.len() - 1] || !t.is_finite() {
            return Err(Error::TimeOutOfRange(t));
        }
        Ok(())
    }

    pub fn pressure_facets(&self, mesh: &Mesh) -> Vec<usize> {
        mesh.facets()
            .iter()
            .enumerate()
            .filter(|(_, f)| f.label == self.pressure_surface)
            .map(|(i, _)| i)
            .collect()
    }

    /// Nodal temperatures at `t`, interpolated between the bracketing
    /// keyframes and held constant outside them.
    pub fn temperature(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let ks = &self.temperature_keyframes;
        if t <= ks[0].time {
            return Ok(ks[0].field.clone());
        }
        if t >= ks[ks.len() - 1].time {
            return Ok(ks[ks.len() - 1].field.clone());
        }
        let i = ks.partition_point(|k| k.time <= t) - 1;
        let w = (t - ks[i].time) / (ks[i + 1].time - ks[i].time);
        Ok(ks[i]
            .field
            .iter()
            .zip(&ks[i + 1].field)
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    /// Temperatures at every integration point at `t`.
    pub fn ip_temperatures(&self, mesh: &Mesh, table: &GlobalIntegrationTable, t: f64) -> Result<Vec<f64>> {
        let nodal = self.temperature(t)?;
        Ok((0..table.len()).map(|k| table.interpolate_scalar(mesh, &nodal, k)).collect())
    }
}

/// External force vector on all `3 * nodes` dofs: centrifugal body force
/// `rho omega^2 r_perp` plus the traction `coefficient * shape * n` on the
/// pressure surface.
pub fn external_force_vector(
    mesh: &Mesh,
    table: &GlobalIntegrationTable,
    loading: &LoadingProgram,
    t: f64,
) -> Result<Vec<f64>> {
    loading.check_time(t)?;
    let mut f = vec![0.0; mesh.dof_count()];
    let omega = loading.rotation_speed.eval(t);
    let body = loading.density * omega * omega * DENSITY_SCALE;
    if body != 0.0 {
        for p in table.points() {
            let r = loading.rotation_axis.radial(&p.position);
            let el = &mesh.elements()[p.element];
            for (&node, n) in el.nodes.iter().zip(&p.shape) {
                for c in 0..3 {
                    f[3 * node + c] += p.measure * body * r[c] * n;
                }
            }
        }
    }
    let coeff = loading.pressure_coefficient.eval(t);
    if coeff != 0.0 {
        for (&facet, &shape) in loading.pressure_facets(mesh).iter().zip(&loading.pressure_shape) {
            let nodes = &mesh.facets()[facet].nodes;
            for q in facet_quadrature(mesh, facet) {
                for (&node, n) in nodes.iter().zip(&q.shape) {
                    for c in 0..3 {
                        f[3 * node + c] += q.measure * coeff * shape * q.normal[c] * n;
                    }
                }
            }
        }
    }
    for (d, v) in f.iter_mut().enumerate() {
        if mesh.is_constrained(d / 3) {
            *v = 0.0;
        }
    }
    Ok(f)
}

/// Declarative nodal temperature field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TemperatureSpec {
    Uniform {
        value: f64,
    },
    /// `base + peak * exp(-|x - center|^2 / (2 radius^2))`.
    Gaussian {
        base: f64,
        peak: f64,
        center: Point,
        radius: f64,
    },
    /// Rescales the deviation of `of` from the reference temperature.
    Scaled {
        factor: f64,
        of: Box<TemperatureSpec>,
    },
    /// Multiplies the deviation from the reference temperature by
    /// `1 + amplitude * u`, `u` uniform in [-1, 1] per node.
    Perturbed {
        amplitude: f64,
        seed: u64,
        of: Box<TemperatureSpec>,
    },
}

impl TemperatureSpec {
    pub fn materialize(&self, mesh: &Mesh) -> Vec<f64> {
        match self {
            TemperatureSpec::Uniform { value } => vec![*value; mesh.node_count()],
            TemperatureSpec::Gaussian {
                base,
                peak,
                center,
                radius,
            } => mesh
                .nodes()
                .iter()
                .map(|x| {
                    let d2: f64 = (0..3).map(|k| (x[k] - center[k]).powi(2)).sum();
                    base + peak * (-d2 / (2.0 * radius * radius)).exp()
                })
                .collect(),
            TemperatureSpec::Scaled { factor, of } => of
                .materialize(mesh)
                .into_iter()
                .map(|t| REFERENCE_TEMPERATURE + factor * (t - REFERENCE_TEMPERATURE))
                .collect(),
            TemperatureSpec::Perturbed { amplitude, seed, of } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                of.materialize(mesh)
                    .into_iter()
                    .map(|t| {
                        let u: f64 = rng.gen_range(-1.0..=1.0);
                        REFERENCE_TEMPERATURE + (1.0 + amplitude * u) * (t - REFERENCE_TEMPERATURE)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeSpec {
    pub time: f64,
    pub field: TemperatureSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureSpec {
    pub surface: String,
    pub coefficient: PiecewiseLinear,
    /// Uniform shape when omitted.
    #[serde(default)]
    pub shape: Option<Vec<f64>>,
}

/// Configuration form of a loading program; rotation speeds in rpm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingSpec {
    pub label: String,
    pub times: Vec<f64>,
    pub rotation_rpm: PiecewiseLinear,
    pub axis: RotationAxis,
    pub density: f64,
    pub pressure: PressureSpec,
    pub temperature: Vec<KeyframeSpec>,
}

impl LoadingSpec {
    pub fn materialize(&self, mesh: &Mesh) -> Result<LoadingProgram> {
        let mut program = LoadingProgram {
            label: self.label.clone(),
            times: self.times.clone(),
            rotation_speed: self.rotation_rpm.scaled(RPM_TO_RAD_S),
            rotation_axis: self.axis.clone(),
            density: self.density,
            pressure_coefficient: self.pressure.coefficient.clone(),
            pressure_surface: self.pressure.surface.clone(),
            pressure_shape: Vec::new(),
            temperature_keyframes: self
                .temperature
                .iter()
                .map(|k| Keyframe {
                    time: k.time,
                    field: k.field.materialize(mesh),
                })
                .collect(),
        };
        let count = program.pressure_facets(mesh).len();
        program.pressure_shape = match &self.pressure.shape {
            Some(s) => s.clone(),
            None => vec![1.0; count],
        };
        program.validate(mesh)?;
        Ok(program)
    }
}
