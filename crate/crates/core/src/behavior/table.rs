use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Temperature-dependent coefficient, linearly interpolated between
/// breakpoints and clamped outside their range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct TemperatureTable {
    temperatures: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum TableRepr {
    Constant(f64),
    Table { temperatures: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<TableRepr> for TemperatureTable {
    type Error = Error;
    fn try_from(r: TableRepr) -> Result<Self> {
        match r {
            TableRepr::Constant(v) => Ok(TemperatureTable::constant(v)),
            TableRepr::Table { temperatures, values } => TemperatureTable::new(temperatures, values),
        }
    }
}

impl From<TemperatureTable> for TableRepr {
    fn from(t: TemperatureTable) -> Self {
        if t.values.len() == 1 {
            TableRepr::Constant(t.values[0])
        } else {
            TableRepr::Table {
                temperatures: t.temperatures,
                values: t.values,
            }
        }
    }
}

impl TemperatureTable {
    pub fn new(temperatures: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if temperatures.is_empty() || temperatures.len() != values.len() {
            return Err(Error::Config(
                "temperature table needs matching, non-empty breakpoints and values".into(),
            ));
        }
        if temperatures.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("temperature breakpoints must increase strictly".into()));
        }
        if temperatures.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Config("temperature table entries must be finite".into()));
        }
        Ok(TemperatureTable { temperatures, values })
    }

    pub fn constant(value: f64) -> Self {
        TemperatureTable {
            temperatures: vec![0.0],
            values: vec![value],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let ts = &self.temperatures;
        let n = ts.len();
        if n == 1 || t <= ts[0] {
            return self.values[0];
        }
        if t >= ts[n - 1] {
            return self.values[n - 1];
        }
        let i = ts.partition_point(|&x| x <= t) - 1;
        let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
        self.values[i] + s * (self.values[i + 1] - self.values[i])
    }

    /// Whether every tabulated value satisfies `f`.
    pub fn all_values(&self, f: impl Fn(f64) -> bool) -> bool {
        self.values.iter().all(|&v| f(v))
    }
}
