use crate::error::{Error, Result};
use crate::fem::{GlobalIntegrationTable, InnerProduct, IpL2};
use crate::rom::DualRecord;
use serde::{Deserialize, Serialize};

/// Whole mesh or one element region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Region {
    All,
    Id(u32),
}

impl Region {
    pub fn as_option(self) -> Option<u32> {
        match self {
            Region::All => None,
            Region::Id(r) => Some(r),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(Region::All);
        }
        s.parse()
            .map(Region::Id)
            .map_err(|_| Error::Config(format!("region must be 'all' or an integer id, got '{s}'")))
    }

    pub fn contains(self, table: &GlobalIntegrationTable, k: usize) -> bool {
        table.in_region(k, self.as_option())
    }
}

impl TryFrom<String> for Region {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Region::parse(&s)
    }
}

impl From<Region> for String {
    fn from(r: Region) -> String {
        r.to_string()
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::All => f.write_str("all"),
            Region::Id(r) => write!(f, "{r}"),
        }
    }
}

fn ratio(num: f64, den: f64, fallback: f64) -> Result<f64> {
    if num == 0.0 {
        Ok(0.0)
    } else if den != 0.0 {
        Ok(num / den)
    } else if fallback != 0.0 {
        Ok(num / fallback)
    } else {
        Err(Error::UndefinedRelativeError)
    }
}

/// `|q_hf - q_rec| / |q_hf|` in the L2 norm given by `ip`, dividing by
/// `fallback` instead when the reference field vanishes.
pub fn relative_error(hf: &[f64], rec: &[f64], ip: &IpL2, fallback: f64) -> Result<f64> {
    if hf.len() != rec.len() || hf.len() != ip.weights().len() {
        return Err(Error::Dimension(format!(
            "fields of {} and {} values on {} points",
            hf.len(),
            rec.len(),
            ip.weights().len()
        )));
    }
    let diff: Vec<f64> = hf.iter().zip(rec).map(|(a, b)| a - b).collect();
    ratio(ip.norm(&diff), ip.norm(hf), fallback)
}

/// Euclidean `|tilde - hat| / |hat|`, with the same fallback rule.
pub fn gappy_residual(hat: &[f64], tilde: &[f64], fallback: f64) -> Result<f64> {
    if hat.len() != tilde.len() {
        return Err(Error::Dimension(format!("{} law values for {} reconstructed", hat.len(), tilde.len())));
    }
    let num = hat.iter().zip(tilde).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den = hat.iter().map(|a| a * a).sum::<f64>().sqrt();
    ratio(num, den, fallback)
}

/// Law values and reconstruction restricted to the points of `region`.
pub fn region_values(record: &DualRecord, table: &GlobalIntegrationTable, region: Region) -> (Vec<f64>, Vec<f64>) {
    record
        .points
        .iter()
        .enumerate()
        .filter(|(_, &k)| region.contains(table, k))
        .map(|(i, _)| (record.hat[i], record.tilde[i]))
        .unzip()
}
