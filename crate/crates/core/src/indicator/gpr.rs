use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

/// Squared-exponential kernel parameters plus white noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GprHyper {
    pub signal_var: f64,
    pub length_scale: f64,
    pub noise_var: f64,
}

impl GprHyper {
    fn kernel(&self, a: f64, b: f64) -> f64 {
        let d = (a - b) / self.length_scale;
        self.signal_var * (-0.5 * d * d).exp()
    }
}

/// Serialized form: training data and hyperparameters. The factorization
/// is rebuilt on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GprData {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    /// Prior mean, the mean of the targets.
    pub mean: f64,
    /// `None` for a degenerate model (fewer than two distinct inputs).
    pub hyper: Option<GprHyper>,
    /// Constant predictive variance of a degenerate model.
    pub prior_var: f64,
    /// `None` for a degenerate model.
    pub log_likelihood: Option<f64>,
}

/// One-dimensional Gaussian process regressor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "GprData", try_from = "GprData")]
pub struct GprModel {
    data: GprData,
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
}

impl From<GprModel> for GprData {
    fn from(m: GprModel) -> Self {
        m.data
    }
}

impl TryFrom<GprData> for GprModel {
    type Error = Error;
    fn try_from(d: GprData) -> Result<Self> {
        match d.hyper {
            None => Ok(GprModel::degenerate(d.inputs, d.targets)),
            Some(h) => GprModel::with_hyper(&d.inputs, &d.targets, h),
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn logspace(center: f64, half_width: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(center - half_width + 2.0 * half_width * i as f64 / (n - 1) as f64))
        .collect()
}

const GRID: usize = 5;

/// Prior variance of the latent error function: far from the calibration
/// data the indicator tends to the target mean plus 3.
pub const SIGNAL_VAR: f64 = 1.0;

/// Smallest noise variance tried, a jitter keeping the kernel matrix SPD.
pub const NOISE_FLOOR: f64 = 1e-10;

impl GprModel {
    fn degenerate(inputs: Vec<f64>, targets: Vec<f64>) -> Self {
        let m = mean(&targets);
        let var = mean(&targets.iter().map(|y| (y - m) * (y - m)).collect::<Vec<_>>());
        GprModel {
            data: GprData {
                inputs,
                targets,
                mean: m,
                hyper: None,
                prior_var: var,
                log_likelihood: None,
            },
            chol: None,
            alpha: DVector::zeros(0),
        }
    }

    /// Model with fixed hyperparameters.
    pub fn with_hyper(inputs: &[f64], targets: &[f64], hyper: GprHyper) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Dimension(format!("{} inputs for {} targets", inputs.len(), targets.len())));
        }
        if !(hyper.signal_var > 0.0 && hyper.length_scale > 0.0 && hyper.noise_var >= 0.0) {
            return Err(Error::GprFit(format!("invalid hyperparameters {hyper:?}")));
        }
        let n = inputs.len();
        let m = mean(targets);
        let k = DMatrix::from_fn(n, n, |i, j| {
            hyper.kernel(inputs[i], inputs[j]) + if i == j { hyper.noise_var } else { 0.0 }
        });
        let chol = Cholesky::new(k).ok_or_else(|| Error::GprFit("kernel matrix is not positive definite".into()))?;
        let y = DVector::from_iterator(n, targets.iter().map(|t| t - m));
        let alpha = chol.solve(&y);
        let log_det: f64 = chol.l_dirty().diagonal().iter().take(n).map(|d| d.ln()).sum();
        let ll = -0.5 * y.dot(&alpha) - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        if !ll.is_finite() {
            return Err(Error::GprFit("non-finite log marginal likelihood".into()));
        }
        Ok(GprModel {
            data: GprData {
                inputs: inputs.to_vec(),
                targets: targets.to_vec(),
                mean: m,
                hyper: Some(hyper),
                prior_var: hyper.signal_var + hyper.noise_var,
                log_likelihood: Some(ll),
            },
            chol: Some(chol),
            alpha,
        })
    }

    /// Maximum-likelihood fit of the length scale and noise variance over a
    /// 5x5 log grid scaled to the data, then a finer grid around the best
    /// node. The signal variance stays at [`SIGNAL_VAR`].
    pub fn fit(inputs: &[f64], targets: &[f64]) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Dimension(format!("{} inputs for {} targets", inputs.len(), targets.len())));
        }
        if inputs.iter().chain(targets).any(|v| !v.is_finite()) {
            return Err(Error::GprFit("non-finite training data".into()));
        }
        let mut distinct = inputs.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 2 {
            return Ok(GprModel::degenerate(inputs.to_vec(), targets.to_vec()));
        }
        let m = mean(targets);
        let var = mean(&targets.iter().map(|y| (y - m) * (y - m)).collect::<Vec<_>>());
        let scale = var.max(1e-12 * m * m).max(1e-200);
        let range = distinct[distinct.len() - 1] - distinct[0];

        let (l0, n0) = (range.log10(), scale.log10());
        let (dl, dn) = (0.75, 2.0);
        let mut best: Option<GprModel> = None;
        let search = |best: &mut Option<GprModel>, l: &[f64], n: &[f64]| {
            for &ls in l {
                for &nv in n {
                    let h = GprHyper {
                        signal_var: SIGNAL_VAR,
                        length_scale: ls,
                        noise_var: nv.max(NOISE_FLOOR),
                    };
                    if let Ok(g) = GprModel::with_hyper(inputs, targets, h) {
                        if best.as_ref().is_none_or(|b| g.data.log_likelihood > b.data.log_likelihood) {
                            *best = Some(g);
                        }
                    }
                }
            }
        };
        search(
            &mut best,
            &logspace(l0 - 0.5, 2.0 * dl, GRID),
            &logspace(n0 - 2.0, 2.0 * dn, GRID),
        );
        let coarse = best
            .as_ref()
            .and_then(|b| b.data.hyper)
            .ok_or_else(|| Error::GprFit("no grid node gave a finite likelihood".into()))?;
        search(
            &mut best,
            &logspace(coarse.length_scale.log10(), dl, GRID),
            &logspace(coarse.noise_var.log10(), dn, GRID),
        );
        Ok(best.expect("coarse grid produced a model"))
    }

    pub fn data(&self) -> &GprData {
        &self.data
    }

    pub fn is_degenerate(&self) -> bool {
        self.data.hyper.is_none()
    }

    /// Predictive mean and noise-inclusive variance.
    pub fn predict(&self, x: f64) -> (f64, f64) {
        let (Some(h), Some(chol)) = (self.data.hyper, &self.chol) else {
            return (self.data.mean, self.data.prior_var);
        };
        let ks = DVector::from_iterator(self.data.inputs.len(), self.data.inputs.iter().map(|xi| h.kernel(x, *xi)));
        let mu = self.data.mean + ks.dot(&self.alpha);
        let v = chol.l().solve_lower_triangular(&ks).expect("Cholesky factor is nonsingular");
        let var = (h.signal_var + h.noise_var - v.dot(&v)).max(0.0);
        (mu, var)
    }

    /// Mean plus three predictive standard deviations.
    pub fn indicator(&self, x: f64) -> f64 {
        let (mu, var) = self.predict(x);
        mu + 3.0 * var.sqrt()
    }
}
