use std::sync::Arc;

use rand::RngCore;

use crate::algorithms::width;
use crate::bandit::{AffineCoefficients, Feedback, Learner};
use crate::error::{Error, Result};

/// Context features `rho(c)` in `R^d`.
pub trait FeatureMap: Send + Sync {
    fn dim(&self) -> usize;

    fn contexts(&self) -> usize;

    /// Writes `rho(context)` into `out`, which has length `dim()`.
    fn write(&self, context: usize, out: &mut [f64]);
}

/// Features stored as an explicit `C x d` table.
#[derive(Debug, Clone)]
pub struct GridFeature {
    dim: usize,
    values: Vec<f64>,
}

impl GridFeature {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.is_empty() || !values.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!(
                "{} feature values do not split into rows of {dim}",
                values.len()
            )));
        }
        Ok(Self { dim, values })
    }
}

impl FeatureMap for GridFeature {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contexts(&self) -> usize {
        self.values.len() / self.dim
    }

    fn write(&self, context: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.values[context * self.dim..(context + 1) * self.dim]);
    }
}

/// UCB1.CL specialised to rewards of the form `a_t . rho(c) + b_t`.
///
/// Keeps running means of the coefficients per arm, so memory is `K (d + 2)`
/// regardless of the number of contexts. Its decisions coincide with
/// [`UcbCl`](crate::algorithms::UcbCl) up to floating point.
pub struct AffineUcb {
    arms: usize,
    dim: usize,
    log_horizon: f64,
    features: Arc<dyn FeatureMap>,
    pulls: Vec<u64>,
    slope_means: Vec<f64>,
    intercept_means: Vec<f64>,
    round: usize,
    scratch: Vec<f64>,
}

impl AffineUcb {
    pub fn new(arms: usize, horizon: usize, features: Arc<dyn FeatureMap>) -> Result<Self> {
        let dim = features.dim();
        if arms == 0 || horizon == 0 || dim == 0 {
            return Err(Error::Parameter("affine UCB needs K, T, d >= 1".into()));
        }
        Ok(Self {
            arms,
            dim,
            log_horizon: (horizon as f64).ln(),
            features,
            pulls: vec![0; arms],
            slope_means: vec![0.0; arms * dim],
            intercept_means: vec![0.0; arms],
            round: 0,
            scratch: vec![0.0; dim],
        })
    }

    /// Number of floating point values held, `K (d + 1)` means plus `K` counters.
    pub fn state_len(&self) -> usize {
        self.slope_means.len() + self.intercept_means.len() + self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    /// `a_bar_i`, `b_bar_i`.
    pub fn coefficient_means(&self, arm: usize) -> (&[f64], f64) {
        (&self.slope_means[arm * self.dim..(arm + 1) * self.dim], self.intercept_means[arm])
    }

    /// `a_bar_i . rho(c) + b_bar_i`.
    pub fn predicted_mean(&mut self, arm: usize, context: usize) -> f64 {
        self.features.write(context, &mut self.scratch);
        self.dot(arm)
    }

    fn dot(&self, arm: usize) -> f64 {
        let a = &self.slope_means[arm * self.dim..(arm + 1) * self.dim];
        a.iter().zip(&self.scratch).map(|(x, y)| x * y).sum::<f64>() + self.intercept_means[arm]
    }

    /// Folds one observation of `arm`'s coefficients into its running means.
    pub fn affine_update(&mut self, arm: usize, coefficients: &AffineCoefficients) -> Result<()> {
        if arm >= self.arms {
            return Err(Error::Range(format!("arm {arm} is not below K={}", self.arms)));
        }
        if coefficients.slope.len() != self.dim {
            return Err(Error::Dimension(format!(
                "slope has dimension {}, features have {}",
                coefficients.slope.len(),
                self.dim
            )));
        }
        let tau = self.pulls[arm] as f64;
        let a = &mut self.slope_means[arm * self.dim..(arm + 1) * self.dim];
        for (m, &x) in a.iter_mut().zip(&coefficients.slope) {
            *m = (tau * *m + x) / (tau + 1.0);
        }
        let b = &mut self.intercept_means[arm];
        *b = (tau * *b + coefficients.intercept) / (tau + 1.0);
        self.pulls[arm] += 1;
        self.round += 1;
        Ok(())
    }

    /// Highest-index arm at `context`, with the first `K` rounds forced.
    pub fn affine_select(&mut self, context: usize) -> usize {
        if self.round < self.arms {
            return self.round;
        }
        self.features.write(context, &mut self.scratch);
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for i in 0..self.arms {
            let v = self.dot(i) + width(self.pulls[i], self.log_horizon);
            if v > best_value {
                best_value = v;
                best = i;
            }
        }
        best
    }
}

impl Learner for AffineUcb {
    fn name(&self) -> &str {
        "ucb1-cl-affine"
    }

    fn select(&mut self, context: usize, _rng: &mut dyn RngCore) -> usize {
        self.affine_select(context)
    }

    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        let coefficients = feedback
            .affine
            .as_ref()
            .ok_or_else(|| Error::Contract("affine learner received feedback without coefficients".into()))?;
        self.affine_update(feedback.arm, coefficients)
    }
}
