use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::algorithms::{FeatureMap, GridFeature};
use crate::bandit::{
    cumulative, AffineCoefficients, ContextProcess, Environment, Feedback, FeedbackKind, ProblemDims, RegretNotion,
    RoundLog,
};
use crate::error::{Error, Result};

const MAX_COST_CONTEXTS: usize = 1 << 20;

/// Bandit with publicly announced per-arm costs. A context is a cost vector
/// whose entries lie on `levels` evenly spaced points of `[0, 1]`, encoded in
/// base `levels` with arm 0 as the least significant digit.
#[derive(Debug, Clone)]
pub struct ExoCostSpec {
    /// Bernoulli reward mean of each arm.
    pub means: Vec<f64>,
    pub levels: usize,
    pub costs: ContextProcess,
}

impl ExoCostSpec {
    /// Costs drawn i.i.d. uniformly over the grid.
    pub fn iid_uniform(means: Vec<f64>, levels: usize) -> Result<Self> {
        let contexts = cost_contexts(means.len(), levels)?;
        Ok(Self {
            means,
            levels,
            costs: ContextProcess::uniform(contexts)?,
        })
    }
}

fn cost_contexts(arms: usize, levels: usize) -> Result<usize> {
    if arms == 0 || levels < 2 {
        return Err(Error::Dimension(format!("need K >= 1 and at least 2 cost levels, got K={arms}, g={levels}")));
    }
    let mut total = 1usize;
    for _ in 0..arms {
        total = total.saturating_mul(levels);
        if total > MAX_COST_CONTEXTS {
            return Err(Error::Capacity {
                what: "cost grid",
                limit: MAX_COST_CONTEXTS,
                got: total,
                hint: "use fewer cost levels or arms",
            });
        }
    }
    Ok(total)
}

/// Cost of `arm` in cost context `context`.
fn cost(context: usize, arm: usize, levels: usize) -> f64 {
    let digit = (context / levels.pow(arm as u32)) % levels;
    digit as f64 / (levels - 1) as f64
}

/// Feedback for pulling `arm` with raw reward `reward` in cost context
/// `context`: the net reward `reward - s'_arm` of every cost context, shown to
/// the learner as `(net + 1) / 2`, with affine coefficients over the cost
/// vector.
pub fn exo_cost_feedback(arm: usize, context: usize, reward: f64, arms: usize, levels: usize) -> Result<Feedback> {
    let contexts = cost_contexts(arms, levels)?;
    if arm >= arms || context >= contexts {
        return Err(Error::Range(format!("arm {arm} or cost context {context} out of range")));
    }
    if !(0.0..=1.0).contains(&reward) {
        return Err(Error::Range(format!("reward {reward} outside [0, 1]")));
    }
    let rewards = (0..contexts)
        .map(|c| (reward - cost(c, arm, levels) + 1.0) / 2.0)
        .collect();
    let mut slope = vec![0.0; arms];
    slope[arm] = -0.5;
    Ok(Feedback::full(arm, context, rewards)?.with_affine(AffineCoefficients {
        slope,
        intercept: (reward + 1.0) / 2.0,
    }))
}

#[derive(Debug, Clone)]
pub struct ExoCostEnv {
    dims: ProblemDims,
    spec: ExoCostSpec,
    features: Arc<GridFeature>,
}

impl ExoCostEnv {
    pub fn new(spec: ExoCostSpec, horizon: usize) -> Result<Self> {
        let k = spec.means.len();
        let contexts = cost_contexts(k, spec.levels)?;
        if spec.costs.contexts() != contexts {
            return Err(Error::Dimension(format!(
                "cost process has {} contexts, grid has {contexts}",
                spec.costs.contexts()
            )));
        }
        if let Some(m) = spec.means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::Range(format!("mean {m} outside [0, 1]")));
        }
        let values = (0..contexts)
            .flat_map(|c| (0..k).map(move |i| (c, i)))
            .map(|(c, i)| cost(c, i, spec.levels))
            .collect();
        Ok(Self {
            dims: ProblemDims::new(k, contexts, horizon)?,
            features: Arc::new(GridFeature::new(k, values)?),
            spec,
        })
    }

    /// Cost vector of a context.
    pub fn costs(&self, context: usize) -> Vec<f64> {
        (0..self.dims.arms).map(|i| cost(context, i, self.spec.levels)).collect()
    }

    /// Expected net reward `mu_i - s_i(c)`.
    pub fn net_mean(&self, context: usize, arm: usize) -> f64 {
        self.spec.means[arm] - cost(context, arm, self.spec.levels)
    }
}

impl Environment for ExoCostEnv {
    fn dims(&self) -> ProblemDims {
        self.dims
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Full
    }

    fn context_probabilities(&self) -> Option<Vec<f64>> {
        self.spec.costs.probabilities()
    }

    fn features(&self) -> Option<Arc<dyn FeatureMap>> {
        Some(self.features.clone())
    }

    fn default_notion(&self) -> RegretNotion {
        RegretNotion::ExpectedGap
    }

    fn next_context(&mut self, t: usize, rng: &mut dyn RngCore) -> usize {
        self.spec.costs.draw(t, rng)
    }

    fn pull(&mut self, _t: usize, context: usize, arm: usize, rng: &mut dyn RngCore) -> Feedback {
        let reward = if rng.random::<f64>() < self.spec.means[arm] { 1.0 } else { 0.0 };
        exo_cost_feedback(arm, context, reward, self.dims.arms, self.spec.levels).expect("validated at construction")
    }

    /// Expected-gap regret in net-reward units.
    fn regret(&self, log: &RoundLog, notion: RegretNotion) -> Result<Vec<f64>> {
        if notion != RegretNotion::ExpectedGap {
            return Err(Error::Contract(format!("exogenous-cost regret supports expected-gap only, not {notion}")));
        }
        Ok(cumulative(log.rounds().iter().map(|r| {
            let best = (0..self.dims.arms)
                .map(|i| self.net_mean(r.context, i))
                .fold(f64::NEG_INFINITY, f64::max);
            best - self.net_mean(r.context, r.arm)
        })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::Revealed;
    use proptest::prelude::*;

    fn unshift(fb: &Feedback, c: usize) -> f64 {
        2.0 * fb.revealed.value(c).unwrap() - 1.0
    }

    #[test]
    fn net_reward_example() {
        // two arms, costs on {0, 0.1, ..., 1}; arm 0 costs 0.2 in the realized context
        let (k, g) = (2, 11);
        let ctx = |s0: usize, s1: usize| s0 + g * s1;
        let fb = exo_cost_feedback(0, ctx(2, 7), 0.9, k, g).unwrap();
        assert!((2.0 * fb.reward - 1.0 - 0.7).abs() < 1e-12);
        assert!((unshift(&fb, ctx(5, 0)) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn zero_cost_keeps_raw_reward() {
        let fb = exo_cost_feedback(1, 0, 0.35, 3, 4).unwrap();
        assert!((unshift(&fb, 0) - 0.35).abs() < 1e-12);
    }

    #[test]
    fn capacity_is_checked() {
        assert!(matches!(exo_cost_feedback(0, 0, 0.5, 30, 2), Err(Error::Capacity { .. })));
    }

    #[test]
    fn regret_uses_net_means() {
        let spec = ExoCostSpec::iid_uniform(vec![0.9, 0.5], 2).unwrap();
        let env = ExoCostEnv::new(spec, 10).unwrap();
        // context 1: arm 0 costs 1, arm 1 costs 0
        assert_eq!(env.costs(1), vec![1.0, 0.0]);
        let log: RoundLog = [crate::bandit::Round {
            t: 0,
            context: 1,
            arm: 0,
            reward: 0.0,
        }]
        .into_iter()
        .collect();
        let r = env.regret(&log, RegretNotion::ExpectedGap).unwrap();
        assert!((r[0] - (0.5 - (0.9 - 1.0))).abs() < 1e-12);
        assert!(env.regret(&log, RegretNotion::RealizedExPost).is_err());
    }

    proptest! {
        #[test]
        fn dense_and_affine_agree(k in 1usize..4, g in 2usize..5, arm_seed: usize, ctx_seed: usize, r in 0.0f64..=1.0) {
            let spec = ExoCostSpec::iid_uniform(vec![0.5; k], g).unwrap();
            let env = ExoCostEnv::new(spec, 1).unwrap();
            let arm = arm_seed % k;
            let contexts = env.dims().contexts;
            let fb = exo_cost_feedback(arm, ctx_seed % contexts, r, k, g).unwrap();
            let coef = fb.affine.clone().unwrap();
            let features = env.features().unwrap();
            let mut rho = vec![0.0; k];
            let Revealed::Full(v) = &fb.revealed else { panic!() };
            for c in 0..contexts {
                features.write(c, &mut rho);
                let affine: f64 = coef.slope.iter().zip(&rho).map(|(a, x)| a * x).sum::<f64>() + coef.intercept;
                prop_assert!((affine - v[c]).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&v[c]));
            }
        }

        #[test]
        fn shift_identity(k in 1usize..4, g in 2usize..5, arm_seed: usize, a: usize, b: usize, r in 0.0f64..=1.0) {
            let arm = arm_seed % k;
            let contexts = g.pow(k as u32);
            let (c1, c2) = (a % contexts, b % contexts);
            let fb = exo_cost_feedback(arm, 0, r, k, g).unwrap();
            let lhs = unshift(&fb, c1) - unshift(&fb, c2);
            let rhs = cost(c2, arm, g) - cost(c1, arm, g);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
