use rand::{Rng, RngCore};

use crate::algorithms::table::CrossTable;
use crate::algorithms::AlgoParams;
use crate::bandit::{Feedback, Learner};
use crate::error::{Error, Result};

/// Recompute a context's normalizer from scratch after this many
/// incremental updates.
const REFRESH_EVERY: u32 = 1024;
/// Increments larger than this trigger an exact recompute.
const LARGE_STEP: f64 = 30.0;

/// EXP3 weights `w_i(c)` held as logarithms (arm-major) together with a
/// running `ln sum_j w_j(c)` per context.
#[derive(Debug, Clone)]
pub struct LogWeights {
    arms: usize,
    contexts: usize,
    log_w: Vec<f64>,
    log_norm: Vec<f64>,
    since_refresh: Vec<u32>,
}

impl LogWeights {
    /// Uniform weights.
    pub fn new(arms: usize, contexts: usize) -> Self {
        Self {
            arms,
            contexts,
            log_w: vec![0.0; arms * contexts],
            log_norm: vec![(arms as f64).ln(); contexts],
            since_refresh: vec![0; contexts],
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn contexts(&self) -> usize {
        self.contexts
    }

    #[inline]
    pub fn log_weight(&self, arm: usize, context: usize) -> f64 {
        self.log_w[arm * self.contexts + context]
    }

    /// Multiplies `w_arm(context)` by `exp(delta)`.
    #[inline]
    pub fn add(&mut self, arm: usize, context: usize, delta: f64) {
        let idx = arm * self.contexts + context;
        let old = self.log_w[idx];
        self.log_w[idx] = old + delta;
        let count = &mut self.since_refresh[context];
        *count += 1;
        if delta > LARGE_STEP || *count >= REFRESH_EVERY {
            self.refresh(context);
        } else {
            let norm = &mut self.log_norm[context];
            *norm += ((old - *norm).exp() * delta.exp_m1()).ln_1p();
        }
    }

    fn refresh(&mut self, context: usize) {
        let max = (0..self.arms)
            .map(|i| self.log_weight(i, context))
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = (0..self.arms).map(|i| (self.log_weight(i, context) - max).exp()).sum();
        self.log_norm[context] = max + sum.ln();
        self.since_refresh[context] = 0;
    }

    /// `p_i(c) = (1 - K alpha) w_i(c) / sum_j w_j(c) + alpha`.
    #[inline]
    pub fn probability(&self, arm: usize, context: usize, alpha: f64) -> f64 {
        let share = (self.log_weight(arm, context) - self.log_norm[context]).exp();
        (1.0 - self.arms as f64 * alpha) * share + alpha
    }

    pub fn probabilities_into(&self, context: usize, alpha: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.arms).map(|i| self.probability(i, context, alpha)));
    }

    /// `sum_c weights[c] * p_arm(c)` over the listed contexts, in the order given.
    #[inline]
    pub(crate) fn weighted_probability(
        &self,
        arm: usize,
        alpha: f64,
        terms: impl Iterator<Item = (usize, f64)>,
    ) -> f64 {
        terms.fold(0.0, |acc, (c, pr)| acc + pr * self.probability(arm, c, alpha))
    }
}

/// Sampling distribution from raw log-weights, stabilized by subtracting the
/// maximum before exponentiating.
pub fn exp3_probabilities(log_weights: &[f64], alpha: f64) -> Vec<f64> {
    let k = log_weights.len() as f64;
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| (1.0 - k * alpha) * x / total + alpha).collect()
}

/// Draws an index from `probs` by inversion. Rounding slack at the top end
/// lands on the last arm with positive probability.
pub fn sample_arm(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if p > 0.0 {
            last = i;
        }
        if u < acc {
            return i;
        }
    }
    last
}

/// Known-distribution estimator: `r / sum_c' Pr[c'] p_i(c')` if `arm` was
/// pulled, else 0.
pub fn exp3cl_estimator(reward: f64, arm: usize, chosen: usize, marginal: f64) -> Result<f64> {
    if arm != chosen {
        return Ok(0.0);
    }
    if !(marginal > 0.0) {
        return Err(Error::Contract(format!("marginal pull probability {marginal} is not positive")));
    }
    Ok(reward / marginal)
}

/// Unknown-distribution estimator: `r / p_i(c_t)` if `arm` was pulled, else 0.
pub fn exp3clu_estimator(reward: f64, arm: usize, chosen: usize, realized_probability: f64) -> Result<f64> {
    exp3cl_estimator(reward, arm, chosen, realized_probability)
}

/// How rewards are importance weighted.
#[derive(Debug, Clone, PartialEq)]
pub enum Exp3Estimator {
    /// Divide by the pull probability averaged over this context distribution.
    KnownDistribution(Vec<f64>),
    /// Divide by the pull probability at the realized context.
    RealizedContext,
}

enum Store {
    Dense(LogWeights),
    Replay(CrossTable),
}

/// EXP3 with full cross-learning, in the known-distribution (`EXP3.CL`) or
/// unknown-distribution (`EXP3.CL-U`) form.
pub struct Exp3Cl {
    arms: usize,
    params: AlgoParams,
    estimator: Exp3Estimator,
    store: Store,
    probs: Vec<f64>,
}

impl Exp3Cl {
    /// `EXP3.CL` for context distribution `dist`.
    pub fn known(arms: usize, dist: Vec<f64>, params: AlgoParams) -> Result<Self> {
        let sum: f64 = dist.iter().sum();
        if dist.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter("context distribution must be a probability vector".into()));
        }
        let contexts = dist.len();
        Self::build(arms, params, Exp3Estimator::KnownDistribution(dist), Store::Dense(LogWeights::new(arms, contexts)))
    }

    /// `EXP3.CL-U` with dense weights.
    pub fn unknown(arms: usize, contexts: usize, params: AlgoParams) -> Result<Self> {
        Self::build(arms, params, Exp3Estimator::RealizedContext, Store::Dense(LogWeights::new(arms, contexts)))
    }

    /// `EXP3.CL-U` that only materializes the contexts it sees.
    pub fn unknown_sparse(arms: usize, contexts: usize, params: AlgoParams) -> Result<Self> {
        Self::build(arms, params, Exp3Estimator::RealizedContext, Store::Replay(CrossTable::replay(arms, contexts)))
    }

    fn build(arms: usize, params: AlgoParams, estimator: Exp3Estimator, store: Store) -> Result<Self> {
        params.validate(arms)?;
        let contexts = match &store {
            Store::Dense(w) => w.contexts(),
            Store::Replay(t) => t.contexts(),
        };
        if arms == 0 || contexts == 0 {
            return Err(Error::Parameter("EXP3 needs K, C >= 1".into()));
        }
        Ok(Self {
            arms,
            params,
            estimator,
            store,
            probs: Vec::with_capacity(arms),
        })
    }

    pub fn params(&self) -> AlgoParams {
        self.params
    }

    pub fn estimator(&self) -> &Exp3Estimator {
        &self.estimator
    }

    /// Current sampling distribution at `context`.
    pub fn probabilities(&mut self, context: usize) -> Vec<f64> {
        self.fill_probs(context);
        self.probs.clone()
    }

    fn fill_probs(&mut self, context: usize) {
        match &mut self.store {
            Store::Dense(w) => w.probabilities_into(context, self.params.alpha, &mut self.probs),
            Store::Replay(t) => {
                let p = exp3_probabilities(t.row(context), self.params.alpha);
                self.probs.clear();
                self.probs.extend(p);
            }
        }
    }

    /// `q_i = sum_c Pr[c] p_i(c)`; only for the known-distribution form.
    pub fn marginal(&self, arm: usize) -> Result<f64> {
        match (&self.estimator, &self.store) {
            (Exp3Estimator::KnownDistribution(dist), Store::Dense(w)) => {
                Ok(w.weighted_probability(arm, self.params.alpha, dist.iter().copied().enumerate()))
            }
            _ => Err(Error::Contract("marginal pull probability needs a known context distribution".into())),
        }
    }

    /// Update with the known-distribution estimator.
    pub fn update_known(&mut self, feedback: &Feedback) -> Result<()> {
        self.check(feedback)?;
        let q = self.marginal(feedback.arm)?;
        if !(q > 0.0) {
            return Err(Error::Contract(format!("marginal pull probability {q} is not positive")));
        }
        let Store::Dense(w) = &mut self.store else {
            unreachable!("known form is always dense")
        };
        let beta = self.params.beta;
        let arm = feedback.arm;
        feedback.revealed.for_each(|c, r| w.add(arm, c, beta * r / q));
        Ok(())
    }

    /// Update with the realized-context estimator.
    pub fn update_unknown(&mut self, feedback: &Feedback) -> Result<()> {
        if self.estimator != Exp3Estimator::RealizedContext {
            return Err(Error::Contract(
                "realized-context update called on a known-distribution learner".into(),
            ));
        }
        self.check(feedback)?;
        let (arm, alpha, beta) = (feedback.arm, self.params.alpha, self.params.beta);
        match &mut self.store {
            Store::Dense(w) => {
                let p = w.probability(arm, feedback.context, alpha);
                if !(p > 0.0) {
                    return Err(Error::Contract(format!("pull probability {p} is not positive")));
                }
                feedback.revealed.for_each(|c, r| w.add(arm, c, beta * r / p));
            }
            Store::Replay(t) => {
                let p = exp3_probabilities(t.row(feedback.context), alpha)[arm];
                if !(p > 0.0) {
                    return Err(Error::Contract(format!("pull probability {p} is not positive")));
                }
                t.add(arm, &feedback.revealed, beta / p)?;
            }
        }
        Ok(())
    }

    fn check(&self, feedback: &Feedback) -> Result<()> {
        if feedback.arm >= self.arms {
            return Err(Error::Range(format!("arm {} is not below K={}", feedback.arm, self.arms)));
        }
        if !feedback.revealed.is_full() {
            return Err(Error::Contract(
                "full cross-learning learner received partial feedback".into(),
            ));
        }
        let contexts = match &self.store {
            Store::Dense(w) => w.contexts(),
            Store::Replay(t) => t.contexts(),
        };
        if feedback.revealed.len() != contexts {
            return Err(Error::Dimension(format!(
                "feedback covers {} contexts, learner tracks {contexts}",
                feedback.revealed.len()
            )));
        }
        Ok(())
    }
}

impl Learner for Exp3Cl {
    fn name(&self) -> &str {
        match self.estimator {
            Exp3Estimator::KnownDistribution(_) => "exp3-cl",
            Exp3Estimator::RealizedContext => "exp3-cl-u",
        }
    }

    fn select(&mut self, context: usize, rng: &mut dyn RngCore) -> usize {
        self.fill_probs(context);
        sample_arm(&self.probs, rng)
    }

    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        match self.estimator {
            Exp3Estimator::KnownDistribution(_) => self.update_known(feedback),
            Exp3Estimator::RealizedContext => self.update_unknown(feedback),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::LazyRewards;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn probability_examples() {
        let p = exp3_probabilities(&[0.0, 3f64.ln()], 0.0);
        assert_relative_eq!(p[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(p[1], 0.75, epsilon = 1e-15);
        let u = exp3_probabilities(&[0.0; 4], 0.05);
        for x in u {
            assert_relative_eq!(x, 0.25, epsilon = 1e-15);
        }
        // alpha = 1/K forces uniform regardless of weights
        let forced = exp3_probabilities(&[50.0, 0.0], 0.5);
        assert_eq!(forced, vec![0.5, 0.5]);
    }

    #[test]
    fn huge_log_weights_do_not_overflow() {
        let p = exp3_probabilities(&[1e4, 1e4 - 2f64.ln()], 0.0);
        assert_relative_eq!(p[0], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn estimator_examples() {
        assert_eq!(exp3cl_estimator(0.6, 1, 1, 0.3).unwrap(), 2.0);
        assert_eq!(exp3cl_estimator(0.6, 0, 1, 0.3).unwrap(), 0.0);
        assert!(matches!(exp3clu_estimator(0.6, 1, 1, 0.0), Err(Error::Contract(_))));
    }

    #[test]
    fn known_update_example() {
        // K=2, C=2, uniform contexts, alpha=0, beta=0.1, uniform weights:
        // q_0 = 0.5, so arm 0's log-weights grow by 0.1 * r / 0.5.
        let params = AlgoParams { alpha: 0.0, beta: 0.1 };
        let mut l = Exp3Cl::known(2, vec![0.5, 0.5], params).unwrap();
        assert_relative_eq!(l.marginal(0).unwrap(), 0.5, epsilon = 1e-15);
        l.update(&Feedback::full(0, 0, vec![1.0, 0.5]).unwrap()).unwrap();
        let p = l.probabilities(0);
        let w0 = 0.2f64.exp();
        assert_relative_eq!(p[0], w0 / (w0 + 1.0), epsilon = 1e-14);
        let p1 = l.probabilities(1);
        let w1 = 0.1f64.exp();
        assert_relative_eq!(p1[0], w1 / (w1 + 1.0), epsilon = 1e-14);
    }

    #[test]
    fn unknown_form_rejects_known_marginal_and_vice_versa() {
        let params = AlgoParams { alpha: 0.1, beta: 0.1 };
        let mut u = Exp3Cl::unknown(2, 2, params).unwrap();
        assert!(u.marginal(0).is_err());
        let mut k = Exp3Cl::known(2, vec![0.5, 0.5], params).unwrap();
        let fb = Feedback::full(0, 0, vec![0.5, 0.5]).unwrap();
        assert!(matches!(k.update_unknown(&fb), Err(Error::Contract(_))));
        assert!(u.update(&fb).is_ok());
        let partial = Feedback::partial(0, 0, vec![(0, 0.5)]).unwrap();
        assert!(matches!(u.update(&partial), Err(Error::Contract(_))));
        assert!(Exp3Cl::known(2, vec![0.4, 0.4], params).is_err());
        assert!(Exp3Cl::unknown(2, 2, AlgoParams { alpha: 0.7, beta: 0.1 }).is_err());
    }

    /// Simulates one round many times from a fixed state and returns the
    /// sample mean and variance of the estimate of `r_arm(target)`.
    fn estimator_moments(
        learner_probs: &[Vec<f64>],
        dist: &[f64],
        rewards: &[Vec<f64>],
        arm: usize,
        target: usize,
        known: bool,
        draws: usize,
        seed: u64,
    ) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q: f64 = dist.iter().zip(learner_probs).map(|(pr, p)| pr * p[arm]).sum();
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let c = sample_arm(dist, &mut rng);
            let chosen = sample_arm(&learner_probs[c], &mut rng);
            let r = rewards[target][chosen];
            let est = if known {
                exp3cl_estimator(r, arm, chosen, q).unwrap()
            } else {
                exp3clu_estimator(r, arm, chosen, learner_probs[c][chosen]).unwrap()
            };
            s += est;
            s2 += est * est;
        }
        let n = draws as f64;
        let mean = s / n;
        (mean, s2 / n - mean * mean)
    }

    #[test]
    fn estimators_are_unbiased_and_known_has_lower_variance() {
        let dist = vec![0.2, 0.5, 0.3];
        let probs = vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6], vec![0.3, 0.3, 0.4]];
        // rewards[c][i]
        let rewards = vec![vec![0.9, 0.4, 0.2], vec![0.1, 0.8, 0.5], vec![0.6, 0.6, 0.3]];
        let draws = 400_000;
        for arm in 0..3 {
            for target in 0..3 {
                let truth = rewards[target][arm];
                let (mk, vk) = estimator_moments(&probs, &dist, &rewards, arm, target, true, draws, 1);
                let (mu, vu) = estimator_moments(&probs, &dist, &rewards, arm, target, false, draws, 2);
                // exact variances for the tolerance: r^2/q - r^2 and r^2 sum Pr/p - r^2
                let q: f64 = dist.iter().zip(&probs).map(|(pr, p)| pr * p[arm]).sum();
                let inv: f64 = dist.iter().zip(&probs).map(|(pr, p)| pr / p[arm]).sum();
                let exact_k = truth * truth / q - truth * truth;
                let exact_u = truth * truth * inv - truth * truth;
                let tol_k = 5.0 * (exact_k / draws as f64).sqrt() + 1e-12;
                let tol_u = 5.0 * (exact_u / draws as f64).sqrt() + 1e-12;
                assert!((mk - truth).abs() < tol_k, "known arm {arm} target {target}: {mk} vs {truth}");
                assert!((mu - truth).abs() < tol_u, "unknown arm {arm} target {target}: {mu} vs {truth}");
                assert!(exact_k <= exact_u + 1e-12);
                assert!((vk - exact_k).abs() < 0.1 * exact_k + 1e-9);
                assert!((vu - exact_u).abs() < 0.1 * exact_u + 1e-9);
            }
        }
    }

    #[test]
    fn incremental_normalizer_tracks_exact_value() {
        let mut w = LogWeights::new(4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for step in 0..5_000 {
            let arm = rng.random_range(0..4);
            let c = rng.random_range(0..3);
            let delta = if step % 997 == 0 { 40.0 } else { rng.random::<f64>() * 0.5 };
            w.add(arm, c, delta);
            let logs: Vec<f64> = (0..4).map(|i| w.log_weight(i, c)).collect();
            let exact = exp3_probabilities(&logs, 0.01);
            for (i, &e) in exact.iter().enumerate() {
                assert_relative_eq!(w.probability(i, c, 0.01), e, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sparse_unknown_matches_dense() {
        let (k, c) = (3, 20);
        let params = AlgoParams { alpha: 0.05, beta: 0.05 };
        let mut dense = Exp3Cl::unknown(k, c, params).unwrap();
        let mut sparse = Exp3Cl::unknown_sparse(k, c, params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let ctx = rng.random_range(0..c);
            let pd = dense.probabilities(ctx);
            let ps = sparse.probabilities(ctx);
            for (a, b) in pd.iter().zip(&ps) {
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
            let arm = sample_arm(&pd, &mut rng);
            let salt: u64 = rng.random();
            let lazy = LazyRewards::new(c, move |x| ((salt ^ x as u64) % 7) as f64 / 6.0);
            let fb = Feedback::lazy(arm, ctx, lazy).unwrap();
            dense.update(&fb).unwrap();
            sparse.update(&fb).unwrap();
        }
    }

    proptest! {
        #[test]
        fn probabilities_form_a_distribution_with_floor(
            logs in proptest::collection::vec(-50.0f64..50.0, 1..8),
            frac in 0.0f64..1.0,
        ) {
            let alpha = frac / logs.len() as f64;
            let p = exp3_probabilities(&logs, alpha);
            let total: f64 = p.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            for &x in &p {
                prop_assert!(x >= alpha - 1e-12);
            }
        }

        #[test]
        fn weights_never_decrease_for_nonnegative_rewards(
            rewards in proptest::collection::vec(0.0f64..1.0, 3),
            arm in 0usize..2,
            ctx in 0usize..3,
        ) {
            let params = AlgoParams { alpha: 0.1, beta: 0.2 };
            let mut l = Exp3Cl::unknown(2, 3, params).unwrap();
            let before: Vec<Vec<f64>> = (0..3).map(|c| l.probabilities(c)).collect();
            l.update(&Feedback::full(arm, ctx, rewards.clone()).unwrap()).unwrap();
            for c in 0..3 {
                let after = l.probabilities(c);
                prop_assert!(after[arm] >= before[c][arm] - 1e-12);
            }
        }
    }
}
