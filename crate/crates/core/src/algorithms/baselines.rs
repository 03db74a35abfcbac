use std::collections::HashMap;
use std::sync::Arc;

use rand::RngCore;

use crate::algorithms::exp3::{exp3_probabilities, sample_arm};
use crate::algorithms::{width, AlgoParams};
use crate::bandit::{Feedback, Learner};
use crate::error::{Error, Result};

/// Maps a raw context to the bucket a baseline keeps statistics for.
fn bucket_of(buckets: &Option<Arc<[usize]>>, context: usize) -> usize {
    match buckets {
        Some(map) => map[context],
        None => context,
    }
}

fn check_buckets(buckets: &Option<Arc<[usize]>>, contexts: usize) -> Result<()> {
    if let Some(map) = buckets {
        if map.len() != contexts {
            return Err(Error::Dimension(format!(
                "bucket map has {} entries for {contexts} contexts",
                map.len()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct UcbCell {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

/// An independent UCB1 instance per context (or per context bucket), using
/// only the realized reward.
pub struct SUcb1 {
    arms: usize,
    contexts: usize,
    log_horizon: f64,
    buckets: Option<Arc<[usize]>>,
    cells: HashMap<usize, UcbCell>,
}

impl SUcb1 {
    pub fn new(arms: usize, contexts: usize, horizon: usize) -> Result<Self> {
        Self::bucketed(arms, contexts, horizon, None)
    }

    /// Shares statistics between all contexts mapped to the same bucket.
    pub fn bucketed(arms: usize, contexts: usize, horizon: usize, buckets: Option<Arc<[usize]>>) -> Result<Self> {
        if arms == 0 || contexts == 0 || horizon == 0 {
            return Err(Error::Parameter("S-UCB1 needs K, C, T >= 1".into()));
        }
        check_buckets(&buckets, contexts)?;
        Ok(Self {
            arms,
            contexts,
            log_horizon: (horizon as f64).ln(),
            buckets,
            cells: HashMap::new(),
        })
    }

    /// Pull counts of the instance serving `context`, if it has been used.
    pub fn counts(&self, context: usize) -> Option<&[u64]> {
        self.cells
            .get(&bucket_of(&self.buckets, context))
            .map(|cell| cell.counts.as_slice())
    }

    pub fn sums(&self, context: usize) -> Option<&[f64]> {
        self.cells
            .get(&bucket_of(&self.buckets, context))
            .map(|cell| cell.sums.as_slice())
    }

    /// Number of instances created so far.
    pub fn instances(&self) -> usize {
        self.cells.len()
    }
}

impl Learner for SUcb1 {
    fn name(&self) -> &str {
        "s-ucb1"
    }

    fn select(&mut self, context: usize, _rng: &mut dyn RngCore) -> usize {
        let Some(cell) = self.cells.get(&bucket_of(&self.buckets, context)) else {
            return 0;
        };
        if let Some(unseen) = cell.counts.iter().position(|&n| n == 0) {
            return unseen;
        }
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for i in 0..self.arms {
            let n = cell.counts[i];
            let v = cell.sums[i] / n as f64 + width(n, self.log_horizon);
            if v > best_value {
                best_value = v;
                best = i;
            }
        }
        best
    }

    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        if feedback.arm >= self.arms || feedback.context >= self.contexts {
            return Err(Error::Range(format!(
                "arm {} / context {} outside K={} C={}",
                feedback.arm, feedback.context, self.arms, self.contexts
            )));
        }
        let arms = self.arms;
        let cell = self
            .cells
            .entry(bucket_of(&self.buckets, feedback.context))
            .or_insert_with(|| UcbCell {
                counts: vec![0; arms],
                sums: vec![0.0; arms],
            });
        cell.counts[feedback.arm] += 1;
        cell.sums[feedback.arm] += feedback.reward;
        Ok(())
    }
}

/// An independent EXP3 instance per context (or bucket) with estimator
/// `r / p_I`.
pub struct SExp3 {
    arms: usize,
    contexts: usize,
    params: AlgoParams,
    buckets: Option<Arc<[usize]>>,
    log_weights: HashMap<usize, Vec<f64>>,
}

impl SExp3 {
    pub fn new(arms: usize, contexts: usize, params: AlgoParams) -> Result<Self> {
        Self::bucketed(arms, contexts, params, None)
    }

    pub fn bucketed(arms: usize, contexts: usize, params: AlgoParams, buckets: Option<Arc<[usize]>>) -> Result<Self> {
        if arms == 0 || contexts == 0 {
            return Err(Error::Parameter("S-EXP3 needs K, C >= 1".into()));
        }
        params.validate(arms)?;
        check_buckets(&buckets, contexts)?;
        Ok(Self {
            arms,
            contexts,
            params,
            buckets,
            log_weights: HashMap::new(),
        })
    }

    pub fn probabilities(&self, context: usize) -> Vec<f64> {
        match self.log_weights.get(&bucket_of(&self.buckets, context)) {
            Some(w) => exp3_probabilities(w, self.params.alpha),
            None => vec![1.0 / self.arms as f64; self.arms],
        }
    }

    pub fn instances(&self) -> usize {
        self.log_weights.len()
    }
}

impl Learner for SExp3 {
    fn name(&self) -> &str {
        "s-exp3"
    }

    fn select(&mut self, context: usize, rng: &mut dyn RngCore) -> usize {
        sample_arm(&self.probabilities(context), rng)
    }

    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        if feedback.arm >= self.arms || feedback.context >= self.contexts {
            return Err(Error::Range(format!(
                "arm {} / context {} outside K={} C={}",
                feedback.arm, feedback.context, self.arms, self.contexts
            )));
        }
        let p = self.probabilities(feedback.context)[feedback.arm];
        if !(p > 0.0) {
            return Err(Error::Contract(format!("pull probability {p} is not positive")));
        }
        let arms = self.arms;
        let w = self
            .log_weights
            .entry(bucket_of(&self.buckets, feedback.context))
            .or_insert_with(|| vec![0.0; arms]);
        w[feedback.arm] += self.params.beta * feedback.reward / p;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn s_ucb1_ignores_cross_learned_values() {
        let mut l = SUcb1::new(2, 3, 100).unwrap();
        let fb = Feedback::full(1, 2, vec![0.9, 0.8, 0.4]).unwrap();
        l.update(&fb).unwrap();
        assert_eq!(l.counts(2), Some(&[0, 1][..]));
        assert_eq!(l.sums(2), Some(&[0.0, 0.4][..]));
        assert_eq!(l.counts(0), None);
        // partial feedback is fine too
        let p = Feedback::partial(0, 1, vec![(1, 0.3)]).unwrap();
        l.update(&p).unwrap();
        assert_eq!(l.instances(), 2);
    }

    #[test]
    fn s_ucb1_sweeps_each_context_first() {
        let mut l = SUcb1::new(3, 2, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for expected in 0..3 {
            let a = l.select(1, &mut rng);
            assert_eq!(a, expected);
            l.update(&Feedback::full(a, 1, vec![0.0, 1.0]).unwrap()).unwrap();
        }
        assert_eq!(l.select(0, &mut rng), 0);
    }

    #[test]
    fn s_ucb1_matches_independent_ucb_per_context() {
        // Oracle: a plain single-context UCB1 written out longhand per context.
        let (k, c, t) = (3, 4, 400);
        let means = [[0.2, 0.5, 0.8], [0.9, 0.1, 0.3], [0.4, 0.4, 0.6], [0.7, 0.2, 0.1]];
        let mut l = SUcb1::new(k, c, t).unwrap();
        let mut counts = vec![vec![0u64; k]; c];
        let mut sums = vec![vec![0f64; k]; c];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..t {
            let ctx = rng.random_range(0..c);
            let oracle = match counts[ctx].iter().position(|&n| n == 0) {
                Some(i) => i,
                None => {
                    let idx: Vec<f64> = (0..k)
                        .map(|i| sums[ctx][i] / counts[ctx][i] as f64 + (2.0 * (t as f64).ln() / counts[ctx][i] as f64).sqrt())
                        .collect();
                    crate::bandit::argmax(idx)
                }
            };
            let a = l.select(ctx, &mut rng);
            assert_eq!(a, oracle);
            let r = if rng.random::<f64>() < means[ctx][a] { 1.0 } else { 0.0 };
            counts[ctx][a] += 1;
            sums[ctx][a] += r;
            let mut rewards = vec![0.0; c];
            rewards[ctx] = r;
            l.update(&Feedback::full(a, ctx, rewards).unwrap()).unwrap();
        }
    }

    #[test]
    fn buckets_share_statistics() {
        let map: Arc<[usize]> = vec![0, 0, 1, 1].into();
        let mut l = SUcb1::bucketed(2, 4, 10, Some(map.clone())).unwrap();
        l.update(&Feedback::full(0, 1, vec![0.0, 0.5, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(l.counts(0), Some(&[1, 0][..]));
        assert!(SUcb1::bucketed(2, 3, 10, Some(map)).is_err());
    }

    #[test]
    fn s_exp3_update_example() {
        let params = AlgoParams { alpha: 0.0, beta: 0.5 };
        let mut l = SExp3::new(2, 2, params).unwrap();
        l.update(&Feedback::full(0, 1, vec![0.0, 0.4]).unwrap()).unwrap();
        // p = 1/2, increment 0.5 * 0.4 / 0.5 = 0.4
        let p = l.probabilities(1);
        let w = 0.4f64.exp();
        assert!((p[0] - w / (w + 1.0)).abs() < 1e-12);
        assert_eq!(l.probabilities(0), vec![0.5, 0.5]);
    }
}
