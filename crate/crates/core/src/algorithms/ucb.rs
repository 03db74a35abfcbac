use rand::RngCore;

use crate::algorithms::table::CrossTable;
use crate::algorithms::width;
use crate::bandit::{Feedback, Learner};
use crate::error::{Error, Result};

/// UCB1 with full cross-learning.
///
/// Each pull of arm `i` adds the revealed reward of every context to
/// `sigma_i(c)` and increments the single counter `tau_i`. The index at
/// context `c` is `sigma_i(c) / tau_i + sqrt(2 ln T / tau_i)`; the first `K`
/// rounds pull arms `0..K` in order.
pub struct UcbCl {
    arms: usize,
    horizon: usize,
    log_horizon: f64,
    pulls: Vec<u64>,
    widths: Vec<f64>,
    sums: CrossTable,
    round: usize,
}

impl UcbCl {
    /// Dense state of `K * C` reward sums.
    pub fn new(arms: usize, contexts: usize, horizon: usize) -> Result<Self> {
        Self::with_table(arms, horizon, CrossTable::dense(arms, contexts))
    }

    /// State that only materializes the contexts it is asked about.
    pub fn sparse(arms: usize, contexts: usize, horizon: usize) -> Result<Self> {
        Self::with_table(arms, horizon, CrossTable::replay(arms, contexts))
    }

    fn with_table(arms: usize, horizon: usize, sums: CrossTable) -> Result<Self> {
        if arms == 0 || sums.contexts() == 0 || horizon == 0 {
            return Err(Error::Parameter("UCB1.CL needs K, C, T >= 1".into()));
        }
        Ok(Self {
            arms,
            horizon,
            log_horizon: (horizon as f64).ln(),
            pulls: vec![0; arms],
            widths: vec![f64::INFINITY; arms],
            sums,
            round: 0,
        })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    /// `sigma_i(c)`.
    pub fn reward_sum(&mut self, arm: usize, context: usize) -> f64 {
        self.sums.get(arm, context)
    }

    /// Index of `arm` at `context`; infinite before the arm's first pull.
    pub fn index(&mut self, arm: usize, context: usize) -> f64 {
        let tau = self.pulls[arm];
        if tau == 0 {
            return f64::INFINITY;
        }
        self.sums.get(arm, context) / tau as f64 + self.widths[arm]
    }

    /// Learner state as a flat vector: `tau` (K entries) followed by `sigma`
    /// in arm-major order (K * C entries). Dense state only.
    pub fn snapshot(&self) -> Option<Vec<f64>> {
        let sums = self.sums.dense_values()?;
        let mut out = Vec::with_capacity(self.arms + sums.len());
        out.extend(self.pulls.iter().map(|&p| p as f64));
        out.extend_from_slice(sums);
        Some(out)
    }

    /// Rebuilds a dense learner from [`snapshot`](Self::snapshot) output.
    pub fn restore(arms: usize, contexts: usize, horizon: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != arms + arms * contexts {
            return Err(Error::Dimension(format!(
                "snapshot has {} entries, expected {}",
                flat.len(),
                arms + arms * contexts
            )));
        }
        let mut learner = Self::new(arms, contexts, horizon)?;
        for (i, &p) in flat[..arms].iter().enumerate() {
            if !(p >= 0.0) || p.fract() != 0.0 {
                return Err(Error::Range(format!("pull count {p} is not a nonnegative integer")));
            }
            learner.pulls[i] = p as u64;
            if p > 0.0 {
                learner.widths[i] = width(p as u64, learner.log_horizon);
            }
        }
        learner.round = learner.pulls.iter().sum::<u64>() as usize;
        learner
            .sums
            .dense_values_mut()
            .expect("dense")
            .copy_from_slice(&flat[arms..]);
        Ok(learner)
    }
}

impl Learner for UcbCl {
    fn name(&self) -> &str {
        "ucb1-cl"
    }

    fn select(&mut self, context: usize, _rng: &mut dyn RngCore) -> usize {
        if self.round < self.arms {
            return self.round;
        }
        if self.sums.is_dense() {
            let c_count = self.sums.contexts();
            let values = self.sums.dense_values().expect("dense");
            let mut best = 0;
            let mut best_value = f64::NEG_INFINITY;
            for i in 0..self.arms {
                let v = values[i * c_count + context] / self.pulls[i] as f64 + self.widths[i];
                if v > best_value {
                    best_value = v;
                    best = i;
                }
            }
            best
        } else {
            let row = self.sums.row(context);
            let mut best = 0;
            let mut best_value = f64::NEG_INFINITY;
            for (i, &s) in row.iter().enumerate() {
                let v = s / self.pulls[i] as f64 + self.widths[i];
                if v > best_value {
                    best_value = v;
                    best = i;
                }
            }
            best
        }
    }

    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        let arm = feedback.arm;
        if arm >= self.arms {
            return Err(Error::Range(format!("arm {arm} is not below K={}", self.arms)));
        }
        self.sums.add(arm, &feedback.revealed, 1.0)?;
        self.pulls[arm] += 1;
        self.widths[arm] = width(self.pulls[arm], self.log_horizon);
        self.round += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::LazyRewards;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn initial_rounds_are_forced() {
        let mut l = UcbCl::new(3, 2, 100).unwrap();
        let mut r = rng();
        for t in 0..3 {
            assert_eq!(l.select(1, &mut r), t);
            l.update(&Feedback::full(t, 1, vec![0.0, 0.0]).unwrap()).unwrap();
        }
    }

    #[test]
    fn update_example() {
        // K=2, C=2; arm 0 pulled at context 0 revealing (0.3, 0.7)
        let mut l = UcbCl::new(2, 2, 10).unwrap();
        l.update(&Feedback::full(0, 0, vec![0.3, 0.7]).unwrap()).unwrap();
        assert_eq!(l.pulls(), &[1, 0]);
        assert_eq!(l.reward_sum(0, 0), 0.3);
        assert_eq!(l.reward_sum(0, 1), 0.7);
        assert_eq!(l.reward_sum(1, 0), 0.0);
    }

    #[test]
    fn index_example() {
        // sigma_0(c) = 4, tau_0 = 8, ln T = 4  ->  0.5 + 1
        let t = 4f64.exp().round() as usize;
        let mut l = UcbCl::new(2, 1, t).unwrap();
        for _ in 0..8 {
            l.update(&Feedback::full(0, 0, vec![0.5]).unwrap()).unwrap();
        }
        let expected = 0.5 + (2.0 * (t as f64).ln() / 8.0).sqrt();
        assert!((l.index(0, 0) - expected).abs() < 1e-12);
    }

    #[test]
    fn selects_highest_index() {
        let mut l = UcbCl::new(2, 2, 50).unwrap();
        l.update(&Feedback::full(0, 0, vec![0.9, 0.1]).unwrap()).unwrap();
        l.update(&Feedback::full(1, 1, vec![0.1, 0.9]).unwrap()).unwrap();
        let mut r = rng();
        assert_eq!(l.select(0, &mut r), 0);
        assert_eq!(l.select(1, &mut r), 1);
    }

    #[test]
    fn partial_feedback_is_a_contract_error() {
        let mut l = UcbCl::new(2, 3, 10).unwrap();
        let fb = Feedback::partial(0, 1, vec![(1, 0.5)]).unwrap();
        assert!(matches!(l.update(&fb), Err(Error::Contract(_))));
    }

    #[test]
    fn snapshot_round_trip() {
        let mut l = UcbCl::new(3, 4, 200).unwrap();
        let mut r = rng();
        for t in 0..30 {
            let c = t % 4;
            let arm = l.select(c, &mut r);
            let rewards: Vec<f64> = (0..4).map(|_| r.random()).collect();
            l.update(&Feedback::full(arm, c, rewards).unwrap()).unwrap();
        }
        let flat = l.snapshot().unwrap();
        assert_eq!(flat.len(), 3 + 12);
        let mut back = UcbCl::restore(3, 4, 200, &flat).unwrap();
        assert_eq!(back.snapshot().unwrap(), flat);
        for c in 0..4 {
            assert_eq!(back.select(c, &mut r), l.select(c, &mut r));
        }
        assert!(UcbCl::restore(3, 4, 200, &flat[1..]).is_err());
    }

    #[test]
    fn sparse_state_makes_the_same_decisions() {
        let (k, c) = (3, 50);
        let mut dense = UcbCl::new(k, c, 500).unwrap();
        let mut sparse = UcbCl::sparse(k, c, 500).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(9);
        for t in 0..500usize {
            let ctx = r.random_range(0..c);
            let a = dense.select(ctx, &mut r);
            assert_eq!(a, sparse.select(ctx, &mut r), "round {t}");
            let salt = r.random::<u64>();
            let lazy = LazyRewards::new(c, move |x| {
                let h = crate::bandit::splitmix64(salt ^ (x as u64) ^ ((a as u64) << 40));
                (h >> 11) as f64 / (1u64 << 53) as f64
            });
            let fb = Feedback::lazy(a, ctx, lazy).unwrap();
            dense.update(&fb).unwrap();
            sparse.update(&fb).unwrap();
        }
    }
}
