use std::sync::Arc;

use rand::Rng;

use crate::bandit::{CoinFlipTable, ContextProcess, DenseRewardTable, RewardModel, RewardSource};
use crate::environments::StandardEnv;
use crate::error::{Error, Result};
use crate::partial::{mas_number, ClGraph};

/// Two-level Bernoulli instance: one arm at `(1 + eps) / 2`, the rest at
/// `(1 - eps) / 2`, with `eps = c_const sqrt(K / T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardInstanceSpec {
    pub arms: usize,
    pub horizon: usize,
    pub c_const: f64,
}

impl HardInstanceSpec {
    pub fn new(arms: usize, horizon: usize) -> Self {
        Self {
            arms,
            horizon,
            c_const: 0.25,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.c_const * (self.arms as f64 / self.horizon as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardInstance {
    pub means: Vec<f64>,
    pub best: usize,
    pub epsilon: f64,
}

/// Draws the hidden best arm uniformly at random.
pub fn hard_mab_instance(spec: &HardInstanceSpec, rng: &mut impl Rng) -> Result<HardInstance> {
    if spec.arms == 0 || spec.horizon == 0 {
        return Err(Error::Dimension("hard instance needs K >= 1 and T >= 1".into()));
    }
    let epsilon = spec.epsilon();
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Parameter(format!(
            "eps = {epsilon} (c = {}, K = {}, T = {}) must lie in [0, 1]",
            spec.c_const, spec.arms, spec.horizon
        )));
    }
    let best = rng.random_range(0..spec.arms);
    let means = (0..spec.arms)
        .map(|i| if i == best { (1.0 + epsilon) / 2.0 } else { (1.0 - epsilon) / 2.0 })
        .collect();
    Ok(HardInstance { means, best, epsilon })
}

/// Splits `horizon` rounds into `epochs` equal blocks; the last one absorbs
/// the remainder.
pub fn epoch_lengths(horizon: usize, epochs: usize) -> Result<Vec<usize>> {
    if epochs == 0 || epochs > horizon {
        return Err(Error::Dimension(format!("cannot split {horizon} rounds into {epochs} epochs")));
    }
    let base = horizon / epochs;
    let mut lengths = vec![base; epochs];
    lengths[epochs - 1] += horizon - base * epochs;
    Ok(lengths)
}

/// A sequence of epochs, each dedicated to one context running its own hard
/// instance; every other context earns nothing during that epoch.
#[derive(Debug, Clone)]
pub struct EpochInstance {
    /// Context of every round.
    pub contexts: Vec<usize>,
    /// Realized rewards, zero off the epoch's context.
    pub table: DenseRewardTable,
    /// Context served by each epoch, in play order.
    pub epoch_contexts: Vec<usize>,
    pub epoch_lengths: Vec<usize>,
    /// Hard instance behind each epoch.
    pub instances: Vec<HardInstance>,
}

impl EpochInstance {
    pub fn into_env(self, graphs: Option<Arc<[ClGraph]>>) -> Result<StandardEnv> {
        let (c, horizon) = (self.table.contexts(), self.contexts.len());
        let process = ContextProcess::sequence(c, self.contexts)?;
        let env = StandardEnv::new(RewardModel::AdversarialTable(self.table), process, horizon)?;
        match graphs {
            Some(g) => env.with_graphs(g),
            None => Ok(env),
        }
    }
}

fn build_epochs(
    contexts: usize,
    order: Vec<usize>,
    arms: usize,
    horizon: usize,
    c_const: f64,
    rng: &mut impl Rng,
) -> Result<EpochInstance> {
    let lengths = epoch_lengths(horizon, order.len())?;
    let instances = lengths
        .iter()
        .map(|&len| {
            let spec = HardInstanceSpec {
                arms,
                horizon: len,
                c_const,
            };
            hard_mab_instance(&spec, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sequence = Vec::with_capacity(horizon);
    let mut epoch_of = Vec::with_capacity(horizon);
    for (j, (&len, &c)) in lengths.iter().zip(&order).enumerate() {
        sequence.extend(std::iter::repeat_n(c, len));
        epoch_of.extend(std::iter::repeat_n(j, len));
    }
    let mut values = vec![0.0; horizon * arms * contexts];
    for t in 0..horizon {
        let (j, c) = (epoch_of[t], sequence[t]);
        for i in 0..arms {
            if rng.random::<f64>() < instances[j].means[i] {
                values[(t * arms + i) * contexts + c] = 1.0;
            }
        }
    }
    Ok(EpochInstance {
        contexts: sequence,
        table: DenseRewardTable::new(horizon, arms, contexts, values)?,
        epoch_contexts: order,
        epoch_lengths: lengths,
        instances,
    })
}

/// One epoch per context, contexts in index order.
pub fn build_adversarial_epoch_instance(
    contexts: usize,
    arms: usize,
    horizon: usize,
    c_const: f64,
    rng: &mut impl Rng,
) -> Result<EpochInstance> {
    build_epochs(contexts, (0..contexts).collect(), arms, horizon, c_const, rng)
}

/// One epoch per vertex of a maximum acyclic subgraph of `graph`.
///
/// Epochs run so that no epoch's context has an edge into a context of a
/// later epoch: whatever is cross-learned in one epoch concerns only epochs
/// already finished.
pub fn build_acyclic_epoch_instance(
    graph: &ClGraph,
    arms: usize,
    horizon: usize,
    c_const: f64,
    rng: &mut impl Rng,
) -> Result<EpochInstance> {
    let (_, mut order) = mas_number(graph)?;
    order.reverse();
    build_epochs(graph.contexts(), order, arms, horizon, c_const, rng)
}

/// Uniform contexts over a huge space with a fresh fair coin per context and
/// round: one arm pays 1, the other 0.
pub fn coin_flip_env(contexts: usize, horizon: usize, seed: u64) -> Result<StandardEnv> {
    let table = CoinFlipTable::new(contexts, horizon, seed)?;
    StandardEnv::new(RewardModel::AdversarialCoin(table), ContextProcess::uniform(contexts)?, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::Environment;
    use crate::partial::is_acyclic_ordering;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hard_instance_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = hard_mab_instance(&HardInstanceSpec::new(4, 400), &mut rng).unwrap();
        assert!((h.epsilon - 0.025).abs() < 1e-15);
        assert!((h.means[h.best] - 0.5125).abs() < 1e-15);
        for (i, &m) in h.means.iter().enumerate() {
            if i != h.best {
                assert!((m - 0.4875).abs() < 1e-15);
                assert!((h.means[h.best] - m - h.epsilon).abs() < 1e-15);
            }
        }
        assert_eq!(h.means.iter().filter(|&&m| m > 0.5).count(), 1);
    }

    #[test]
    fn hard_instance_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let flat = HardInstanceSpec {
            c_const: 0.0,
            ..HardInstanceSpec::new(3, 100)
        };
        assert!(hard_mab_instance(&flat, &mut rng).unwrap().means.iter().all(|&m| m == 0.5));
        let steep = HardInstanceSpec {
            c_const: 2.0,
            ..HardInstanceSpec::new(10, 10)
        };
        assert!(matches!(hard_mab_instance(&steep, &mut rng), Err(Error::Parameter(_))));
    }

    #[test]
    fn best_arm_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        for _ in 0..4000 {
            counts[hard_mab_instance(&HardInstanceSpec::new(4, 400), &mut rng).unwrap().best] += 1;
        }
        assert!(counts.iter().all(|&n| (900..1100).contains(&n)), "{counts:?}");
    }

    #[test]
    fn epochs_absorb_remainder() {
        assert_eq!(epoch_lengths(10, 3).unwrap(), vec![3, 3, 4]);
        assert_eq!(epoch_lengths(4, 2).unwrap(), vec![2, 2]);
        assert!(epoch_lengths(2, 3).is_err());
    }

    #[test]
    fn adversarial_epochs_zero_off_epoch() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = build_adversarial_epoch_instance(2, 3, 4, 0.25, &mut rng).unwrap();
        assert_eq!(inst.contexts, vec![0, 0, 1, 1]);
        let inst = build_adversarial_epoch_instance(3, 2, 30, 0.25, &mut rng).unwrap();
        for t in 0..30 {
            for i in 0..2 {
                for c in 0..3 {
                    if c != inst.contexts[t] {
                        assert_eq!(inst.table.reward(t, i, c), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn cross_learning_reveals_only_zeros_elsewhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = build_adversarial_epoch_instance(4, 2, 40, 0.25, &mut rng).unwrap();
        let mut env = inst.into_env(None).unwrap();
        for t in 0..40 {
            let c = env.next_context(t, &mut rng);
            let fb = env.pull(t, c, t % 2, &mut rng);
            fb.revealed.for_each(|c2, r| {
                if c2 != c {
                    assert_eq!(r, 0.0);
                }
            });
        }
    }

    #[test]
    fn acyclic_epochs_follow_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let complete = ClGraph::complete(4).unwrap();
        let inst = build_acyclic_epoch_instance(&complete, 2, 20, 0.25, &mut rng).unwrap();
        assert_eq!(inst.epoch_contexts.len(), 1);

        let line = ClGraph::line(5).unwrap();
        let inst = build_acyclic_epoch_instance(&line, 2, 30, 0.25, &mut rng).unwrap();
        assert_eq!(inst.epoch_contexts.len(), 3);
        let order = &inst.epoch_contexts;
        for (a, &u) in order.iter().enumerate() {
            for &v in &order[a + 1..] {
                assert!(!line.has_edge(u, v), "edge {u}->{v} leaks into a later epoch");
            }
        }
        let witness: Vec<usize> = order.iter().rev().copied().collect();
        assert!(is_acyclic_ordering(&line, &witness));
    }

    #[test]
    fn acyclic_epochs_on_directed_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = ClGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let inst = build_acyclic_epoch_instance(&g, 2, 40, 0.25, &mut rng).unwrap();
        assert_eq!(inst.epoch_contexts.len(), 4);
        let order = &inst.epoch_contexts;
        for (a, &u) in order.iter().enumerate() {
            for &v in &order[a + 1..] {
                assert!(!g.has_edge(u, v));
            }
        }
    }

    #[test]
    fn coin_flip_best_arm_pays_every_round() {
        let env = coin_flip_env(10_000_000, 50, 9).unwrap();
        let table = env.model().table().unwrap();
        for t in 0..50 {
            let c = t * 7919;
            assert_eq!(table.reward(t, 0, c) + table.reward(t, 1, c), 1.0);
        }
    }
}
