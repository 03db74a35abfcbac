use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::bandit::{
    evaluate_regret, ContextProcess, Environment, Feedback, FeedbackKind, MeanTable, ProblemDims, RegretNotion,
    RewardModel, RoundLog,
};
use crate::error::{Error, Result};
use crate::partial::ClGraph;

const MAX_SLEEPING_ARMS: usize = 16;
const MAX_GRAPH_ARMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SleepingVariant {
    /// Every awake set is revealed: `r(S) = 1(I in S) r(S_t)`.
    FullObservation,
    /// An asleep pull reveals only the sets that also exclude the arm.
    KleinbergPartial,
}

/// Context index of the nonempty awake set `mask`.
pub fn subset_context(mask: usize) -> usize {
    debug_assert!(mask > 0);
    mask - 1
}

/// Awake set (as a bit mask) behind a context index.
pub fn subset_of(context: usize) -> usize {
    context + 1
}

fn check_arms(arms: usize, limit: usize, what: &'static str) -> Result<()> {
    if arms == 0 {
        return Err(Error::Dimension("sleeping bandit needs at least one arm".into()));
    }
    if arms > limit {
        return Err(Error::Capacity {
            what,
            limit,
            got: arms,
            hint: "the context space has 2^K - 1 awake sets",
        });
    }
    Ok(())
}

/// Cross-learned feedback for pulling `arm` with awake set `awake` and
/// reward draw `x` (paid only if the arm is awake).
pub fn sleeping_feedback(
    arms: usize,
    arm: usize,
    awake: usize,
    x: f64,
    variant: SleepingVariant,
) -> Result<Feedback> {
    check_arms(arms, MAX_SLEEPING_ARMS, "sleeping feedback")?;
    let contexts = (1usize << arms) - 1;
    if awake == 0 || awake > contexts {
        return Err(Error::Range(format!("awake set {awake:#b} is empty or names arms beyond K={arms}")));
    }
    if arm >= arms {
        return Err(Error::Range(format!("arm {arm} is not below K={arms}")));
    }
    let bit = 1usize << arm;
    let realized = if awake & bit != 0 { x } else { 0.0 };
    let value = |c: usize| if subset_of(c) & bit != 0 { realized } else { 0.0 };
    let context = subset_context(awake);
    match variant {
        SleepingVariant::FullObservation => Feedback::full(arm, context, (0..contexts).map(value).collect()),
        SleepingVariant::KleinbergPartial => {
            let entries = (0..contexts)
                .filter(|&c| awake & bit != 0 || subset_of(c) & bit == 0)
                .map(|c| (c, value(c)))
                .collect();
            Feedback::partial(arm, context, entries)
        }
    }
}

/// Cross-learning graph of arm `i` over the `2^K - 1` awake sets: an edge
/// `S1 -> S2` exists iff `i in S1` or `i` is in neither set.
pub fn sleeping_partial_graph(arms: usize, arm: usize) -> Result<ClGraph> {
    check_arms(arms, MAX_GRAPH_ARMS, "sleeping graph")?;
    if arm >= arms {
        return Err(Error::Range(format!("arm {arm} is not below K={arms}")));
    }
    let contexts = (1usize << arms) - 1;
    let bit = 1usize << arm;
    let out = (0..contexts)
        .map(|c1| {
            let s1 = subset_of(c1);
            (0..contexts)
                .filter(|&c2| s1 & bit != 0 || (s1 | subset_of(c2)) & bit == 0)
                .collect()
        })
        .collect();
    ClGraph::new(out)
}

#[derive(Debug, Clone)]
pub struct SleepingSpec {
    pub means: Vec<f64>,
    /// Process over awake-set contexts (`mask - 1`).
    pub awake: ContextProcess,
    pub variant: SleepingVariant,
}

impl SleepingSpec {
    /// Each arm wakes independently with probability `p`, conditioned on the
    /// awake set being nonempty.
    pub fn independent(means: Vec<f64>, p: f64, variant: SleepingVariant) -> Result<Self> {
        let k = means.len();
        check_arms(k, MAX_SLEEPING_ARMS, "sleeping bandit")?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Parameter(format!("wake probability {p} must lie in (0, 1]")));
        }
        let nonempty = 1.0 - (1.0 - p).powi(k as i32);
        let probs: Vec<f64> = (1..1usize << k)
            .map(|mask| {
                let on = mask.count_ones() as i32;
                p.powi(on) * (1.0 - p).powi(k as i32 - on) / nonempty
            })
            .collect();
        let total: f64 = probs.iter().sum();
        let probs = probs.into_iter().map(|q| q / total).collect();
        Ok(Self {
            means,
            awake: ContextProcess::iid(probs)?,
            variant,
        })
    }
}

/// Sleeping bandit with Bernoulli rewards; contexts are the awake sets.
#[derive(Debug, Clone)]
pub struct SleepingEnv {
    dims: ProblemDims,
    spec: SleepingSpec,
    model: Arc<RewardModel>,
    graphs: Option<Arc<[ClGraph]>>,
}

impl SleepingEnv {
    pub fn new(spec: SleepingSpec, horizon: usize) -> Result<Self> {
        let k = spec.means.len();
        check_arms(k, MAX_SLEEPING_ARMS, "sleeping bandit")?;
        let contexts = (1usize << k) - 1;
        if spec.awake.contexts() != contexts {
            return Err(Error::Dimension(format!(
                "awake process has {} contexts, K={k} needs {contexts}",
                spec.awake.contexts()
            )));
        }
        let rows = (0..contexts)
            .map(|c| {
                let s = subset_of(c);
                (0..k)
                    .map(|i| if s & (1 << i) != 0 { spec.means[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        let model = Arc::new(RewardModel::StochasticBernoulli(MeanTable::new(rows)?));
        let graphs = match spec.variant {
            SleepingVariant::FullObservation => None,
            SleepingVariant::KleinbergPartial => Some(
                (0..k)
                    .map(|i| sleeping_partial_graph(k, i))
                    .collect::<Result<Vec<_>>>()?
                    .into(),
            ),
        };
        Ok(Self {
            dims: ProblemDims::new(k, contexts, horizon)?,
            spec,
            model,
            graphs,
        })
    }

    /// Mean reward of every arm in every awake set.
    pub fn means(&self) -> &MeanTable {
        self.model.means().expect("sleeping rewards are stochastic")
    }
}

impl Environment for SleepingEnv {
    fn dims(&self) -> ProblemDims {
        self.dims
    }

    fn feedback_kind(&self) -> FeedbackKind {
        match self.spec.variant {
            SleepingVariant::FullObservation => FeedbackKind::Full,
            SleepingVariant::KleinbergPartial => FeedbackKind::Partial,
        }
    }

    fn context_probabilities(&self) -> Option<Vec<f64>> {
        self.spec.awake.probabilities()
    }

    fn graphs(&self) -> Option<&[ClGraph]> {
        self.graphs.as_deref()
    }

    fn default_notion(&self) -> RegretNotion {
        RegretNotion::ExpectedGap
    }

    fn next_context(&mut self, t: usize, rng: &mut dyn RngCore) -> usize {
        self.spec.awake.draw(t, rng)
    }

    fn pull(&mut self, _t: usize, context: usize, arm: usize, rng: &mut dyn RngCore) -> Feedback {
        let x = if rng.random::<f64>() < self.spec.means[arm] { 1.0 } else { 0.0 };
        sleeping_feedback(self.dims.arms, arm, subset_of(context), x, self.spec.variant)
            .expect("arm and awake set are in range")
    }

    fn regret(&self, log: &RoundLog, notion: RegretNotion) -> Result<Vec<f64>> {
        evaluate_regret(log, &self.model, notion)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::Revealed;
    use crate::partial::{clique_cover_number, CoverMode};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edge_oracle(arm: usize, s1: usize, s2: usize) -> bool {
        let contains = |s: usize| s & (1 << arm) != 0;
        contains(s1) || (!contains(s1) && !contains(s2))
    }

    #[test]
    fn full_observation_example() {
        let fb = sleeping_feedback(2, 0, 0b01, 0.7, SleepingVariant::FullObservation).unwrap();
        match &fb.revealed {
            Revealed::Full(v) => assert_eq!(v, &vec![0.7, 0.0, 0.7]),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(fb.reward, 0.7);
    }

    #[test]
    fn kleinberg_asleep_reveals_sets_without_arm() {
        let fb = sleeping_feedback(3, 1, 0b101, 0.9, SleepingVariant::KleinbergPartial).unwrap();
        match &fb.revealed {
            Revealed::Partial(e) => {
                let sets: Vec<usize> = e.iter().map(|&(c, _)| subset_of(c)).collect();
                assert_eq!(sets, vec![0b001, 0b100, 0b101]);
                assert!(e.iter().all(|&(_, r)| r == 0.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kleinberg_awake_reveals_everything() {
        let fb = sleeping_feedback(3, 1, 0b010, 1.0, SleepingVariant::KleinbergPartial).unwrap();
        assert_eq!(fb.revealed.len(), 7);
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(
            sleeping_feedback(17, 0, 1, 1.0, SleepingVariant::FullObservation),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(sleeping_partial_graph(11, 0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn graph_matches_edge_predicate() {
        for k in 1..=4 {
            for i in 0..k {
                let g = sleeping_partial_graph(k, i).unwrap();
                let c = (1 << k) - 1;
                for c1 in 0..c {
                    assert!(g.has_edge(c1, c1));
                    for c2 in 0..c {
                        assert_eq!(g.has_edge(c1, c2), edge_oracle(i, subset_of(c1), subset_of(c2)));
                    }
                }
            }
        }
    }

    #[test]
    fn two_arm_graph_adjacency() {
        let g = sleeping_partial_graph(2, 0).unwrap();
        assert_eq!(g.out_neighbors(subset_context(0b01)), &[0, 1, 2]);
        assert_eq!(g.out_neighbors(subset_context(0b11)), &[0, 1, 2]);
        assert_eq!(g.out_neighbors(subset_context(0b10)), &[1]);
    }

    #[test]
    fn clique_cover_is_two() {
        for k in 2..=6 {
            for i in [0, k - 1] {
                let g = sleeping_partial_graph(k, i).unwrap();
                let cover = clique_cover_number(&g, CoverMode::Exact).unwrap();
                assert_eq!(cover.value, 2, "K={k} arm {i}");
            }
        }
    }

    #[test]
    fn partial_feedback_matches_graph() {
        let k = 3;
        for i in 0..k {
            let g = sleeping_partial_graph(k, i).unwrap();
            for mask in 1..(1 << k) {
                let fb = sleeping_feedback(k, i, mask, 1.0, SleepingVariant::KleinbergPartial).unwrap();
                let Revealed::Partial(e) = &fb.revealed else { panic!() };
                let revealed: Vec<usize> = e.iter().map(|p| p.0).collect();
                assert_eq!(revealed, g.out_neighbors(subset_context(mask)));
            }
        }
    }

    #[test]
    fn independent_awake_distribution() {
        let spec = SleepingSpec::independent(vec![0.3, 0.6], 0.5, SleepingVariant::FullObservation).unwrap();
        let p = spec.awake.probabilities().unwrap();
        for q in p {
            assert!((q - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn env_means_and_regret() {
        let spec = SleepingSpec::independent(vec![0.3, 0.6], 0.5, SleepingVariant::KleinbergPartial).unwrap();
        let mut env = SleepingEnv::new(spec, 50).unwrap();
        assert_eq!(env.means().row(subset_context(0b01)), &[0.3, 0.0]);
        assert_eq!(env.graphs().unwrap().len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut log = RoundLog::with_capacity(50);
        for t in 0..50 {
            let c = env.next_context(t, &mut rng);
            let fb = env.pull(t, c, 0, &mut rng);
            log.push(crate::bandit::Round {
                t,
                context: c,
                arm: 0,
                reward: fb.reward,
            });
        }
        let r = env.regret(&log, RegretNotion::ExpectedGap).unwrap();
        assert!(r.windows(2).all(|w| w[1] >= w[0]));
    }

    proptest! {
        #[test]
        fn full_observation_is_consistent(k in 1usize..6, arm_seed: usize, mask_seed: usize, x in 0.0f64..1.0) {
            let arm = arm_seed % k;
            let mask = 1 + mask_seed % ((1 << k) - 1);
            let fb = sleeping_feedback(k, arm, mask, x, SleepingVariant::FullObservation).unwrap();
            prop_assert_eq!(fb.revealed.len(), (1 << k) - 1);
            let mut with_arm = Vec::new();
            fb.revealed.for_each(|c, r| if subset_of(c) & (1 << arm) != 0 { with_arm.push(r) } else { assert_eq!(r, 0.0) });
            prop_assert!(with_arm.windows(2).all(|w| w[0] == w[1]));
        }
    }
}
