use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{default_params, AffineUcb, AlgoParams, Exp3Cl, Exp3Variant, SExp3, SUcb1, UcbCl};
use crate::bandit::{
    ContextProcess, Environment, FeedbackKind, Learner, RegretNotion, RewardModel, Round, RoundLog, RunResult,
};
use crate::environments::{
    build_acyclic_epoch_instance, build_adversarial_epoch_instance, coin_flip_env, random_means, read_auction_log,
    trim_auction_log, AuctionEnv, AuctionSpec, CorrelatedAuctionSpec, ExoCostEnv, ExoCostSpec, SleepingEnv,
    SleepingSpec, StandardEnv,
};
use crate::error::{Error, Result};
use crate::harness::config::{Algorithm, EnvKind, ExperimentConfig};
use crate::partial::{clique_cover_number, mas_number, ClGraph, CoverMode, Exp3Pcl, UcbPcl};

/// Environment variable holding the worker count for parallel runs.
pub const WORKERS_ENV: &str = "CROSSBANDIT_WORKERS";

/// Above this many contexts learners keep sparse cross-learning state.
const SPARSE_CONTEXTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Replications spread over a worker pool; falls back to sequential when
    /// the crate is built without the `parallel` feature.
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

/// Generators for replication `rep`: the environment draws from stream
/// `2 rep` and the learner from stream `2 rep + 1` of the base seed.
pub fn replication_rngs(seed: u64, rep: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut env = ChaCha8Rng::seed_from_u64(seed);
    env.set_stream(2 * rep as u64);
    let mut learner = ChaCha8Rng::seed_from_u64(seed);
    learner.set_stream(2 * rep as u64 + 1);
    (env, learner)
}

/// One replication's environment plus the context buckets per-context
/// baselines should share, if any.
pub struct Instance {
    pub env: Box<dyn Environment>,
    pub buckets: Option<Arc<[usize]>>,
}

enum Factory {
    Bernoulli { graphs: Option<Arc<[ClGraph]>> },
    Auction { template: Box<AuctionEnv>, buckets: Option<Arc<[usize]>> },
    ExoCost,
    Sleeping,
    Epoch,
    AcyclicEpoch { graph: ClGraph, graphs: Arc<[ClGraph]> },
    CoinFlip,
}

/// A validated experiment: configuration plus whatever can be prepared once
/// and shared by all replications.
pub struct Experiment {
    cfg: ExperimentConfig,
    factory: Factory,
    lambda_bar: Option<f64>,
}

fn shared(graph: Option<ClGraph>, arms: usize) -> Option<Arc<[ClGraph]>> {
    graph.map(|g| vec![g; arms].into())
}

/// Average over arms of the maximum acyclic subgraph number, or of the
/// clique cover number where the former is out of reach (it bounds it from
/// above).
fn lambda_bar(graphs: &[ClGraph]) -> Result<f64> {
    let mut total = 0.0;
    for g in graphs {
        total += match mas_number(g) {
            Ok((l, _)) => l as f64,
            Err(_) => clique_cover_number(g, CoverMode::Exact)
                .or_else(|_| clique_cover_number(g, CoverMode::Greedy))?
                .value as f64,
        };
    }
    Ok(total / graphs.len() as f64)
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let factory = match cfg.env {
            EnvKind::Bernoulli => Factory::Bernoulli {
                graphs: shared(cfg.graph.build(cfg.contexts)?, cfg.arms),
            },
            EnvKind::Auction | EnvKind::Replay => {
                let spec = AuctionSpec {
                    market: CorrelatedAuctionSpec {
                        correlation: cfg.correlation,
                        value: cfg.value_dist.clone(),
                        bid: cfg.bid_dist.clone(),
                    },
                    bid_resolution: cfg.bid_resolution,
                    value_resolution: cfg.value_resolution,
                    baseline_resolution: cfg.baseline_resolution,
                };
                let template = if cfg.env == EnvKind::Auction {
                    AuctionEnv::synthetic(&spec, cfg.horizon)?
                } else {
                    let path = cfg.log.as_ref().expect("validated");
                    let mut rows = read_auction_log(path)?;
                    if let Some(q) = cfg.trim_quantile {
                        rows = trim_auction_log(&rows, q)?;
                    }
                    AuctionEnv::replay(&spec, rows, Some(cfg.horizon))?
                };
                let buckets = spec.baseline_resolution.map(|r| template.baseline_buckets(r)).transpose()?;
                Factory::Auction {
                    template: Box::new(template),
                    buckets,
                }
            }
            EnvKind::ExoCost => Factory::ExoCost,
            EnvKind::Sleeping => Factory::Sleeping,
            EnvKind::Epoch => Factory::Epoch,
            EnvKind::AcyclicEpoch => {
                let graph = cfg
                    .graph
                    .build(cfg.contexts)?
                    .ok_or_else(|| Error::Config("acyclic-epoch needs a graph".into()))?;
                Factory::AcyclicEpoch {
                    graphs: vec![graph.clone(); cfg.arms].into(),
                    graph,
                }
            }
            EnvKind::CoinFlip => Factory::CoinFlip,
        };
        let mut experiment = Self {
            cfg,
            factory,
            lambda_bar: None,
        };
        let (mut probe_rng, _) = replication_rngs(experiment.cfg.seed, 0);
        let probe = experiment.instance(&mut probe_rng)?;
        experiment.check_compatibility(&probe)?;
        if experiment.cfg.algorithm == Algorithm::Exp3Pcl {
            let graphs = probe.env.graphs().expect("checked partial");
            experiment.lambda_bar = Some(lambda_bar(graphs)?);
        }
        experiment.learner(&probe)?;
        Ok(experiment)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn check_compatibility(&self, inst: &Instance) -> Result<()> {
        let algo = self.cfg.algorithm;
        let env = &*inst.env;
        let kind = env.feedback_kind();
        if algo.needs_full_feedback() && kind == FeedbackKind::Partial {
            return Err(Error::Config(format!(
                "{algo} needs full cross-learning feedback but `{}` reveals only graph neighbourhoods; \
                 use ucb1-pcl, exp3-pcl or a per-context baseline",
                self.cfg.env.as_str()
            )));
        }
        if algo.needs_partial_feedback() && kind == FeedbackKind::Full {
            return Err(Error::Config(format!(
                "{algo} needs graph-restricted feedback but `{}` has no cross-learning graph",
                self.cfg.env.as_str()
            )));
        }
        if matches!(algo, Algorithm::Exp3Cl | Algorithm::Exp3Pcl) && env.context_probabilities().is_none() {
            return Err(Error::Config(format!(
                "{algo} needs a known i.i.d. context distribution, which `{}` does not have",
                self.cfg.env.as_str()
            )));
        }
        if algo == Algorithm::UcbClAffine && env.features().is_none() {
            return Err(Error::Config(format!(
                "{algo} needs affine rewards, which `{}` does not provide",
                self.cfg.env.as_str()
            )));
        }
        if self.cfg.notion == Some(RegretNotion::ExpectedGap) && env.default_notion() != RegretNotion::ExpectedGap {
            return Err(Error::Config(format!(
                "expected-gap regret needs known means, which `{}` does not have",
                self.cfg.env.as_str()
            )));
        }
        Ok(())
    }

    /// Builds replication's environment, drawing any random instance
    /// parameters from `rng` (the replication's environment stream).
    pub fn instance(&self, rng: &mut ChaCha8Rng) -> Result<Instance> {
        let cfg = &self.cfg;
        let (k, c, t) = (cfg.arms, cfg.contexts, cfg.horizon);
        let plain = |env: Box<dyn Environment>| Instance { env, buckets: None };
        Ok(match &self.factory {
            Factory::Bernoulli { graphs } => {
                let means = random_means(k, c, rng)?;
                let env = StandardEnv::new(RewardModel::StochasticBernoulli(means), ContextProcess::uniform(c)?, t)?;
                plain(Box::new(match graphs {
                    Some(g) => env.with_graphs(g.clone())?,
                    None => env,
                }))
            }
            Factory::Auction { template, buckets } => Instance {
                env: Box::new((**template).clone()),
                buckets: buckets.clone(),
            },
            Factory::ExoCost => {
                let means = (0..k).map(|_| rng.random::<f64>()).collect();
                plain(Box::new(ExoCostEnv::new(ExoCostSpec::iid_uniform(means, cfg.cost_levels)?, t)?))
            }
            Factory::Sleeping => {
                let means = (0..k).map(|_| rng.random::<f64>()).collect();
                let spec = SleepingSpec::independent(means, cfg.wake_probability, cfg.sleeping_variant)?;
                plain(Box::new(SleepingEnv::new(spec, t)?))
            }
            Factory::Epoch => plain(Box::new(
                build_adversarial_epoch_instance(c, k, t, cfg.c_const, rng)?.into_env(None)?,
            )),
            Factory::AcyclicEpoch { graph, graphs } => plain(Box::new(
                build_acyclic_epoch_instance(graph, k, t, cfg.c_const, rng)?.into_env(Some(graphs.clone()))?,
            )),
            Factory::CoinFlip => plain(Box::new(coin_flip_env(c, t, rng.random())?)),
        })
    }

    fn params(&self, arms: usize, horizon: usize, variant: Exp3Variant) -> Result<AlgoParams> {
        let mut p = default_params(arms, horizon, variant)?;
        if let Some(a) = self.cfg.alpha {
            p.alpha = a;
        }
        if let Some(b) = self.cfg.beta {
            p.beta = b;
        }
        p.validate(arms).map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }

    /// Fresh learner for an instance.
    pub fn learner(&self, inst: &Instance) -> Result<Box<dyn Learner>> {
        let env = &*inst.env;
        let d = env.dims();
        let (k, c, t) = (d.arms, d.contexts, d.horizon);
        let sparse = c > SPARSE_CONTEXTS;
        let dist = || {
            env.context_probabilities()
                .ok_or_else(|| Error::Config("learner needs a known context distribution".into()))
        };
        let graphs = || -> Result<Arc<[ClGraph]>> {
            env.graphs()
                .map(|g| g.to_vec().into())
                .ok_or_else(|| Error::Config("learner needs cross-learning graphs".into()))
        };
        let too_many = |what: &'static str| Error::Capacity {
            what,
            limit: SPARSE_CONTEXTS,
            got: c,
            hint: "it updates every context each round; use exp3-cl-u or ucb1-cl",
        };
        Ok(match self.cfg.algorithm {
            Algorithm::UcbCl if sparse => Box::new(UcbCl::sparse(k, c, t)?),
            Algorithm::UcbCl => Box::new(UcbCl::new(k, c, t)?),
            Algorithm::UcbClAffine => Box::new(AffineUcb::new(
                k,
                t,
                env.features()
                    .ok_or_else(|| Error::Config("environment has no affine feature map".into()))?,
            )?),
            Algorithm::Exp3Cl if sparse => return Err(too_many("exp3-cl")),
            Algorithm::Exp3Cl => Box::new(Exp3Cl::known(k, dist()?, self.params(k, t, Exp3Variant::Known)?)?),
            Algorithm::Exp3ClU if sparse => {
                Box::new(Exp3Cl::unknown_sparse(k, c, self.params(k, t, Exp3Variant::Unknown)?)?)
            }
            Algorithm::Exp3ClU => Box::new(Exp3Cl::unknown(k, c, self.params(k, t, Exp3Variant::Unknown)?)?),
            Algorithm::UcbPcl => Box::new(UcbPcl::new(graphs()?, t)?),
            Algorithm::Exp3Pcl if sparse => return Err(too_many("exp3-pcl")),
            Algorithm::Exp3Pcl => {
                let lambda_bar = self.lambda_bar.unwrap_or(1.0);
                let params = self.params(k, t, Exp3Variant::Partial { lambda_bar })?;
                Box::new(Exp3Pcl::new(graphs()?, dist()?, params)?)
            }
            Algorithm::SUcb1 => Box::new(SUcb1::bucketed(k, c, t, inst.buckets.clone())?),
            Algorithm::SExp3 => Box::new(SExp3::bucketed(
                k,
                c,
                self.params(k, t, Exp3Variant::Known)?,
                inst.buckets.clone(),
            )?),
        })
    }

    fn notion(&self, env: &dyn Environment) -> RegretNotion {
        self.cfg.notion.unwrap_or_else(|| env.default_notion())
    }

    /// Runs replication `rep` from its own seeds.
    pub fn run_replication(&self, rep: usize) -> Result<RunResult> {
        let (mut env_rng, mut learner_rng) = replication_rngs(self.cfg.seed, rep);
        let mut inst = self.instance(&mut env_rng)?;
        let mut learner = self.learner(&inst)?;
        let horizon = inst.env.dims().horizon;
        let mut log = RoundLog::with_capacity(horizon);
        for t in 0..horizon {
            let context = inst.env.next_context(t, &mut env_rng);
            let arm = learner.select(context, &mut learner_rng);
            let feedback = inst.env.pull(t, context, arm, &mut env_rng);
            learner.update(&feedback)?;
            log.push(Round {
                t,
                context,
                arm,
                reward: feedback.reward,
            });
        }
        let regret = inst.env.regret(&log, self.notion(&*inst.env))?;
        Ok(RunResult {
            replication: rep,
            log: self.cfg.keep_logs.then_some(log),
            regret,
        })
    }

    /// Runs every replication; results are ordered by replication index
    /// whatever the execution order.
    pub fn run(&self, parallelism: Parallelism) -> Result<Vec<RunResult>> {
        let reps = 0..self.cfg.replications;
        match parallelism {
            Parallelism::Sequential => reps.map(|r| self.run_replication(r)).collect(),
            Parallelism::Parallel => self.run_parallel(reps),
        }
    }

    #[cfg(feature = "parallel")]
    fn run_parallel(&self, reps: std::ops::Range<usize>) -> Result<Vec<RunResult>> {
        use rayon::prelude::*;
        let work = || reps.clone().into_par_iter().map(|r| self.run_replication(r)).collect();
        match workers()? {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
                .install(work),
            None => work(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn run_parallel(&self, reps: std::ops::Range<usize>) -> Result<Vec<RunResult>> {
        reps.map(|r| self.run_replication(r)).collect()
    }
}

/// Worker count from [`WORKERS_ENV`], if set.
pub fn workers() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// Validates `cfg` and runs all of its replications.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunResult>> {
    run_experiment_with(cfg, Parallelism::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, parallelism: Parallelism) -> Result<Vec<RunResult>> {
    Experiment::new(cfg.clone())?.run(parallelism)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::GraphSpec;

    fn small(algo: Algorithm) -> ExperimentConfig {
        ExperimentConfig {
            algorithm: algo,
            arms: 3,
            contexts: 4,
            horizon: 200,
            replications: 3,
            seed: 11,
            keep_logs: true,
            ..Default::default()
        }
    }

    #[test]
    fn runs_are_deterministic_and_order_independent() {
        let cfg = small(Algorithm::Exp3ClU);
        let a = run_experiment_with(&cfg, Parallelism::Sequential).unwrap();
        let b = run_experiment_with(&cfg, Parallelism::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.replication).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_ne!(a[0].regret, a[1].regret);
    }

    #[test]
    fn horizon_equal_to_arms_only_initializes() {
        let cfg = ExperimentConfig {
            horizon: 3,
            replications: 1,
            ..small(Algorithm::UcbCl)
        };
        let r = run_experiment(&cfg).unwrap();
        let arms: Vec<usize> = r[0].log.as_ref().unwrap().rounds().iter().map(|r| r.arm).collect();
        assert_eq!(arms, vec![0, 1, 2]);
    }

    #[test]
    fn compatibility_matrix() {
        let partial = |algo| ExperimentConfig {
            graph: GraphSpec::Line,
            ..small(algo)
        };
        for algo in [Algorithm::UcbCl, Algorithm::Exp3Cl, Algorithm::Exp3ClU, Algorithm::UcbClAffine] {
            assert!(matches!(Experiment::new(partial(algo)), Err(Error::Config(_))), "{algo}");
        }
        for algo in [Algorithm::UcbPcl, Algorithm::Exp3Pcl] {
            assert!(matches!(Experiment::new(small(algo)), Err(Error::Config(_))), "{algo}");
            assert!(Experiment::new(partial(algo)).is_ok());
        }
        for algo in [Algorithm::SUcb1, Algorithm::SExp3] {
            assert!(Experiment::new(small(algo)).is_ok());
            assert!(Experiment::new(partial(algo)).is_ok());
        }
        // bernoulli rewards are not affine in any feature map
        assert!(Experiment::new(small(Algorithm::UcbClAffine)).is_err());
        let epoch = ExperimentConfig {
            env: EnvKind::Epoch,
            ..small(Algorithm::Exp3Cl)
        };
        assert!(matches!(Experiment::new(epoch), Err(Error::Config(_))));
    }

    #[test]
    fn every_environment_runs() {
        let cases = [
            (EnvKind::Bernoulli, Algorithm::Exp3Cl),
            (EnvKind::ExoCost, Algorithm::UcbClAffine),
            (EnvKind::Sleeping, Algorithm::UcbCl),
            (EnvKind::Epoch, Algorithm::UcbCl),
            (EnvKind::CoinFlip, Algorithm::Exp3ClU),
        ];
        for (env, algo) in cases {
            let cfg = ExperimentConfig {
                env,
                cost_levels: 2,
                ..small(algo)
            };
            let r = run_experiment(&cfg).unwrap();
            assert_eq!(r[0].regret.len(), 200, "{env:?}");
        }
        let acyclic = ExperimentConfig {
            env: EnvKind::AcyclicEpoch,
            graph: GraphSpec::Line,
            ..small(Algorithm::Exp3Pcl)
        };
        assert!(matches!(run_experiment(&acyclic), Err(Error::Config(_))));
        let acyclic = ExperimentConfig {
            algorithm: Algorithm::UcbPcl,
            ..acyclic
        };
        assert_eq!(run_experiment(&acyclic).unwrap().len(), 3);
        let kleinberg = ExperimentConfig {
            env: EnvKind::Sleeping,
            sleeping_variant: crate::environments::SleepingVariant::KleinbergPartial,
            ..small(Algorithm::Exp3Pcl)
        };
        assert_eq!(run_experiment(&kleinberg).unwrap().len(), 3);
    }

    #[test]
    fn auction_runs_with_coarse_baselines() {
        let cfg = ExperimentConfig {
            env: EnvKind::Auction,
            bid_resolution: 0.1,
            value_resolution: 0.05,
            baseline_resolution: Some(0.25),
            ..small(Algorithm::SUcb1)
        };
        let exp = Experiment::new(cfg).unwrap();
        let (mut rng, _) = replication_rngs(0, 0);
        let inst = exp.instance(&mut rng).unwrap();
        assert_eq!(inst.buckets.as_ref().unwrap().iter().max(), Some(&4));
        assert_eq!(exp.run(Parallelism::Sequential).unwrap().len(), 3);
    }

    #[test]
    fn unset_worker_count_uses_default_pool() {
        // environment variables are process-wide; only read here, never set
        if std::env::var(WORKERS_ENV).is_err() {
            assert_eq!(workers().unwrap(), None);
        }
    }
}
