use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};

/// Arm count, context count and horizon of one problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemDims {
    pub arms: usize,
    pub contexts: usize,
    pub horizon: usize,
}

impl ProblemDims {
    pub fn new(arms: usize, contexts: usize, horizon: usize) -> Result<Self> {
        if arms == 0 || contexts == 0 || horizon == 0 {
            return Err(Error::Dimension(format!(
                "arms, contexts and horizon must be positive (got K={arms}, C={contexts}, T={horizon})"
            )));
        }
        Ok(Self {
            arms,
            contexts,
            horizon,
        })
    }
}

fn check_unit(value: f64, what: impl FnOnce() -> String) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Range(format!("{} = {value} is outside [0, 1]", what())))
    }
}

/// Context-by-arm table of mean rewards, stored row-major by context.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTable {
    contexts: usize,
    arms: usize,
    means: Vec<f64>,
}

impl MeanTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let contexts = rows.len();
        let arms = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != arms) {
            return Err(Error::Dimension("mean table rows have different lengths".into()));
        }
        Self::from_flat(contexts, arms, rows.into_iter().flatten().collect())
    }

    pub fn from_flat(contexts: usize, arms: usize, means: Vec<f64>) -> Result<Self> {
        if contexts == 0 || arms == 0 {
            return Err(Error::Dimension("mean table must be non-empty".into()));
        }
        if means.len() != contexts * arms {
            return Err(Error::Dimension(format!(
                "expected {} means for a {contexts}x{arms} table, got {}",
                contexts * arms,
                means.len()
            )));
        }
        for (idx, &m) in means.iter().enumerate() {
            check_unit(m, || format!("mean[{}][{}]", idx / arms, idx % arms))?;
        }
        Ok(Self {
            contexts,
            arms,
            means,
        })
    }

    pub fn contexts(&self) -> usize {
        self.contexts
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    #[inline]
    pub fn mean(&self, context: usize, arm: usize) -> f64 {
        self.means[context * self.arms + arm]
    }

    pub fn row(&self, context: usize) -> &[f64] {
        &self.means[context * self.arms..(context + 1) * self.arms]
    }
}

/// Random-access view of a full reward table `r[t][arm][context]`.
///
/// This is evaluator-side knowledge; learners only ever see [`Feedback`].
pub trait RewardSource: Send + Sync {
    fn horizon(&self) -> usize;
    fn arms(&self) -> usize;
    fn contexts(&self) -> usize;
    fn reward(&self, t: usize, arm: usize, context: usize) -> f64;
}

/// Dense `T x K x C` adversarial reward table.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRewardTable {
    horizon: usize,
    arms: usize,
    contexts: usize,
    values: Vec<f64>,
}

impl DenseRewardTable {
    /// `values` is laid out round-major, then arm, then context.
    pub fn new(horizon: usize, arms: usize, contexts: usize, values: Vec<f64>) -> Result<Self> {
        ProblemDims::new(arms, contexts, horizon)?;
        if values.len() != horizon * arms * contexts {
            return Err(Error::Dimension(format!(
                "expected {} rewards for a {horizon}x{arms}x{contexts} table, got {}",
                horizon * arms * contexts,
                values.len()
            )));
        }
        for (idx, &v) in values.iter().enumerate() {
            check_unit(v, || {
                let c = idx % contexts;
                let i = (idx / contexts) % arms;
                let t = idx / (contexts * arms);
                format!("r[t={t}][arm={i}][context={c}]")
            })?;
        }
        Ok(Self {
            horizon,
            arms,
            contexts,
            values,
        })
    }

    pub fn from_fn(
        horizon: usize,
        arms: usize,
        contexts: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(horizon * arms * contexts);
        for t in 0..horizon {
            for i in 0..arms {
                for c in 0..contexts {
                    values.push(f(t, i, c));
                }
            }
        }
        Self::new(horizon, arms, contexts, values)
    }

    /// Rewards of every context for `arm` at round `t`.
    pub fn slice(&self, t: usize, arm: usize) -> &[f64] {
        let start = (t * self.arms + arm) * self.contexts;
        &self.values[start..start + self.contexts]
    }
}

impl RewardSource for DenseRewardTable {
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn arms(&self) -> usize {
        self.arms
    }
    fn contexts(&self) -> usize {
        self.contexts
    }
    #[inline]
    fn reward(&self, t: usize, arm: usize, context: usize) -> f64 {
        self.values[(t * self.arms + arm) * self.contexts + context]
    }
}

#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Two-arm table where, for every `(t, c)`, exactly one arm pays 1 and the
/// other pays 0, each with probability one half.
///
/// Entries are derived from a keyed hash, so the table needs O(1) memory no
/// matter how many contexts it spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoinFlipTable {
    contexts: usize,
    horizon: usize,
    seed: u64,
}

impl CoinFlipTable {
    pub fn new(contexts: usize, horizon: usize, seed: u64) -> Result<Self> {
        ProblemDims::new(2, contexts, horizon)?;
        Ok(Self {
            contexts,
            horizon,
            seed,
        })
    }

    #[inline]
    fn coin(&self, t: usize, context: usize) -> u64 {
        let key = splitmix64(self.seed ^ splitmix64(t as u64));
        splitmix64(key ^ (context as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93)) >> 63
    }
}

impl RewardSource for CoinFlipTable {
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn arms(&self) -> usize {
        2
    }
    fn contexts(&self) -> usize {
        self.contexts
    }
    #[inline]
    fn reward(&self, t: usize, arm: usize, context: usize) -> f64 {
        let coin = self.coin(t, context);
        if (arm as u64) == coin {
            1.0
        } else {
            0.0
        }
    }
}

/// How rewards `r[t][arm](context)` arise.
#[derive(Debug, Clone)]
pub enum RewardModel {
    StochasticBernoulli(MeanTable),
    StochasticUniform { means: MeanTable, half_width: f64 },
    AdversarialTable(DenseRewardTable),
    AdversarialCoin(CoinFlipTable),
}

impl RewardModel {
    pub fn uniform(means: MeanTable, half_width: f64) -> Result<Self> {
        if !(half_width >= 0.0) {
            return Err(Error::Range(format!("half-width {half_width} must be nonnegative")));
        }
        for c in 0..means.contexts() {
            for (i, &m) in means.row(c).iter().enumerate() {
                if m - half_width < 0.0 || m + half_width > 1.0 {
                    return Err(Error::Range(format!(
                        "uniform support [{}, {}] of arm {i} in context {c} leaves [0, 1]",
                        m - half_width,
                        m + half_width
                    )));
                }
            }
        }
        Ok(RewardModel::StochasticUniform { means, half_width })
    }

    pub fn arms(&self) -> usize {
        match self {
            RewardModel::StochasticBernoulli(m) | RewardModel::StochasticUniform { means: m, .. } => m.arms(),
            RewardModel::AdversarialTable(t) => t.arms(),
            RewardModel::AdversarialCoin(t) => t.arms(),
        }
    }

    pub fn contexts(&self) -> usize {
        match self {
            RewardModel::StochasticBernoulli(m) | RewardModel::StochasticUniform { means: m, .. } => m.contexts(),
            RewardModel::AdversarialTable(t) => t.contexts(),
            RewardModel::AdversarialCoin(t) => t.contexts(),
        }
    }

    /// True mean table for stochastic models.
    pub fn means(&self) -> Option<&MeanTable> {
        match self {
            RewardModel::StochasticBernoulli(m) | RewardModel::StochasticUniform { means: m, .. } => Some(m),
            _ => None,
        }
    }

    /// Realized reward table for adversarial models.
    pub fn table(&self) -> Option<&dyn RewardSource> {
        match self {
            RewardModel::AdversarialTable(t) => Some(t),
            RewardModel::AdversarialCoin(t) => Some(t),
            _ => None,
        }
    }

    /// Draws (stochastic) or looks up (adversarial) `r[t][arm](context)`.
    #[inline]
    pub fn sample(&self, t: usize, arm: usize, context: usize, rng: &mut dyn RngCore) -> f64 {
        match self {
            RewardModel::StochasticBernoulli(m) => {
                if rng.random::<f64>() < m.mean(context, arm) {
                    1.0
                } else {
                    0.0
                }
            }
            RewardModel::StochasticUniform { means, half_width } => {
                let u: f64 = rng.random();
                (means.mean(context, arm) + half_width * (2.0 * u - 1.0)).clamp(0.0, 1.0)
            }
            RewardModel::AdversarialTable(table) => table.reward(t, arm, context),
            RewardModel::AdversarialCoin(table) => table.reward(t, arm, context),
        }
    }
}

/// Where the per-round context comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextProcess {
    /// i.i.d. draws from an explicit probability vector.
    Iid { probs: Vec<f64>, cumulative: Vec<f64> },
    /// i.i.d. uniform over `contexts` values; stores nothing per context.
    Uniform { contexts: usize },
    /// Fixed sequence chosen in advance.
    AdversarialSequence { contexts: usize, sequence: Vec<usize> },
}

impl ContextProcess {
    pub fn iid(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Dimension("context distribution is empty".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Range("context probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Range(format!("context probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(ContextProcess::Iid { probs, cumulative })
    }

    pub fn uniform(contexts: usize) -> Result<Self> {
        if contexts == 0 {
            return Err(Error::Dimension("need at least one context".into()));
        }
        Ok(ContextProcess::Uniform { contexts })
    }

    pub fn sequence(contexts: usize, sequence: Vec<usize>) -> Result<Self> {
        if let Some((t, &c)) = sequence.iter().enumerate().find(|(_, &c)| c >= contexts) {
            return Err(Error::Range(format!("context {c} at round {t} is not below C={contexts}")));
        }
        Ok(ContextProcess::AdversarialSequence { contexts, sequence })
    }

    pub fn contexts(&self) -> usize {
        match self {
            ContextProcess::Iid { probs, .. } => probs.len(),
            ContextProcess::Uniform { contexts } | ContextProcess::AdversarialSequence { contexts, .. } => *contexts,
        }
    }

    /// Probability of `context` under an i.i.d. process.
    pub fn probability(&self, context: usize) -> Option<f64> {
        match self {
            ContextProcess::Iid { probs, .. } => Some(probs[context]),
            ContextProcess::Uniform { contexts } => Some(1.0 / *contexts as f64),
            ContextProcess::AdversarialSequence { .. } => None,
        }
    }

    /// Dense probability vector, if the process is i.i.d.
    pub fn probabilities(&self) -> Option<Vec<f64>> {
        match self {
            ContextProcess::Iid { probs, .. } => Some(probs.clone()),
            ContextProcess::Uniform { contexts } => Some(vec![1.0 / *contexts as f64; *contexts]),
            ContextProcess::AdversarialSequence { .. } => None,
        }
    }

    pub fn draw(&self, t: usize, rng: &mut dyn RngCore) -> usize {
        match self {
            ContextProcess::Iid { cumulative, .. } => {
                let u: f64 = rng.random();
                cumulative
                    .partition_point(|&c| c <= u)
                    .min(cumulative.len() - 1)
            }
            ContextProcess::Uniform { contexts } => rng.random_range(0..*contexts),
            ContextProcess::AdversarialSequence { sequence, .. } => sequence[t % sequence.len()],
        }
    }
}

/// Rewards of all contexts, evaluated on demand.
#[derive(Clone)]
pub struct LazyRewards {
    contexts: usize,
    eval: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl LazyRewards {
    pub fn new(contexts: usize, eval: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            contexts,
            eval: Arc::new(eval),
        }
    }

    #[inline]
    pub fn eval(&self, context: usize) -> f64 {
        (self.eval)(context)
    }

    pub fn contexts(&self) -> usize {
        self.contexts
    }
}

impl fmt::Debug for LazyRewards {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyRewards").field("contexts", &self.contexts).finish()
    }
}

/// Cross-learned rewards revealed by one pull.
#[derive(Debug, Clone)]
pub enum Revealed {
    /// Every context, indexed by context.
    Full(Vec<f64>),
    /// Only the listed contexts, sorted ascending.
    Partial(Vec<(usize, f64)>),
    /// Every context, computed on demand (huge context spaces).
    Lazy(LazyRewards),
}

impl Revealed {
    pub fn is_full(&self) -> bool {
        !matches!(self, Revealed::Partial(_))
    }

    pub fn value(&self, context: usize) -> Option<f64> {
        match self {
            Revealed::Full(v) => v.get(context).copied(),
            Revealed::Partial(entries) => entries
                .binary_search_by_key(&context, |&(c, _)| c)
                .ok()
                .map(|idx| entries[idx].1),
            Revealed::Lazy(l) => (context < l.contexts()).then(|| l.eval(context)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Revealed::Full(v) => v.len(),
            Revealed::Partial(e) => e.len(),
            Revealed::Lazy(l) => l.contexts(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(context, reward)` for every revealed context in ascending order.
    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            Revealed::Full(v) => v.iter().enumerate().for_each(|(c, &r)| f(c, r)),
            Revealed::Partial(e) => e.iter().for_each(|&(c, r)| f(c, r)),
            Revealed::Lazy(l) => (0..l.contexts()).for_each(|c| f(c, l.eval(c))),
        }
    }
}

/// Coefficients `(a, b)` such that the revealed reward at context `c` is
/// `a . rho(c) + b` for a feature map `rho` known to the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCoefficients {
    pub slope: Vec<f64>,
    pub intercept: f64,
}

/// Everything a learner observes after one pull.
#[derive(Debug, Clone)]
pub struct Feedback {
    pub arm: usize,
    pub context: usize,
    pub reward: f64,
    pub revealed: Revealed,
    pub affine: Option<AffineCoefficients>,
}

impl Feedback {
    /// Feedback revealing every context; `rewards[c]` is the reward at `c`.
    pub fn full(arm: usize, context: usize, rewards: Vec<f64>) -> Result<Self> {
        let reward = *rewards
            .get(context)
            .ok_or_else(|| Error::Dimension(format!("context {context} outside revealed vector")))?;
        Ok(Self {
            arm,
            context,
            reward,
            revealed: Revealed::Full(rewards),
            affine: None,
        })
    }

    /// Feedback revealing a subset of contexts, which must include `context`.
    pub fn partial(arm: usize, context: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(c, _)| c);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Contract("revealed set lists a context twice".into()));
        }
        let revealed = Revealed::Partial(entries);
        let reward = revealed.value(context).ok_or_else(|| {
            Error::Contract(format!("revealed set does not contain the realized context {context}"))
        })?;
        Ok(Self {
            arm,
            context,
            reward,
            revealed,
            affine: None,
        })
    }

    pub fn lazy(arm: usize, context: usize, rewards: LazyRewards) -> Result<Self> {
        if context >= rewards.contexts() {
            return Err(Error::Dimension(format!("context {context} outside lazy reward range")));
        }
        Ok(Self {
            arm,
            context,
            reward: rewards.eval(context),
            revealed: Revealed::Lazy(rewards),
            affine: None,
        })
    }

    pub fn with_affine(mut self, coefficients: AffineCoefficients) -> Self {
        self.affine = Some(coefficients);
        self
    }
}

/// Stationary policy: one arm per context. Contexts not stored explicitly map
/// to arm 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    contexts: usize,
    repr: PolicyRepr,
}

#[derive(Debug, Clone, PartialEq)]
enum PolicyRepr {
    Dense(Vec<usize>),
    Sparse(HashMap<usize, usize>),
}

impl PolicyTable {
    pub fn new(arms: Vec<usize>, num_arms: usize) -> Result<Self> {
        if let Some((c, &a)) = arms.iter().enumerate().find(|(_, &a)| a >= num_arms) {
            return Err(Error::Range(format!("policy maps context {c} to arm {a}, but K={num_arms}")));
        }
        Ok(Self {
            contexts: arms.len(),
            repr: PolicyRepr::Dense(arms),
        })
    }

    pub(crate) fn sparse(contexts: usize, entries: HashMap<usize, usize>) -> Self {
        Self {
            contexts,
            repr: PolicyRepr::Sparse(entries),
        }
    }

    pub fn contexts(&self) -> usize {
        self.contexts
    }

    #[inline]
    pub fn arm(&self, context: usize) -> usize {
        match &self.repr {
            PolicyRepr::Dense(v) => v[context],
            PolicyRepr::Sparse(m) => m.get(&context).copied().unwrap_or(0),
        }
    }

    /// Dense arm list (materialized for sparse tables).
    pub fn to_vec(&self) -> Vec<usize> {
        (0..self.contexts).map(|c| self.arm(c)).collect()
    }
}

/// One round of interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Round {
    pub t: usize,
    pub context: usize,
    pub arm: usize,
    /// Reward as seen by the learner.
    pub reward: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundLog {
    rounds: Vec<Round>,
}

impl RoundLog {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            rounds: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, round: Round) {
        self.rounds.push(round);
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn contexts(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.context).collect()
    }
}

impl FromIterator<Round> for RoundLog {
    fn from_iter<I: IntoIterator<Item = Round>>(iter: I) -> Self {
        Self {
            rounds: iter.into_iter().collect(),
        }
    }
}

/// One replication: its log and cumulative regret trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub replication: usize,
    pub log: Option<RoundLog>,
    pub regret: Vec<f64>,
}

impl RunResult {
    pub fn final_regret(&self) -> f64 {
        self.regret.last().copied().unwrap_or(0.0)
    }
}
