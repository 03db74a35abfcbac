//! Domain types, the learner/environment contract, benchmark policies and
//! regret evaluation.

mod interaction;
pub mod policy;
pub mod regret;
mod types;

pub use interaction::{Environment, FeedbackKind, Learner};
pub use policy::{argmax, best_policy_ex_ante, best_policy_ex_post, best_policy_stochastic};
pub use regret::{
    cumulative, evaluate_regret, gap_profile, regret_agreement_margin, regret_trajectory, GapProfile,
    MarginReport, RegretNotion,
};
pub use types::{
    AffineCoefficients, CoinFlipTable, ContextProcess, DenseRewardTable, Feedback, LazyRewards, MeanTable,
    PolicyTable, ProblemDims, RewardModel, RewardSource, Round, RoundLog, RunResult, Revealed,
};
#[cfg(test)]
pub(crate) use types::splitmix64;
