use std::sync::Arc;

use rand::RngCore;

use crate::algorithms::FeatureMap;
use crate::bandit::regret::RegretNotion;
use crate::bandit::types::{Feedback, ProblemDims, RoundLog};
use crate::error::Result;
use crate::partial::ClGraph;

/// A bandit learner. Randomized learners draw only from the generator they
/// are handed, so a run is reproducible from its seeds.
pub trait Learner: Send {
    fn name(&self) -> &str;

    fn select(&mut self, context: usize, rng: &mut dyn RngCore) -> usize;

    fn update(&mut self, feedback: &Feedback) -> Result<()>;
}

/// Whether a pull reveals every context or only the pulled arm's
/// out-neighbourhood in its cross-learning graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    Full,
    Partial,
}

/// A problem instance the harness can drive round by round.
pub trait Environment: Send {
    fn dims(&self) -> ProblemDims;

    fn feedback_kind(&self) -> FeedbackKind;

    /// Context distribution, when contexts are i.i.d. and it is known.
    fn context_probabilities(&self) -> Option<Vec<f64>> {
        None
    }

    /// One cross-learning graph per arm, for partial feedback.
    fn graphs(&self) -> Option<&[ClGraph]> {
        None
    }

    /// Feature map under which revealed rewards are affine.
    fn features(&self) -> Option<Arc<dyn FeatureMap>> {
        None
    }

    fn default_notion(&self) -> RegretNotion;

    fn next_context(&mut self, t: usize, rng: &mut dyn RngCore) -> usize;

    fn pull(&mut self, t: usize, context: usize, arm: usize, rng: &mut dyn RngCore) -> Feedback;

    /// Cumulative regret of a finished run.
    fn regret(&self, log: &RoundLog, notion: RegretNotion) -> Result<Vec<f64>>;
}
