use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::bandit::{
    evaluate_regret, ContextProcess, Environment, Feedback, FeedbackKind, LazyRewards, MeanTable, ProblemDims,
    RegretNotion, RewardModel, RewardSource, RoundLog,
};
use crate::error::{Error, Result};
use crate::partial::ClGraph;

/// A reward model paired with a context process, optionally restricted to
/// partial feedback through one cross-learning graph per arm.
#[derive(Debug, Clone)]
pub struct StandardEnv {
    dims: ProblemDims,
    model: Arc<RewardModel>,
    contexts: ContextProcess,
    graphs: Option<Arc<[ClGraph]>>,
}

impl StandardEnv {
    pub fn new(model: RewardModel, contexts: ContextProcess, horizon: usize) -> Result<Self> {
        if model.contexts() != contexts.contexts() {
            return Err(Error::Dimension(format!(
                "reward model has {} contexts, context process {}",
                model.contexts(),
                contexts.contexts()
            )));
        }
        if let Some(table) = model.table() {
            if table.horizon() < horizon {
                return Err(Error::Dimension(format!(
                    "reward table covers {} rounds, horizon is {horizon}",
                    table.horizon()
                )));
            }
        }
        let dims = ProblemDims::new(model.arms(), model.contexts(), horizon)?;
        Ok(Self {
            dims,
            model: Arc::new(model),
            contexts,
            graphs: None,
        })
    }

    /// Switches to partial feedback: pulling arm `i` in `c` reveals
    /// `O_i(c)` of `graphs[i]`.
    pub fn with_graphs(mut self, graphs: Arc<[ClGraph]>) -> Result<Self> {
        if graphs.len() != self.dims.arms {
            return Err(Error::Dimension(format!(
                "{} graphs for {} arms",
                graphs.len(),
                self.dims.arms
            )));
        }
        if let Some(g) = graphs.iter().find(|g| g.contexts() != self.dims.contexts) {
            return Err(Error::Dimension(format!(
                "graph over {} contexts, environment has {}",
                g.contexts(),
                self.dims.contexts
            )));
        }
        self.graphs = Some(graphs);
        Ok(self)
    }

    pub fn model(&self) -> &RewardModel {
        &self.model
    }

    pub fn context_process(&self) -> &ContextProcess {
        &self.contexts
    }
}

impl Environment for StandardEnv {
    fn dims(&self) -> ProblemDims {
        self.dims
    }

    fn feedback_kind(&self) -> FeedbackKind {
        if self.graphs.is_some() {
            FeedbackKind::Partial
        } else {
            FeedbackKind::Full
        }
    }

    fn context_probabilities(&self) -> Option<Vec<f64>> {
        self.contexts.probabilities()
    }

    fn graphs(&self) -> Option<&[ClGraph]> {
        self.graphs.as_deref()
    }

    fn default_notion(&self) -> RegretNotion {
        match &*self.model {
            RewardModel::StochasticBernoulli(_) | RewardModel::StochasticUniform { .. } => RegretNotion::ExpectedGap,
            RewardModel::AdversarialTable(_) => RegretNotion::RealizedExAnte,
            RewardModel::AdversarialCoin(_) => RegretNotion::RealizedExPost,
        }
    }

    fn next_context(&mut self, t: usize, rng: &mut dyn RngCore) -> usize {
        self.contexts.draw(t, rng)
    }

    fn pull(&mut self, t: usize, context: usize, arm: usize, rng: &mut dyn RngCore) -> Feedback {
        if let Some(graphs) = &self.graphs {
            let entries = graphs[arm]
                .out_neighbors(context)
                .iter()
                .map(|&c| (c, self.model.sample(t, arm, c, rng)))
                .collect();
            return Feedback::partial(arm, context, entries).expect("out-neighbourhoods contain the context");
        }
        if let RewardModel::AdversarialCoin(table) = &*self.model {
            let table = *table;
            let lazy = LazyRewards::new(self.dims.contexts, move |c| table.reward(t, arm, c));
            return Feedback::lazy(arm, context, lazy).expect("context is in range");
        }
        let rewards = (0..self.dims.contexts)
            .map(|c| self.model.sample(t, arm, c, rng))
            .collect();
        Feedback::full(arm, context, rewards).expect("context is in range")
    }

    fn regret(&self, log: &RoundLog, notion: RegretNotion) -> Result<Vec<f64>> {
        evaluate_regret(log, &self.model, notion)
    }
}

/// Mean table with every entry drawn i.i.d. uniform on `[0, 1]`.
pub fn random_means(arms: usize, contexts: usize, rng: &mut impl Rng) -> Result<MeanTable> {
    let means = (0..arms * contexts).map(|_| rng.random::<f64>()).collect();
    MeanTable::from_flat(contexts, arms, means)
}
