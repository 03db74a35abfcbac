use std::sync::Arc;

use rand::RngCore;

use crate::algorithms::{sample_arm, width, AlgoParams, LogWeights};
use crate::bandit::{Feedback, Learner, Revealed};
use crate::error::{Error, Result};
use crate::partial::ClGraph;

fn check_graphs(graphs: &[ClGraph], arms: usize) -> Result<usize> {
    if arms == 0 || graphs.len() != arms {
        return Err(Error::Dimension(format!("{} graphs for {arms} arms", graphs.len())));
    }
    let contexts = graphs[0].contexts();
    if graphs.iter().any(|g| g.contexts() != contexts) {
        return Err(Error::Dimension("graphs disagree on the number of contexts".into()));
    }
    Ok(contexts)
}

/// Checks that `revealed` covers exactly `O(c_t)` and calls `f(c, r)` on each
/// revealed context in ascending order.
fn for_each_revealed(
    graph: &ClGraph,
    feedback: &Feedback,
    mut f: impl FnMut(usize, f64),
) -> Result<()> {
    let expected = graph.out_neighbors(feedback.context);
    let mismatch = || {
        Error::Contract(format!(
            "revealed contexts differ from the out-neighbourhood of context {}",
            feedback.context
        ))
    };
    match &feedback.revealed {
        Revealed::Partial(entries) => {
            if entries.len() != expected.len() || entries.iter().zip(expected).any(|(&(c, _), &e)| c != e) {
                return Err(mismatch());
            }
            entries.iter().for_each(|&(c, r)| f(c, r));
        }
        full => {
            if full.len() != graph.contexts() || expected.len() != graph.contexts() {
                return Err(mismatch());
            }
            full.for_each(f);
        }
    }
    Ok(())
}

/// UCB1 with partial cross-learning.
///
/// Statistics are kept per (arm, context): `tau'_i(c)` counts the pulls of
/// `i` whose realized context lies in `I_i(c)`, and `sigma_i(c)` sums the
/// rewards they revealed at `c`. The index is
/// `sigma_i(c) / tau'_i(c) + sqrt(2 ln T / tau'_i(c))`. Any arm not yet
/// observed at the current context is pulled first, lowest index first.
pub struct UcbPcl {
    arms: usize,
    contexts: usize,
    log_horizon: f64,
    graphs: Arc<[ClGraph]>,
    observations: Vec<u64>,
    sums: Vec<f64>,
    pulls: Vec<u64>,
}

impl UcbPcl {
    pub fn new(graphs: Arc<[ClGraph]>, horizon: usize) -> Result<Self> {
        let arms = graphs.len();
        let contexts = check_graphs(&graphs, arms)?;
        if horizon == 0 {
            return Err(Error::Parameter("horizon must be positive".into()));
        }
        Ok(Self {
            arms,
            contexts,
            log_horizon: (horizon as f64).ln(),
            graphs,
            observations: vec![0; arms * contexts],
            sums: vec![0.0; arms * contexts],
            pulls: vec![0; arms],
        })
    }

    /// `tau'_i(c)`.
    pub fn observations(&self, arm: usize, context: usize) -> u64 {
        self.observations[arm * self.contexts + context]
    }

    /// `sigma_i(c)`.
    pub fn reward_sum(&self, arm: usize, context: usize) -> f64 {
        self.sums[arm * self.contexts + context]
    }

    /// Global pull count `tau_i`.
    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }
}

impl Learner for UcbPcl {
    fn name(&self) -> &str {
        "ucb1-pcl"
    }

    fn select(&mut self, context: usize, _rng: &mut dyn RngCore) -> usize {
        let c_count = self.contexts;
        if let Some(arm) = (0..self.arms).find(|&i| self.observations[i * c_count + context] == 0) {
            return arm;
        }
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for i in 0..self.arms {
            let n = self.observations[i * c_count + context];
            let v = self.sums[i * c_count + context] / n as f64 + width(n, self.log_horizon);
            if v > best_value {
                best_value = v;
                best = i;
            }
        }
        best
    }

    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        let arm = feedback.arm;
        if arm >= self.arms || feedback.context >= self.contexts {
            return Err(Error::Range(format!(
                "arm {arm} / context {} outside K={} C={}",
                feedback.context, self.arms, self.contexts
            )));
        }
        let base = arm * self.contexts;
        let (obs, sums) = (&mut self.observations, &mut self.sums);
        for_each_revealed(&self.graphs[arm], feedback, |c, r| {
            sums[base + c] += r;
            obs[base + c] += 1;
        })?;
        self.pulls[arm] += 1;
        Ok(())
    }
}

/// Importance-weighted estimate of `r_i(c)` under partial cross-learning:
/// `r / sum_{c' in I_i(c)} Pr[c'] p_i(c')` when `i` was pulled and the
/// realized context `c_t` lies in `I_i(c)`, otherwise 0. `pull_probs[c']` is
/// `p_i(c')`.
#[allow(clippy::too_many_arguments)]
pub fn exp3pcl_estimator(
    reward: f64,
    arm: usize,
    chosen: usize,
    realized: usize,
    target: usize,
    graph: &ClGraph,
    dist: &[f64],
    pull_probs: &[f64],
) -> Result<f64> {
    if arm != chosen || !graph.has_edge(realized, target) {
        return Ok(0.0);
    }
    let denom: f64 = graph
        .in_neighbors(target)
        .iter()
        .map(|&c| dist[c] * pull_probs[c])
        .sum();
    if !(denom > 0.0) {
        return Err(Error::Contract(format!(
            "no probability mass can reveal context {target}"
        )));
    }
    Ok(reward / denom)
}

/// EXP3 with partial cross-learning and a known context distribution.
/// Contexts whose in-neighbourhood carries no probability mass are never
/// updated.
pub struct Exp3Pcl {
    arms: usize,
    contexts: usize,
    params: AlgoParams,
    dist: Vec<f64>,
    graphs: Arc<[ClGraph]>,
    weights: LogWeights,
    probs: Vec<f64>,
    pending: Vec<(usize, f64)>,
}

impl Exp3Pcl {
    pub fn new(graphs: Arc<[ClGraph]>, dist: Vec<f64>, params: AlgoParams) -> Result<Self> {
        let arms = graphs.len();
        let contexts = check_graphs(&graphs, arms)?;
        params.validate(arms)?;
        let sum: f64 = dist.iter().sum();
        if dist.len() != contexts || dist.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter("context distribution must be a probability vector over C".into()));
        }
        Ok(Self {
            arms,
            contexts,
            params,
            dist,
            graphs,
            weights: LogWeights::new(arms, contexts),
            probs: Vec::with_capacity(arms),
            pending: Vec::new(),
        })
    }

    pub fn probabilities(&self, context: usize) -> Vec<f64> {
        let mut out = Vec::new();
        self.weights.probabilities_into(context, self.params.alpha, &mut out);
        out
    }

    /// `sum_{c' in I_arm(c)} Pr[c'] p_arm(c')` under the current weights.
    pub fn reveal_probability(&self, arm: usize, context: usize) -> f64 {
        let terms = self.graphs[arm]
            .in_neighbors(context)
            .iter()
            .map(|&c| (c, self.dist[c]));
        self.weights.weighted_probability(arm, self.params.alpha, terms)
    }
}

impl Learner for Exp3Pcl {
    fn name(&self) -> &str {
        "exp3-pcl"
    }

    fn select(&mut self, context: usize, rng: &mut dyn RngCore) -> usize {
        self.weights.probabilities_into(context, self.params.alpha, &mut self.probs);
        sample_arm(&self.probs, rng)
    }

    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        let arm = feedback.arm;
        if arm >= self.arms || feedback.context >= self.contexts {
            return Err(Error::Range(format!(
                "arm {arm} / context {} outside K={} C={}",
                feedback.context, self.arms, self.contexts
            )));
        }
        let mut revealed = std::mem::take(&mut self.pending);
        revealed.clear();
        for_each_revealed(&self.graphs[arm], feedback, |c, r| revealed.push((c, r)))?;
        // all denominators use the weights from before this round
        let beta = self.params.beta;
        let increments: Vec<(usize, f64)> = revealed
            .iter()
            .filter_map(|&(c, r)| {
                let denom = self.reveal_probability(arm, c);
                (denom > 0.0).then(|| (c, beta * r / denom))
            })
            .collect();
        for (c, delta) in increments {
            self.weights.add(arm, c, delta);
        }
        self.pending = revealed;
        Ok(())
    }
}
