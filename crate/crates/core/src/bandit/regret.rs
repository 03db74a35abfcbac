//! Regret under the three benchmark notions, plus the diagnostics used to
//! reason about them (gap profile, ex-ante/ex-post agreement margin).

use std::fmt;
use std::str::FromStr;

use crate::bandit::policy::{argmax, best_policy_ex_ante, best_policy_ex_post, best_policy_stochastic};
use crate::bandit::types::{MeanTable, PolicyTable, ProblemDims, RewardModel, RoundLog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegretNotion {
    /// Pseudo-regret from true means.
    ExpectedGap,
    /// Realized rewards against the best policy over all rounds.
    RealizedExAnte,
    /// Realized rewards against the best policy on the realized contexts.
    RealizedExPost,
}

impl RegretNotion {
    pub fn as_str(self) -> &'static str {
        match self {
            RegretNotion::ExpectedGap => "expected-gap",
            RegretNotion::RealizedExAnte => "ex-ante",
            RegretNotion::RealizedExPost => "ex-post",
        }
    }
}

impl fmt::Display for RegretNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegretNotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected-gap" | "pseudo" => Ok(RegretNotion::ExpectedGap),
            "ex-ante" => Ok(RegretNotion::RealizedExAnte),
            "ex-post" => Ok(RegretNotion::RealizedExPost),
            other => Err(Error::Config(format!("unknown regret notion `{other}`"))),
        }
    }
}

/// Running sum of `values`.
pub fn cumulative(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Cumulative benchmark-minus-learner series for `log`.
///
/// `ExpectedGap` uses `mu[pi(c_t)](c_t) - mu[I_t](c_t)` and needs a stochastic
/// model; the realized notions read both terms from the reward table.
pub fn regret_trajectory(
    log: &RoundLog,
    benchmark: &PolicyTable,
    model: &RewardModel,
    notion: RegretNotion,
) -> Result<Vec<f64>> {
    if benchmark.contexts() != model.contexts() {
        return Err(Error::Dimension(format!(
            "benchmark covers {} contexts, model has {}",
            benchmark.contexts(),
            model.contexts()
        )));
    }
    match notion {
        RegretNotion::ExpectedGap => {
            let means = model.means().ok_or_else(|| {
                Error::Contract("expected-gap regret needs a stochastic reward model".into())
            })?;
            Ok(cumulative(log.rounds().iter().map(|r| {
                means.mean(r.context, benchmark.arm(r.context)) - means.mean(r.context, r.arm)
            })))
        }
        RegretNotion::RealizedExAnte | RegretNotion::RealizedExPost => {
            let table = model.table().ok_or_else(|| {
                Error::Contract(format!("{notion} regret needs a realized reward table"))
            })?;
            if log.len() > table.horizon() {
                return Err(Error::Dimension("log is longer than the reward table".into()));
            }
            Ok(cumulative(log.rounds().iter().map(|r| {
                table.reward(r.t, benchmark.arm(r.context), r.context) - table.reward(r.t, r.arm, r.context)
            })))
        }
    }
}

/// Builds the benchmark appropriate to `notion` and evaluates the log against it.
pub fn evaluate_regret(log: &RoundLog, model: &RewardModel, notion: RegretNotion) -> Result<Vec<f64>> {
    let benchmark = match notion {
        RegretNotion::ExpectedGap => best_policy_stochastic(
            model
                .means()
                .ok_or_else(|| Error::Contract("expected-gap regret needs a stochastic reward model".into()))?,
        ),
        RegretNotion::RealizedExAnte => best_policy_ex_ante(
            model
                .table()
                .ok_or_else(|| Error::Contract("ex-ante regret needs a realized reward table".into()))?,
        ),
        RegretNotion::RealizedExPost => best_policy_ex_post(
            model
                .table()
                .ok_or_else(|| Error::Contract("ex-post regret needs a realized reward table".into()))?,
            &log.contexts(),
        )?,
    };
    regret_trajectory(log, &benchmark, model, notion)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    /// `Pr[c] * Delta_c` per context.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub threshold: f64,
    pub agrees: bool,
}

/// Sufficient condition under which ex-ante and ex-post regret agree in
/// expectation to within one unit: `min_c Pr[c] Delta_c >= sqrt(2 ln(TCK) / T)`.
///
/// `Delta_c` is the smallest average-reward gap between the ex-ante best arm
/// and any rival. A context with a single arm has no rival and an infinite gap.
pub fn regret_agreement_margin(model: &RewardModel, dist: &[f64], dims: ProblemDims) -> Result<MarginReport> {
    if dist.len() != dims.contexts || model.contexts() != dims.contexts || model.arms() != dims.arms {
        return Err(Error::Dimension("model, distribution and dims disagree".into()));
    }
    let k = dims.arms;
    let average_rewards: Vec<Vec<f64>> = if let Some(means) = model.means() {
        (0..dims.contexts).map(|c| means.row(c).to_vec()).collect()
    } else {
        let table = model.table().expect("non-stochastic models carry a table");
        let horizon = table.horizon() as f64;
        let mut sums = vec![vec![0.0; k]; dims.contexts];
        for t in 0..table.horizon() {
            for (c, row) in sums.iter_mut().enumerate() {
                for (i, s) in row.iter_mut().enumerate() {
                    *s += table.reward(t, i, c);
                }
            }
        }
        sums.into_iter()
            .map(|row| row.into_iter().map(|s| s / horizon).collect())
            .collect()
    };
    let margins: Vec<f64> = average_rewards
        .iter()
        .zip(dist)
        .map(|(row, &p)| {
            let best = argmax(row.iter().copied());
            let gap = row
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != best)
                .map(|(_, &r)| row[best] - r)
                .fold(f64::INFINITY, f64::min);
            if p == 0.0 {
                0.0
            } else {
                p * gap
            }
        })
        .collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let horizon = dims.horizon as f64;
    let threshold = (2.0 * (horizon * dims.contexts as f64 * k as f64).ln() / horizon).sqrt();
    Ok(MarginReport {
        agrees: min_margin >= threshold,
        margins,
        min_margin,
        threshold,
    })
}

/// Per-(context, arm) gaps and the sample counts they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    /// `Delta_i(c)`, row-major by context.
    pub gaps: Vec<f64>,
    pub arms: usize,
    /// Smallest positive gap, if any.
    pub min_positive_gap: Option<f64>,
    /// `sqrt(K ln T / T)`.
    pub delta_min: f64,
    /// `8 ln T / Delta_i(c)^2`, `None` where the gap is zero.
    pub samples_needed: Vec<Option<f64>>,
}

impl GapProfile {
    pub fn gap(&self, context: usize, arm: usize) -> f64 {
        self.gaps[context * self.arms + arm]
    }

    pub fn samples(&self, context: usize, arm: usize) -> Option<f64> {
        self.samples_needed[context * self.arms + arm]
    }
}

pub fn gap_profile(means: &MeanTable, horizon: usize) -> GapProfile {
    let k = means.arms();
    let log_t = (horizon as f64).ln();
    let mut gaps = Vec::with_capacity(means.contexts() * k);
    for c in 0..means.contexts() {
        let row = means.row(c);
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        gaps.extend(row.iter().map(|&m| best - m));
    }
    let min_positive_gap = gaps.iter().copied().filter(|&g| g > 0.0).reduce(f64::min);
    let samples_needed = gaps
        .iter()
        .map(|&g| (g > 0.0).then(|| 8.0 * log_t / (g * g)))
        .collect();
    GapProfile {
        gaps,
        arms: k,
        min_positive_gap,
        delta_min: (k as f64 * log_t / horizon as f64).sqrt(),
        samples_needed,
    }
}
