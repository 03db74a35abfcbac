//! Benchmark stationary policies.
//!
//! Every constructor breaks ties towards the lowest arm index.

use std::collections::HashMap;

use crate::bandit::types::{MeanTable, PolicyTable, RewardSource};
use crate::error::{Error, Result};

/// Contexts beyond this count get a sparse ex-post policy.
const DENSE_POLICY_LIMIT: usize = 1 << 20;

/// Index of the first maximum; `0` for an empty iterator.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best_value = v;
            best = i;
        }
    }
    best
}

/// `pi(c) = argmax_i mu_i(c)`.
pub fn best_policy_stochastic(means: &MeanTable) -> PolicyTable {
    let arms = (0..means.contexts())
        .map(|c| argmax(means.row(c).iter().copied()))
        .collect();
    PolicyTable::new(arms, means.arms()).expect("argmax stays below K")
}

/// Per context, the arm with the largest reward summed over all rounds.
pub fn best_policy_ex_ante(table: &dyn RewardSource) -> PolicyTable {
    let (k, c_count) = (table.arms(), table.contexts());
    let mut sums = vec![0.0; k * c_count];
    for t in 0..table.horizon() {
        for i in 0..k {
            for c in 0..c_count {
                sums[c * k + i] += table.reward(t, i, c);
            }
        }
    }
    let arms = sums.chunks(k).map(|row| argmax(row.iter().copied())).collect();
    PolicyTable::new(arms, k).expect("argmax stays below K")
}

/// Per context, the arm with the largest reward summed over the rounds in
/// which that context occurred. Unvisited contexts map to arm 0.
pub fn best_policy_ex_post(table: &dyn RewardSource, contexts: &[usize]) -> Result<PolicyTable> {
    let (k, c_count) = (table.arms(), table.contexts());
    if contexts.len() > table.horizon() {
        return Err(Error::Dimension(format!(
            "context sequence has {} rounds but the table only {}",
            contexts.len(),
            table.horizon()
        )));
    }
    if let Some(&c) = contexts.iter().find(|&&c| c >= c_count) {
        return Err(Error::Range(format!("context {c} is not below C={c_count}")));
    }
    let mut sums: HashMap<usize, Vec<f64>> = HashMap::new();
    for (t, &c) in contexts.iter().enumerate() {
        let row = sums.entry(c).or_insert_with(|| vec![0.0; k]);
        for (i, s) in row.iter_mut().enumerate() {
            *s += table.reward(t, i, c);
        }
    }
    let best = sums
        .into_iter()
        .map(|(c, row)| (c, argmax(row)));
    if c_count > DENSE_POLICY_LIMIT {
        return Ok(PolicyTable::sparse(c_count, best.collect()));
    }
    let mut arms = vec![0; c_count];
    for (c, a) in best {
        arms[c] = a;
    }
    PolicyTable::new(arms, k)
}
