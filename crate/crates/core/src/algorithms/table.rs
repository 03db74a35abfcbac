use std::collections::HashMap;
use std::sync::Arc;

use crate::bandit::{LazyRewards, Revealed};
use crate::error::{Error, Result};

/// Per-(arm, context) accumulator fed by cross-learned rewards.
///
/// `Dense` stores every cell (arm-major). `Replay` keeps, per arm, the list of
/// scaled reward functions it has seen and materializes a context's row only
/// when that context is queried; rows already materialized are kept current
/// on every update. Replay cost is O(#queried contexts) per update, which is
/// what makes context spaces of size 10^7 workable.
pub(crate) enum CrossTable {
    Dense {
        contexts: usize,
        values: Vec<f64>,
    },
    Replay {
        arms: usize,
        contexts: usize,
        history: Vec<Vec<(f64, LazyRewards)>>,
        rows: HashMap<usize, Vec<f64>>,
    },
}

impl CrossTable {
    pub(crate) fn dense(arms: usize, contexts: usize) -> Self {
        CrossTable::Dense {
            contexts,
            values: vec![0.0; arms * contexts],
        }
    }

    pub(crate) fn replay(arms: usize, contexts: usize) -> Self {
        CrossTable::Replay {
            arms,
            contexts,
            history: vec![Vec::new(); arms],
            rows: HashMap::new(),
        }
    }

    pub(crate) fn contexts(&self) -> usize {
        match self {
            CrossTable::Dense { contexts, .. } | CrossTable::Replay { contexts, .. } => *contexts,
        }
    }

    pub(crate) fn is_dense(&self) -> bool {
        matches!(self, CrossTable::Dense { .. })
    }

    /// Adds `scale * r(c)` to `arm`'s cell at every revealed context `c`.
    pub(crate) fn add(&mut self, arm: usize, revealed: &Revealed, scale: f64) -> Result<()> {
        if !revealed.is_full() {
            return Err(Error::Contract(
                "full cross-learning learner received partial feedback".into(),
            ));
        }
        if revealed.len() != self.contexts() {
            return Err(Error::Dimension(format!(
                "feedback covers {} contexts, learner tracks {}",
                revealed.len(),
                self.contexts()
            )));
        }
        match self {
            CrossTable::Dense { contexts, values, .. } => {
                let row = &mut values[arm * *contexts..(arm + 1) * *contexts];
                match revealed {
                    Revealed::Full(v) => {
                        for (cell, &r) in row.iter_mut().zip(v) {
                            *cell += scale * r;
                        }
                    }
                    other => other.for_each(|c, r| row[c] += scale * r),
                }
            }
            CrossTable::Replay {
                contexts,
                history,
                rows,
                ..
            } => {
                let lazy = match revealed {
                    Revealed::Lazy(l) => l.clone(),
                    Revealed::Full(v) => {
                        let v = Arc::new(v.clone());
                        LazyRewards::new(*contexts, move |c| v[c])
                    }
                    Revealed::Partial(_) => unreachable!("checked above"),
                };
                for (&c, row) in rows.iter_mut() {
                    row[arm] += scale * lazy.eval(c);
                }
                history[arm].push((scale, lazy));
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn get(&mut self, arm: usize, context: usize) -> f64 {
        match self {
            CrossTable::Dense { contexts, values, .. } => values[arm * *contexts + context],
            CrossTable::Replay { .. } => self.row(context)[arm],
        }
    }

    /// Values of every arm at `context`.
    pub(crate) fn row(&mut self, context: usize) -> &[f64] {
        match self {
            CrossTable::Dense { .. } => {
                panic!("row() is only used on replay tables")
            }
            CrossTable::Replay {
                arms, history, rows, ..
            } => rows.entry(context).or_insert_with(|| {
                (0..*arms)
                    .map(|i| {
                        history[i]
                            .iter()
                            .fold(0.0, |acc, (scale, lazy)| acc + scale * lazy.eval(context))
                    })
                    .collect()
            }),
        }
    }

    pub(crate) fn dense_values(&self) -> Option<&[f64]> {
        match self {
            CrossTable::Dense { values, .. } => Some(values),
            CrossTable::Replay { .. } => None,
        }
    }

    pub(crate) fn dense_values_mut(&mut self) -> Option<&mut [f64]> {
        match self {
            CrossTable::Dense { values, .. } => Some(values),
            CrossTable::Replay { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_matches_dense() {
        let (k, c) = (3, 7);
        let mut dense = CrossTable::dense(k, c);
        let mut replay = CrossTable::replay(k, c);
        // query one context early so its row is kept current incrementally
        assert_eq!(replay.get(1, 2), 0.0);
        for step in 0..20usize {
            let arm = step % k;
            let lazy = LazyRewards::new(c, move |ctx| ((ctx * 7 + step * 3) % 10) as f64 / 10.0);
            let scale = 0.5 + step as f64;
            dense.add(arm, &Revealed::Lazy(lazy.clone()), scale).unwrap();
            replay.add(arm, &Revealed::Lazy(lazy), scale).unwrap();
        }
        for arm in 0..k {
            for ctx in 0..c {
                assert_eq!(dense.get(arm, ctx), replay.get(arm, ctx), "arm {arm} ctx {ctx}");
            }
        }
    }

    #[test]
    fn partial_feedback_is_rejected() {
        let mut t = CrossTable::dense(2, 2);
        assert!(matches!(
            t.add(0, &Revealed::Partial(vec![(0, 1.0)]), 1.0),
            Err(Error::Contract(_))
        ));
    }
}
