//! Concrete problem instances: stochastic and adversarial reward models,
//! first-price auctions, exogenous costs, sleeping bandits and the
//! lower-bound constructions.

mod auction;
mod exo;
mod generic;
mod lower_bound;
mod sleeping;

pub use auction::{
    auction_cross_feedback, auction_reward, calibrate_copula, correlated_auction_sampler, parse_auction_log, pearson,
    read_auction_log,
    trim_auction_log, write_auction_log, AuctionCrossFeedback, AuctionEnv, AuctionOutcome, AuctionSpec,
    CorrelatedAuctionSpec, CorrelatedSampler, Marginal,
};
pub use exo::{exo_cost_feedback, ExoCostEnv, ExoCostSpec};
pub use generic::{random_means, StandardEnv};
pub use lower_bound::{
    build_acyclic_epoch_instance, build_adversarial_epoch_instance, coin_flip_env, epoch_lengths, hard_mab_instance,
    EpochInstance, HardInstance, HardInstanceSpec,
};
pub use sleeping::{
    sleeping_feedback, sleeping_partial_graph, subset_context, subset_of, SleepingEnv, SleepingSpec, SleepingVariant,
};

use crate::error::{Error, Result};

/// Inclusive grid `{0, res, 2 res, ..., 1}`.
pub fn discretize(resolution: f64) -> Result<Vec<f64>> {
    if !(resolution > 0.0) || !resolution.is_finite() || resolution > 1.0 {
        return Err(Error::Parameter(format!("grid resolution {resolution} must lie in (0, 1]")));
    }
    let steps = (1.0 / resolution).round();
    if (steps * resolution - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!("grid resolution {resolution} does not divide 1")));
    }
    let n = steps as usize;
    Ok((0..=n).map(|i| i as f64 / n as f64).collect())
}

/// Index of the grid point nearest to `x` on a grid produced by [`discretize`].
pub(crate) fn snap(x: f64, points: usize) -> usize {
    let n = (points - 1) as f64;
    ((x * n).round().max(0.0) as usize).min(points - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discretize_examples() {
        assert_eq!(discretize(0.5).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(discretize(1.0).unwrap(), vec![0.0, 1.0]);
        let g = discretize(0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[37], 0.37);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn discretize_rejects_bad_resolutions() {
        assert!(discretize(0.0).is_err());
        assert!(discretize(-0.1).is_err());
        assert!(discretize(0.3).is_err());
        assert!(discretize(f64::NAN).is_err());
    }

    #[test]
    fn snap_rounds_to_nearest() {
        assert_eq!(snap(0.0, 101), 0);
        assert_eq!(snap(0.374, 101), 37);
        assert_eq!(snap(0.376, 101), 38);
        assert_eq!(snap(1.0, 101), 100);
        assert_eq!(snap(0.7, 2), 1);
    }
}
