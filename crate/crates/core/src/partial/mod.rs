//! Partial cross-learning: context graphs, their invariants and the learners
//! that exploit them.

mod graph;
pub mod invariants;
mod learners;

pub use graph::ClGraph;
pub use invariants::{
    clique_cover_number, independence_number, invariant_order_check, invariant_report, is_acyclic_ordering,
    lambda_objective, lambda_variational_estimate, mas_number, nu2_estimate, nu2_objective, CliqueCover, CoverMode,
    InvariantReport, Method, Nu2Estimate,
};
pub use learners::{exp3pcl_estimator, Exp3Pcl, UcbPcl};
