//! Contextual bandits with cross-learning.
//!
//! Pulling an arm in one context can reveal what that arm would have paid in
//! other contexts. This crate provides learners that exploit that feedback
//! (`UCB1.CL`, `EXP3.CL`, `EXP3.CL-U` and their partial-feedback versions),
//! the per-context baselines they are compared with, the graph invariants
//! governing partial feedback, synthetic environments and a seeded Monte
//! Carlo harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod bandit;
pub mod environments;
pub mod error;
pub mod harness;
pub mod partial;

pub use error::{Error, Result};
