//! Rationalizability tests for panel choice data generated by agents who
//! learn from shared or related information.
//!
//! A researcher observes which of several ordered alternatives each of `I`
//! agents picks in each of `T` periods, and asks whether some profile of
//! threshold preferences, a common prior, state transitions and signal
//! experiments could have produced exactly those choices. This crate decides
//! that question for several information environments, and when the answer is
//! yes it synthesizes a complete, machine-verifiable witness in exact rational
//! arithmetic:
//!
//! - [`cycles`] detects the single forbidden pattern (two agents moving in
//!   strictly opposite directions between two periods) and its adjacent-period
//!   variant.
//! - [`order`] extracts the revealed ranking of agent thresholds from
//!   cycle-free data and assigns exact cutoff values.
//! - [`witness`] constructs and verifies full common-belief rationalizations:
//!   cutoffs, utilities, beliefs, transitions and binary experiments.
//! - [`permute`] decides rationalizability when agents may prefer to mismatch
//!   the state, via a 2-SAT flip search or a guarded permutation search.
//! - [`comonotone`] handles private but directionally aligned signals:
//!   adjacent-period tests, witness constructions for fixed and moving
//!   states, and the joint-experiment builder that realizes any feasible
//!   profile of signal marginals.
//! - [`analytics`] applies the machinery: discrimination audits over labeled
//!   subsamples and counterfactual prediction of next-period action profiles.
//! - [`dataset`] and [`report`] carry the panel data and structured results;
//!   [`cli`] exposes everything as subcommands.
//!
//! All probabilities are exact rationals ([`rational::Rat`]); no verification
//! step uses tolerances.

pub mod analytics;
pub mod cli;
pub mod comonotone;
pub mod cycles;
pub mod dataset;
pub mod order;
pub mod permute;
pub mod rational;
pub mod report;
pub mod witness;

pub use dataset::{ChoiceDataset, SubsampleSelector};
pub use rational::Rat;
