//! Strategic multi-winner approval voting.
//!
//! Voters rank candidates and extend those rankings to committees through
//! ordered weighted averaging (OWA) of candidate utilities. Ballots are
//! approval sets, winners are chosen by a best-`k` rule with a fixed
//! priority tie-break, and the crate analyses best responses, ballot-length
//! restrictions and pure Nash equilibria of the resulting game.

pub mod equilibrium;
pub mod error;
pub mod harness;
pub mod model;
pub mod rules;
pub mod strategy;

pub use error::{Error, Result};
pub use model::{
    Ballot, CandidateId, CandidateSet, Committee, ElectionInstance, PriorityOrder, Rational, VoterProfile,
};
pub use rules::{ApprovalRule, BallotProfile, RuleKind, RuleSpec};
