//! Query-limited mechanisms for matching problems and single-winner social
//! choice, with exact optimizers and adversarial instance tooling.
//!
//! Mechanisms see only an ordinal profile and may issue at most two value
//! queries per agent; the optimizers, generators and the completion engine
//! measure how far their outputs can fall from the optimum.

pub mod adversary;
pub mod error;
pub mod instance;
pub mod mechanisms;
pub mod ordinal;
pub mod solvers;
pub mod sra;

pub use error::{Error, ParseError, Result};
pub use instance::{
    alternative_welfare, check_feasible, read_instance, total_weight, write_instance, Edge, FamilySpec,
    Instance, ProblemKind, Query, QueryTranscript, SideSplit, Sides, Subgraph, ValuationProfile,
};
pub use ordinal::{check_consistency, derive_ordinal, OrdinalProfile, Strictness};
pub use mechanisms::{
    decompose_welfare, general_two_queries, match_two_queries, sc_two_queries, top_two_baseline, MechanismKind,
    MechanismOutput, MechanismRun, MechanismView, ScOutcome, WelfareDecomposition,
};
