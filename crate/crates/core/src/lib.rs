//! Expanding-window random linear network coding over GF(2^8), its analytic
//! decoding-probability model, and MCS / TB allocation for layered video
//! multicast in single-cell and SFN eMBMS deployments.

#![allow(clippy::needless_range_loop)]

pub mod allocators;
pub mod channel;
pub mod decode_prob;
pub mod error;
pub mod experiments;
pub mod gf256;
pub mod layers;
pub mod rlnc;
pub mod scenario;

pub use allocators::{AllocationProblem, AllocationSolution, FeasibilityReport, SolverKind};
pub use decode_prob::{DecodeProbability, DeficitRule, Provenance};
pub use error::{Error, Result};
pub use experiments::{ExperimentResult, SolverChoice};
pub use gf256::Gf256;
pub use layers::{LayerConfig, TransmissionPlan};
pub use scenario::Scenario;
