//! Commitment protocol descriptions, closed-form analysis, and the seeded
//! commit/hold/unveil simulator.

mod analysis;
mod sim;
mod spec;

use thiserror::Error;

use crate::attacks::AttackError;
use crate::bounds::BoundsError;
use crate::state::StateError;

pub use analysis::{analyze, predicted_pass_rate, AnalysisReport};
pub use sim::{
    monte_carlo, monte_carlo_with, run_once, trial_rng, BobVerification, CheckBranch,
    MonteCarloStats, RunTranscript, SimConfig, Simulator, Strategy,
};
pub use spec::{builtin_protocol, load_protocol, ProtocolSpec, BUILTIN_PROTOCOLS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid protocol at {path}: {message}")]
    Validation { path: String, message: String },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}
