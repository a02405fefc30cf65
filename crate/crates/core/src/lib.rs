//! Cheat-sensitive quantum bit commitment.
//!
//! Small dense quantum-information numerics ([`qmath`], [`state`]), both
//! parties' optimal attacks ([`attacks`]), the closed-form bounds and figure
//! grids ([`bounds`]), protocol descriptions with a seeded simulator
//! ([`protocol`]), and the command-line driver ([`cli`]).

pub mod attacks;
pub mod bounds;
pub mod cli;
pub mod protocol;
pub mod qmath;
pub mod state;
