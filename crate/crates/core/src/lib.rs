//! Deterministic spacetime protocol simulation and position cryptography.
//!
//! The crate stacks up as follows: exact rational geometry and fixed-point
//! timing ([`fixed`], [`geometry`]) feed a deterministic discrete-event
//! signal simulator ([`sim`]) with a small state-vector quantum backend
//! ([`qsim`]). On top sit the singleton position-verification protocol
//! ([`pv`]), encrypt-then-verify position commitments ([`pc`]), the
//! tick-driven optimized variant ([`pc_opt`]), and zero-knowledge position
//! verification ([`zkpv`]) built from the toy cryptography in [`crypto`].
//! The adversary harness lives in [`attacks`]; [`acceptance`] packages the
//! empirical acceptance experiments used by the test suite and the CLI.

pub mod acceptance;
pub mod attacks;
pub mod crypto;
pub mod fixed;
pub mod geometry;
pub mod pc;
pub mod pc_opt;
pub mod pv;
pub mod qsim;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod svg;
pub mod zkpv;

pub use fixed::Fix;
pub use geometry::{Rat, SpacetimePoint, SpatialPoint, TravelTime};
