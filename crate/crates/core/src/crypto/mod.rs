//! Symmetric toy primitives, their boolean-circuit compilations, and an
//! honest-verifier zero-knowledge proof system for circuit satisfiability.

pub mod cipher;
pub mod circuit;
pub mod commit;
pub mod enc;
pub mod zk;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CryptoError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("encryption index {0} already used in this session")]
    IndexReuse(u64),
    #[error("witness length mismatch: circuit expects {expected}, got {got}")]
    WitnessLength { expected: usize, got: usize },
}
