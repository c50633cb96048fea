//! Enumerative realization of weight-minimizing run-length-limited
//! ISI-mitigation (RLIM) codes.
//!
//! The crate is organized bottom-up:
//!
//! * [`enumeration`] builds the polynomial-size counting tables and answers
//!   every cardinality and length question for the `(i, ∞)`-RLL family.
//! * [`codec`] ranks, unranks, corrects and projection-decodes RLIM words
//!   using only those tables.
//! * [`oracle`] materializes codebooks explicitly. It backs the tests and the
//!   full-codebook baseline realization.
//! * [`lexrll`] is the lexicographic `(i, ∞)`-RLL baseline code.
//! * [`channel`] simulates a diffusion channel with a fully absorbing
//!   spherical receiver.
//! * [`harness`] runs the normalization, threshold training, BER and
//!   storage/runtime experiments.

pub mod channel;
pub mod codec;
pub mod config;
pub mod enumeration;
mod error;
pub mod harness;
pub mod lexrll;
pub mod oracle;
pub mod rng;
pub mod word;

pub use codec::{Decoded, ProjectionStep, RlimCodec};
pub use enumeration::{
    family_size, shortest_length, CodeParams, CountingTables, Mode, PrefixState,
};
pub use error::{Error, Result};
pub use word::BitWord;

/// Largest supported information dimension; message indices are `u128`.
pub const MAX_INFO_BITS: u32 = 126;
