//! Permutations and integer sets that avoid arithmetic progressions as
//! subsequences.
//!
//! * [`apcore`]: sequences, progression detection, symmetries, the doubling
//!   construction.
//! * [`counting`]: exhaustive counts of AP-free permutations of `{1..n}`,
//!   with a factorial oracle and a JSON result cache.
//! * [`infinite`]: block-built infinite sequences and streaming finders.
//! * [`density`]: counting functions and densities of the block sets.
//! * [`bounds`]: exact checks of the known inequalities on `M(n)`.

pub mod apcore;
pub mod bounds;
pub mod counting;
pub mod density;
pub mod error;
pub mod infinite;

pub use apcore::{ApConstraint, ApWitness, Parity, Seq};
pub use error::{ApError, Result};
