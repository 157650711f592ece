//! Verification and supervisory enforcement of fault prognosability and diagnosability
//! for discrete-event systems modelled as deterministic finite automata.

pub mod automata;
pub mod error;
pub mod fault;
pub mod lang;
pub mod modular;
pub mod synth;
pub mod verify;

#[cfg(feature = "testkit")]
pub mod fixtures;
#[cfg(feature = "testkit")]
pub mod oracle;

pub use error::{Error, Result};
