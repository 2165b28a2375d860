//! Quantum coherence toolkit built around the G-coherence measure: states and
//! channels, the measure and its convex roof, classification of incoherent
//! operations and numerical verification of the factorization laws.

pub mod channels;
pub mod error;
pub mod harness;
pub mod io;
pub mod measures;
pub mod qstate;

pub use error::{Error, Result};
