//! Simulation laboratory for quantum reservoir autoencoder protocols.
//!
//! The crate provides a dense quantum state engine with CPTP reset channels
//! ([`state`]), the four-layer noise-modulated reservoir ([`reservoir`]), the
//! tanh encode/decode maps ([`codec`]), ridge and alternating-least-squares
//! solvers ([`solvers`]), the protocol family built on top of them
//! ([`protocols`]), paired significance tests ([`stats`]), and a deterministic
//! batch experiment harness with CSV output ([`harness`]).

pub mod codec;
pub mod error;
pub mod harness;
pub mod protocols;
pub mod reservoir;
pub mod solvers;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
