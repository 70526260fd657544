//! Seeded simulations of quantum-security primitives: B92 key distribution
//! (plain and pulse-position modulated), a collective-rotation noise channel
//! with eavesdroppers, Grover search with a Simplified-AES key-recovery attack,
//! and Shor factoring with simulated period finding.
//!
//! Interchangeable algorithms (eavesdroppers, Grover backends, period finders)
//! sit behind traits and are looked up by name through [`registry`].

pub mod b92;
pub mod error;
pub mod grover;
pub mod noisechan;
pub mod ppm;
pub mod qsim;
pub mod registry;
pub mod rng;
pub mod saes;
pub mod shor;

pub use error::{Error, Result};
pub use rng::{RngStream, Seed};

/// Crate version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
