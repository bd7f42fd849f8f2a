//! One-shot Marton coding for classical and classical-quantum broadcast channels.
//!
//! The crate computes smooth one-shot divergences, builds rejection-sampled
//! Marton codebooks, runs the encoders and decoders, and compares simulated
//! error rates against the closed-form achievability bounds.

pub mod analysis;
pub mod channel;
pub mod coding;
pub mod divergence;
pub mod error;
pub mod parallel;
pub mod prob;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
pub use parallel::Execution;
pub use prob::{JointPmf, Pmf};
pub use rng::SeededRng;
