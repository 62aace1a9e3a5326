//! Reed-Muller, Polar and KO codes built on Plotkin trees.
//!
//! The crate covers the classical side (RM and Polar encoders, successive
//! cancellation, MAP and Soft-MAP decoders, FHT), the neural KO codes that
//! replace the Plotkin map and the recursive decoding rules by small
//! residual networks, their training loop, and the Monte-Carlo tooling used
//! to evaluate all of them over AWGN, fast-fading and bursty channels.

pub mod autodiff;
pub mod bits;
pub mod channel;
pub mod codes;
pub mod decoders;
pub mod error;
pub mod eval;
pub mod ko;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
