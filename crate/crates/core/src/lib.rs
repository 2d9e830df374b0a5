//! Simulation of two-party quantum protocols and analysis of how much each
//! party's input leaks through the exchanged messages.

pub mod bits;
pub mod error;
pub mod linalg;
pub mod protocol;

pub use error::{Error, Result};
pub mod ip;
pub mod privacy;
pub mod pir;
