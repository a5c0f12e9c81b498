//! Persistence, experiment harness and command-line plumbing around
//! [`spcp_core`].

mod error;
pub mod experiments;
pub mod formats;

pub use error::{Error, Result};
