pub mod cli;
pub mod config;
pub mod detector;
pub mod error;
pub mod eval;
pub mod features;
pub mod image;
pub mod numerics;

pub use config::{DetectorConfig, NfaKind, Variant};
pub use error::{DegenerateCode, Error, Result};
