//! Secure-beamforming toolkit for IRS-aided directional-modulation links.

pub mod channel;
pub mod config;
pub mod error;
pub mod kernels;

pub use error::{Error, Result};
