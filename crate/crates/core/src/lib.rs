//! Remote monitoring of two-state Markov sources over a slotted ALOHA
//! collision channel.
//!
//! The receiver's uncertainty about a reference source is evaluated three
//! ways: slot-level Monte Carlo ([`sim`]), quantized density evolution of the
//! APP log-ratio ([`density`]) and closed forms ([`analytic`], [`policy`]).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod density;
pub mod error;
pub mod estimators;
pub mod observation;
pub mod policy;
pub mod sim;
pub mod source;

pub use error::{Error, Result};
pub use observation::Observation;
pub use policy::{Strategy, SystemConfig};
pub use source::{Bit, SourceParams};
