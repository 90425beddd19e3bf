//! Tooling for GCD-learning experiments.
//!
//! The crate covers the whole loop around a sequence-to-sequence model that
//! learns greatest common divisors: base-B tokenization ([`numeral`]), exact
//! integer helpers ([`number_theory`]), deterministic training and test
//! distributions ([`sampling`]), a rule-based model of trained predictors
//! ([`oracle`]), recovery of those rules from prediction dumps
//! ([`analyzer`]) and the on-disk formats tying them together ([`dataio`]).

pub mod analyzer;
pub mod dataio;
pub mod error;
pub mod number_theory;
pub mod numeral;
pub mod oracle;
pub mod sampling;

pub use error::{Error, Result};
