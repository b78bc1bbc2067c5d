//! Incentive-compatible approximation mechanisms for multi-unit auctions with
//! single-crossing bidders, with exact brute-force checkers.

pub mod cli;
pub mod domain;
pub mod error;
pub mod mechanism;
pub mod rational;
pub mod rounding;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
