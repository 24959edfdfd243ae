//! Cantor-type integer sequences C_{p,alpha} = FS({floor(p^n alpha)}).
//!
//! Exact construction of the generating sequence from base-p digits, a
//! packed-bitmap engine for subset sums and sumsets, arithmetic-progression
//! tooling, and verifiers that check the additive structure of these sets on
//! finite windows.

pub mod ap;
pub mod cantor;
pub mod digits;
pub mod error;
pub mod generator;
pub mod intset;
pub mod report;
pub mod theorems;

pub use error::{Error, Result};
