//! Caputo fractional calculus on generalized power series, Mittag-Leffler
//! functions, and exact/numeric checks of when a multi-term linear FDE may be
//! split into a chain of lower-order equations.

pub mod cli;
pub mod exec;
pub mod gpseries;
pub mod mlf;
pub mod rational;
pub mod sdomain;
pub mod solver;
pub mod splitter;

pub use exec::Execution;
pub use rational::{Exp, Q};
