//! Random finite models of idempotent linear Maltsev conditions.

pub mod algebra;
pub mod builtins;
pub mod census;
pub mod cli;
pub mod analysis;
pub mod asymptotics;
pub mod budget;
pub mod error;
pub mod factory;
pub mod kelly;
pub mod perm;
pub mod props;
pub mod syntax;

pub use budget::Budget;
pub use error::{Error, Result};
