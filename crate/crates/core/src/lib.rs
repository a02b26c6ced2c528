//! Permutation codes under the Ulam metric.

pub mod ball;
pub mod bounds;
pub mod budget;
pub mod error;
pub mod ip;
pub mod lp;
pub mod perm;
pub mod report;
pub mod search;

pub use bounds::CodeParams;
pub use budget::Budget;
pub use error::{Error, Result};
pub use report::{bound_report, BoundOptions, BoundReport};
pub use perm::{Permutation, Translocation, TranslocationKind};
