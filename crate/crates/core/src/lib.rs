//! Exact Kronecker coefficients of the symmetric group and the b-loading
//! decision rules built on top of them.
//!
//! The crate is organised bottom-up:
//!
//! - [`partitions`]: enumeration and ordering of integer partitions.
//! - [`characters`]: exact character tables via Murnaghan–Nakayama.
//! - [`kronecker`]: Kronecker coefficients and the symmetry-reduced tensor.
//! - [`bloading`]: difference matrix, Perron vector, b-loadings and `b★`.
//! - [`classify`]: decision functions, fitting and evaluation on `(b, label)` data.
//! - [`pipeline`]: caching, dataset export, histograms and the CLI.

pub mod bloading;
pub mod characters;
pub mod classify;
pub mod error;
pub mod kronecker;
pub mod partitions;
pub mod pipeline;

pub use bloading::{BLoadingTable, DifferenceMatrix};
pub use characters::CharacterTable;
pub use error::{Error, Result};
pub use kronecker::KroneckerTensor;
pub use partitions::{Partition, PartitionSet};
