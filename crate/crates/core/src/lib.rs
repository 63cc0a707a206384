//! Exact Euler characteristics of moduli spaces of stable representations
//! of the Kronecker quiver `K(m)`, computed by degenerating to levelled
//! bipartite quivers and counting stable spanning trees.
//!
//! The pipeline: [`partitions`] enumerates weighted partition pairs and
//! their coefficients, [`quiver`] builds the levelled support quivers,
//! [`trees`] runs the spanning-tree census, and [`euler`] assembles the
//! polynomial in `m`. [`splitting`] refines localization data towards the
//! trivial partition and [`bounds`] evaluates the known upper bounds.

pub mod algebra;
pub mod bounds;
pub mod error;
pub mod euler;
pub mod partitions;
pub mod quiver;
pub mod splitting;
pub mod trees;
pub mod verify;

pub use algebra::RationalPolynomial;
pub use error::{Error, Result};
pub use euler::{chi_kronecker, chi_partition_pair, ChiResult, Engine};
pub use partitions::{PartitionPair, WeightedPartition};
pub use quiver::SupportQuiver;
pub use trees::LocalizationTree;
