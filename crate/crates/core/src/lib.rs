//! Exact zero-sum computations over finite abelian groups.
//!
//! The engine enumerates minimal zero-sum sequences (atoms) over supports,
//! computes Davenport constants by pruned exhaustive search, decides the
//! separating-atom condition by exact integer-lattice membership, and
//! evaluates the separating Noether number β_sep(G) at desk scale, together
//! with the closed-form bounds it is checked against.

pub mod atoms;
mod bits;
pub mod error;
pub mod formulas;
pub mod group;
pub mod lattice;
pub mod report;
pub mod separating;
pub mod seq;

pub use error::{Error, Result};
pub use group::{Group, GroupElement};
pub use seq::{Support, ZSequence};

/// Version string baked into cached results so that algorithm changes
/// invalidate old cache entries.
pub const ENGINE_VERSION: &str = concat!("betasep/", env!("CARGO_PKG_VERSION"));

/// Resource caps guarding the desk-scale contracts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Maximal group order for element enumeration and brute-force search.
    pub max_elements: usize,
    /// Maximal sequence length accepted by subsequence-sum queries.
    pub max_sequence_len: u64,
    /// DFS node budget per enumeration call.
    pub node_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_elements: 4096, max_sequence_len: 64, node_budget: 100_000_000 }
    }
}
