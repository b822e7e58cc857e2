//! Addition chains under the generator decomposition `s_j = a_j + r_j`.
//!
//! - [`chain`]: validated chains, star detection, decomposition into
//!   determiners and regulators, and the record format.
//! - [`identity`]: exact evaluation of the telescoping and partial-summation
//!   identities for one star chain.
//! - [`search`]: exact shortest chains by iterative deepening, a
//!   breadth-first oracle, and exhaustive enumeration of small chains.
//! - [`cache`]: the on-disk length cache.
//! - [`scholz`]: Scholz conjecture sweeps and length bounds.
//! - [`schedule`]: straight-line exponentiation from a chain.

pub mod cache;
pub mod chain;
pub mod identity;
pub mod schedule;
pub mod scholz;
pub mod search;

pub use chain::{decompose, recompose, truncate, validate_chain, AdditionChain, ChainError, GeneratorSeq, Step};
pub use identity::{evaluate_all, IdentityReport};
pub use search::{shortest_chain, Budget, SearchConfig, SearchError, SearchResult};
