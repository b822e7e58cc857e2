//! Exact shortest addition chains.
//!
//! [`shortest_chain`] runs iterative deepening from the lower bound up to the
//! binary-method length. [`bfs_oracle`] is an independent breadth-first
//! enumeration used to check it.

mod bfs;
mod bounds;
mod dfs;
mod enumerate;

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::chain::AdditionChain;
use dfs::{find_chain, Limits, Mode, Shared};

pub use bfs::{bfs_oracle, BFS_MAX_TARGET};
pub use bounds::{binary_length, binary_upper_bound, lower_bound};
pub use enumerate::{enumerate_chains, enumerate_star_chains, Chains, ENUM_MAX_LEN, ENUM_MAX_TARGET};

/// Largest target accepted by [`shortest_chain`].
pub const MAX_TARGET: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("target {0} outside the supported range 3..=2^32")]
    TargetOutOfRange(u64),
    #[error("search budget exhausted for n={target}: shortest length lies in {lower}..={upper}")]
    Timeout {
        target: u64,
        lower: u32,
        upper: u32,
        nodes_expanded: u64,
    },
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
}

/// Wall-clock and node-count limits. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_time: Option<Duration>,
    pub max_nodes: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn time(limit: Duration) -> Self {
        Budget {
            max_time: Some(limit),
            max_nodes: None,
        }
    }

    pub fn nodes(limit: u64) -> Self {
        Budget {
            max_time: None,
            max_nodes: Some(limit),
        }
    }

    fn limits(&self, start: Instant) -> Limits {
        Limits {
            max_nodes: self.max_nodes,
            deadline: self.max_time.map(|d| start + d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub star_only: bool,
    pub budget: Budget,
    /// Start deepening at [`lower_bound`] instead of 1.
    pub use_lower_bound: bool,
    /// Worker threads for the top levels of each depth; 1 is sequential.
    pub jobs: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            star_only: false,
            budget: Budget::unlimited(),
            use_lower_bound: true,
            jobs: 1,
        }
    }
}

impl SearchConfig {
    pub fn star_only(mut self, yes: bool) -> Self {
        self.star_only = yes;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    pub fn without_lower_bound(mut self) -> Self {
        self.use_lower_bound = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub target: u64,
    /// Shortest length over the searched class (star chains when
    /// `star_only`, all chains otherwise).
    pub shortest_length: u32,
    pub witness: AdditionChain,
    pub star_only: bool,
    pub star_shortest_length: u32,
    pub star_witness: AdditionChain,
    pub nodes_expanded: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

fn witness(terms: Vec<u64>) -> AdditionChain {
    AdditionChain::from_terms(terms).expect("search emits valid chains")
}

/// Iterative deepening over lengths `start..=upper`. The binary chain bounds
/// the depth, so a search that is not aborted always succeeds.
fn deepen(
    n: u64,
    mode: Mode,
    start: u32,
    limits: &Limits,
    shared: &Shared,
    jobs: usize,
) -> Result<Vec<u64>, u32> {
    let upper = binary_length(n);
    for depth in start..=upper {
        match find_chain(n, depth, mode, limits, shared, jobs) {
            Ok(Some(c)) => return Ok(c),
            Ok(None) => {}
            Err(_) => return Err(depth),
        }
    }
    unreachable!("the binary chain has length {upper}")
}

/// Exact shortest chain for `3 <= n <= 2^32`.
///
/// With `star_only` false this also computes the shortest star chain,
/// starting from the general optimum.
pub fn shortest_chain(n: u64, config: &SearchConfig) -> Result<SearchResult, SearchError> {
    if !(3..=MAX_TARGET).contains(&n) {
        return Err(SearchError::TargetOutOfRange(n));
    }
    let start = Instant::now();
    let limits = config.budget.limits(start);
    let shared = Shared::default();
    let upper = binary_length(n);
    let first = if config.use_lower_bound {
        lower_bound(n).max(1)
    } else {
        1
    };
    let timeout = |lower: u32| SearchError::Timeout {
        target: n,
        lower,
        upper,
        nodes_expanded: shared.nodes(),
    };

    let primary = if config.star_only { Mode::Star } else { Mode::General };
    let best = deepen(n, primary, first, &limits, &shared, config.jobs).map_err(timeout)?;
    let best = witness(best);
    let length = best.length() as u32;

    let star = if config.star_only {
        best.clone()
    } else {
        let s = deepen(n, Mode::Star, length, &limits, &shared, config.jobs)
            .map_err(|_| timeout(length))?;
        witness(s)
    };

    Ok(SearchResult {
        target: n,
        shortest_length: length,
        star_shortest_length: star.length() as u32,
        witness: best,
        star_only: config.star_only,
        star_witness: star,
        nodes_expanded: shared.nodes(),
        wall_time: start.elapsed(),
    })
}

/// A star chain of exactly `length` steps ending at `n` whose regulators
/// `r_j` (the term added to `s_{j-1}`) are all at least `min_regulator` for
/// `j >= 3`, if one exists. The first one in largest-child-first order is
/// returned.
pub fn star_chain_with_min_regulator(
    n: u64,
    length: u32,
    min_regulator: u64,
    budget: Budget,
) -> Result<Option<AdditionChain>, SearchError> {
    if !(3..=MAX_TARGET).contains(&n) {
        return Err(SearchError::TargetOutOfRange(n));
    }
    if length == 0 {
        return Ok(None);
    }
    let limits = budget.limits(Instant::now());
    let shared = Shared::default();
    match find_chain(n, length, Mode::StarMinRegulator(min_regulator), &limits, &shared, 1) {
        Ok(found) => Ok(found.map(witness)),
        Err(_) => Err(SearchError::Timeout {
            target: n,
            lower: length,
            upper: length,
            nodes_expanded: shared.nodes(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::validate_chain;

    fn solve(n: u64) -> SearchResult {
        shortest_chain(n, &SearchConfig::default()).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(solve(5).shortest_length, 3);
        assert_eq!(solve(7).shortest_length, 4);
        let r = solve(15);
        assert_eq!(r.shortest_length, 5);
        assert_eq!(r.witness.target(), 15);
        let again = validate_chain(r.witness.terms().to_vec(), r.witness.indexed_steps()).unwrap();
        assert_eq!(again, r.witness);
    }

    #[test]
    fn witness_is_lexicographically_greatest() {
        // shortest chains for 7: 1,2,3,4,7 / 1,2,3,5,7 / 1,2,3,6,7 / 1,2,4,5,7 / 1,2,4,6,7
        assert_eq!(solve(7).witness.terms(), &[1, 2, 4, 6, 7]);
    }

    #[test]
    fn star_only_mode() {
        let r = shortest_chain(15, &SearchConfig::default().star_only(true)).unwrap();
        assert!(r.star_only);
        assert_eq!(r.shortest_length, 5);
        assert!(r.witness.is_star());
        assert_eq!(r.witness, r.star_witness);
    }

    #[test]
    fn out_of_range() {
        assert_eq!(
            shortest_chain(2, &SearchConfig::default()),
            Err(SearchError::TargetOutOfRange(2))
        );
        assert!(shortest_chain(MAX_TARGET + 1, &SearchConfig::default()).is_err());
    }

    #[test]
    fn budget_reports_bounds_only() {
        let cfg = SearchConfig::default().with_budget(Budget::nodes(1));
        match shortest_chain(4095, &cfg) {
            Err(SearchError::Timeout { lower, upper, .. }) => {
                assert_eq!(lower, lower_bound(4095));
                assert_eq!(upper, binary_length(4095));
            }
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn min_regulator_search() {
        let c = star_chain_with_min_regulator(8, 3, 2, Budget::unlimited()).unwrap().unwrap();
        assert_eq!(c.terms(), &[1, 2, 4, 8]);
        assert_eq!(star_chain_with_min_regulator(7, 4, 2, Budget::unlimited()).unwrap(), None);
    }
}
