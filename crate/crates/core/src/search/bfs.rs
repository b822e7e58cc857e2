use std::collections::BTreeMap;

use super::SearchError;

/// Largest `n_max` the oracle accepts.
pub const BFS_MAX_TARGET: u64 = 4096;

const MAX_LEVEL_STATES: usize = 50_000_000;

/// Shortest chain lengths for every `2 <= n <= n_max`, by breadth-first
/// enumeration of ascending chains whose terms stay `<= n_max`.
///
/// States are term sets; two steps of a state that produce the same sum
/// produce the same child set and are merged. Nothing else is pruned.
pub fn bfs_oracle(n_max: u64) -> Result<BTreeMap<u64, u32>, SearchError> {
    if n_max > BFS_MAX_TARGET {
        return Err(SearchError::BudgetExceeded(format!(
            "bfs oracle n_max {n_max} exceeds {BFS_MAX_TARGET}"
        )));
    }
    let mut best: BTreeMap<u64, u32> = BTreeMap::new();
    if n_max < 2 {
        return Ok(best);
    }
    let bound = n_max as u16;
    let mut remaining = (n_max - 1) as usize;
    let mut seen = vec![false; n_max as usize + 1];
    seen[1] = true;

    // flat storage, `width` terms per state
    let mut level: Vec<u16> = vec![1];
    let mut width = 1usize;
    let mut depth = 0u32;
    let mut sums: Vec<u16> = Vec::new();
    while remaining > 0 {
        depth += 1;
        let mut next: Vec<u16> = Vec::new();
        for state in level.chunks_exact(width) {
            let max = state[width - 1];
            sums.clear();
            for (i, &a) in state.iter().enumerate() {
                for &b in &state[..=i] {
                    let s = a + b;
                    if s > max && s <= bound {
                        sums.push(s);
                    }
                }
            }
            sums.sort_unstable();
            sums.dedup();
            for &s in &sums {
                if !seen[s as usize] {
                    seen[s as usize] = true;
                    best.insert(s as u64, depth);
                    remaining -= 1;
                }
                next.extend_from_slice(state);
                next.push(s);
            }
            if next.len() / (width + 1) > MAX_LEVEL_STATES {
                return Err(SearchError::BudgetExceeded(format!(
                    "bfs level {depth} exceeds {MAX_LEVEL_STATES} states"
                )));
            }
        }
        level = next;
        width += 1;
    }
    Ok(best)
}
