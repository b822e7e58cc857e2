use crate::chain::AdditionChain;

use super::SearchError;

pub const ENUM_MAX_TARGET: u64 = 64;
pub const ENUM_MAX_LEN: usize = 12;

/// Streaming enumeration of ascending chains `1, 2, ..., target`.
///
/// Chains come out in increasing lexicographic order of their terms, each
/// term sequence exactly once.
pub struct Chains {
    target: u64,
    max_len: usize,
    star: bool,
    terms: Vec<u64>,
    // pending children per level, largest first so `pop` yields the smallest
    stack: Vec<Vec<u64>>,
}

/// Every star chain ending at `n_target` with length at most `max_len`.
pub fn enumerate_star_chains(n_target: u64, max_len: usize) -> Result<Chains, SearchError> {
    Chains::new(n_target, max_len, true)
}

/// Every ascending addition chain (star or not) ending at `n_target` with
/// length at most `max_len`.
pub fn enumerate_chains(n_target: u64, max_len: usize) -> Result<Chains, SearchError> {
    Chains::new(n_target, max_len, false)
}

impl Chains {
    fn new(target: u64, max_len: usize, star: bool) -> Result<Self, SearchError> {
        if target > ENUM_MAX_TARGET || max_len > ENUM_MAX_LEN {
            return Err(SearchError::BudgetExceeded(format!(
                "enumeration limited to target <= {ENUM_MAX_TARGET}, length <= {ENUM_MAX_LEN}"
            )));
        }
        let mut chains = Chains {
            target,
            max_len,
            star,
            terms: vec![1],
            stack: Vec::new(),
        };
        if target == 1 {
            // the one-term chain is handled by `next`
            chains.stack.push(vec![1]);
            chains.terms.clear();
        } else if target >= 2 && max_len >= 1 {
            chains.stack.push(vec![2]);
        }
        Ok(chains)
    }

    fn children(&self) -> Vec<u64> {
        let max = *self.terms.last().expect("nonempty");
        let rem_after = self.max_len - self.terms.len();
        let viable = |s: u64| s <= self.target && (s as u128) << rem_after.min(64) >= self.target as u128;
        let mut out: Vec<u64> = if self.star {
            self.terms.iter().map(|&b| max + b).filter(|&s| viable(s)).collect()
        } else {
            let mut v: Vec<u64> = self
                .terms
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| self.terms[..=i].iter().map(move |&b| a + b))
                .filter(|&s| s > max && viable(s))
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        out.sort_unstable_by(|x, y| y.cmp(x));
        out
    }
}

impl Iterator for Chains {
    type Item = AdditionChain;

    fn next(&mut self) -> Option<AdditionChain> {
        loop {
            let depth = self.stack.len();
            let top = self.stack.last_mut()?;
            let Some(c) = top.pop() else {
                self.stack.pop();
                continue;
            };
            // a child taken from level `depth` becomes term number `depth + 1`
            self.terms.truncate(depth);
            self.terms.push(c);
            if c == self.target {
                return Some(
                    AdditionChain::from_terms(self.terms.clone()).expect("enumerated chain is valid"),
                );
            }
            if self.terms.len() - 1 < self.max_len {
                let kids = self.children();
                self.stack.push(kids);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(it: Chains) -> Vec<Vec<u64>> {
        it.map(|c| c.terms().to_vec()).collect()
    }

    #[test]
    fn star_examples() {
        assert_eq!(terms(enumerate_star_chains(3, 2).unwrap()), vec![vec![1, 2, 3]]);
        assert_eq!(terms(enumerate_star_chains(4, 2).unwrap()), vec![vec![1, 2, 4]]);
        assert_eq!(
            terms(enumerate_star_chains(5, 3).unwrap()),
            vec![vec![1, 2, 3, 5], vec![1, 2, 4, 5]]
        );
    }

    #[test]
    fn degenerate_targets() {
        assert_eq!(terms(enumerate_star_chains(2, 1).unwrap()), vec![vec![1, 2]]);
        assert_eq!(terms(enumerate_star_chains(1, 0).unwrap()), vec![vec![1]]);
        assert!(terms(enumerate_star_chains(5, 2).unwrap()).is_empty());
        assert!(enumerate_star_chains(65, 3).is_err());
        assert!(enumerate_star_chains(10, 13).is_err());
    }

    #[test]
    fn all_star_chains_are_star_and_distinct() {
        let all = terms(enumerate_star_chains(20, 7).unwrap());
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all, "lexicographic and unique");
        for t in &all {
            assert!(AdditionChain::from_terms(t.clone()).unwrap().is_star());
        }
    }

    #[test]
    fn general_includes_non_star() {
        let all = terms(enumerate_chains(8, 4).unwrap());
        let star = terms(enumerate_star_chains(8, 4).unwrap());
        assert!(all.contains(&vec![1, 2, 4, 5, 8]));
        assert!(!star.contains(&vec![1, 2, 4, 5, 8]));
        assert!(star.iter().all(|t| all.contains(t)));
    }
}
