//! Addition chains and their generator decomposition.
//!
//! Indices are 1-based throughout the public API: `s_1 = 1`, `s_2 = 2`, and
//! generator indices start at 2. A chain with `L` terms has length `L - 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("empty term sequence")]
    Empty,
    #[error("chain must open with 1, 2")]
    BadPrefix,
    #[error("terms are not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("term {index} is not the sum of its recorded addends")]
    NotAChain { index: usize },
    #[error("arithmetic overflow at index {index}")]
    Overflow { index: usize },
    #[error("step {index} does not use the preceding term; no generator decomposition exists")]
    NotStarChain { index: usize },
    #[error("regulator r_{index} = {value} is not an earlier chain term")]
    RegulatorNotInChain { index: usize, value: u64 },
    #[error("invalid generator sequence: {0}")]
    InvalidGenerators(&'static str),
    #[error("cannot drop {drop} terms from a chain of length {length}")]
    DropTooLarge { drop: usize, length: usize },
    #[error("malformed chain record: {0}")]
    Parse(String),
}

/// The addend pair of one chain step, as 1-based term indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub left: usize,
    pub right: usize,
}

impl Step {
    pub fn new(left: usize, right: usize) -> Self {
        Step { left, right }
    }

    fn uses(&self, index: usize) -> bool {
        self.left == index || self.right == index
    }
}

/// A validated addition chain `1, 2, ..., n` with per-step addend provenance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ChainRepr", into = "ChainRepr")]
pub struct AdditionChain {
    terms: Vec<u64>,
    // steps[k] belongs to term index k + 2
    steps: Vec<Step>,
}

/// Validate `terms` against explicit addend pairs keyed by 1-based term index.
///
/// The entry for index 2 may be omitted (it is always `1 + 1`). Every index
/// `j >= 3` needs an entry.
pub fn validate_chain<I>(terms: Vec<u64>, steps: I) -> Result<AdditionChain, ChainError>
where
    I: IntoIterator<Item = (usize, Step)>,
{
    check_terms(&terms)?;
    let len = terms.len();
    let mut slots: Vec<Option<Step>> = vec![None; len + 1];
    if len >= 2 {
        slots[2] = Some(Step::new(1, 1));
    }
    for (index, step) in steps {
        if index < 2 || index > len {
            return Err(ChainError::NotAChain { index });
        }
        slots[index] = Some(step);
    }
    let mut out = Vec::with_capacity(len.saturating_sub(1));
    for (index, slot) in slots.iter().enumerate().skip(2) {
        let step = slot.ok_or(ChainError::NotAChain { index })?;
        check_step(&terms, index, step)?;
        out.push(step);
    }
    Ok(AdditionChain { terms, steps: out })
}

fn check_terms(terms: &[u64]) -> Result<(), ChainError> {
    match terms {
        [] => return Err(ChainError::Empty),
        [1] => {}
        [1, 2, ..] => {}
        _ => return Err(ChainError::BadPrefix),
    }
    for (k, pair) in terms.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(ChainError::NotIncreasing { index: k + 2 });
        }
    }
    Ok(())
}

fn check_step(terms: &[u64], index: usize, step: Step) -> Result<(), ChainError> {
    let valid = |i: usize| i >= 1 && i < index;
    if !valid(step.left) || !valid(step.right) {
        return Err(ChainError::NotAChain { index });
    }
    let sum = terms[step.left - 1]
        .checked_add(terms[step.right - 1])
        .ok_or(ChainError::Overflow { index })?;
    if sum != terms[index - 1] {
        return Err(ChainError::NotAChain { index });
    }
    Ok(())
}

impl AdditionChain {
    /// Build a chain from its terms alone, inferring addends.
    ///
    /// For each term the addend pair with the largest possible left index is
    /// chosen, so any sequence that admits star steps gets them.
    pub fn from_terms(terms: Vec<u64>) -> Result<Self, ChainError> {
        check_terms(&terms)?;
        let mut steps = Vec::with_capacity(terms.len().saturating_sub(1));
        for index in 2..=terms.len() {
            let target = terms[index - 1];
            let mut found = None;
            for left in (1..index).rev() {
                let a = terms[left - 1];
                if a.checked_mul(2).is_some_and(|d| d < target) {
                    break;
                }
                if let Ok(pos) = terms[..left].binary_search(&(target - a)) {
                    found = Some(Step::new(left, pos + 1));
                    break;
                }
            }
            steps.push(found.ok_or(ChainError::NotAChain { index })?);
        }
        Ok(AdditionChain { terms, steps })
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Number of terms minus one.
    pub fn length(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn target(&self) -> u64 {
        *self.terms.last().expect("validated chains are nonempty")
    }

    /// Term `s_j`, 1-based.
    pub fn term(&self, j: usize) -> u64 {
        self.terms[j - 1]
    }

    /// Addend pair of term `j >= 2`.
    pub fn step(&self, j: usize) -> Step {
        self.steps[j - 2]
    }

    /// True iff every step `j >= 3` has `s_{j-1}` as one of its addends.
    pub fn is_star(&self) -> bool {
        (3..=self.terms.len()).all(|j| self.step(j).uses(j - 1))
    }

    /// Steps as `(index, step)` pairs, suitable for [`validate_chain`].
    pub fn indexed_steps(&self) -> impl Iterator<Item = (usize, Step)> + '_ {
        self.steps.iter().enumerate().map(|(k, s)| (k + 2, *s))
    }

    /// The comma-separated term list used by the cache and on standard input.
    pub fn terms_csv(&self) -> String {
        join(&self.terms, ",")
    }
}

pub fn is_star_chain(chain: &AdditionChain) -> bool {
    chain.is_star()
}

fn join(values: &[u64], sep: &str) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(sep)
}

/// `n=<target>; terms=<comma list>; steps=<j:p+q;...>`
impl fmt::Display for AdditionChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}; terms={}; steps=", self.target(), self.terms_csv())?;
        for (k, (index, step)) in self.indexed_steps().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}:{}+{}", index, step.left, step.right)?;
        }
        Ok(())
    }
}

fn parse_u64(s: &str) -> Result<u64, ChainError> {
    let s = s.trim();
    s.parse::<u64>().map_err(|e| match e.kind() {
        std::num::IntErrorKind::PosOverflow => ChainError::Overflow { index: 0 },
        _ => ChainError::Parse(format!("bad integer {s:?}")),
    })
}

fn parse_terms(s: &str) -> Result<Vec<u64>, ChainError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_u64)
        .collect()
}

fn parse_step(s: &str) -> Result<(usize, Step), ChainError> {
    let bad = || ChainError::Parse(format!("bad step {s:?}"));
    let (index, pair) = s.split_once(':').ok_or_else(bad)?;
    let (left, right) = pair.split_once('+').ok_or_else(bad)?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    Ok((num(index)?, Step::new(num(left)?, num(right)?)))
}

/// Parses either a full record line or a bare comma-separated term list.
///
/// A bare list (or a record without `steps=`) gets inferred addends.
impl FromStr for AdditionChain {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if !s.contains('=') {
            return AdditionChain::from_terms(parse_terms(s)?);
        }
        let mut target = None;
        let mut terms = None;
        let mut steps: Option<Vec<(usize, Step)>> = None;
        let mut in_steps = false;
        for piece in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some(v) = piece.strip_prefix("n=") {
                target = Some(parse_u64(v)?);
                in_steps = false;
            } else if let Some(v) = piece.strip_prefix("terms=") {
                terms = Some(parse_terms(v)?);
                in_steps = false;
            } else if let Some(v) = piece.strip_prefix("steps=") {
                let mut list = Vec::new();
                if !v.trim().is_empty() {
                    list.push(parse_step(v)?);
                }
                steps = Some(list);
                in_steps = true;
            } else if in_steps {
                steps.as_mut().expect("in steps").push(parse_step(piece)?);
            } else {
                return Err(ChainError::Parse(format!("unexpected field {piece:?}")));
            }
        }
        let terms = terms.ok_or_else(|| ChainError::Parse("missing terms=".into()))?;
        let chain = match steps {
            Some(steps) => validate_chain(terms, steps)?,
            None => AdditionChain::from_terms(terms)?,
        };
        if let Some(n) = target {
            if n != chain.target() {
                return Err(ChainError::Parse(format!(
                    "n={n} does not match last term {}",
                    chain.target()
                )));
            }
        }
        Ok(chain)
    }
}

#[derive(Serialize, Deserialize)]
struct IndexedStep {
    index: usize,
    left: usize,
    right: usize,
}

#[derive(Serialize, Deserialize)]
struct ChainRepr {
    target: u64,
    terms: Vec<u64>,
    steps: Vec<IndexedStep>,
}

impl From<AdditionChain> for ChainRepr {
    fn from(c: AdditionChain) -> Self {
        let steps = c
            .indexed_steps()
            .map(|(index, s)| IndexedStep {
                index,
                left: s.left,
                right: s.right,
            })
            .collect();
        ChainRepr {
            target: c.target(),
            terms: c.terms,
            steps,
        }
    }
}

impl TryFrom<ChainRepr> for AdditionChain {
    type Error = ChainError;

    fn try_from(r: ChainRepr) -> Result<Self, Self::Error> {
        let chain = validate_chain(
            r.terms,
            r.steps
                .into_iter()
                .map(|s| (s.index, Step::new(s.left, s.right))),
        )?;
        if chain.target() != r.target {
            return Err(ChainError::Parse("target does not match last term".into()));
        }
        Ok(chain)
    }
}

/// Paired determiners `a_j` and regulators `r_j`, `j = 2..=L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorSeq {
    determiners: Vec<u64>,
    regulators: Vec<u64>,
}

impl GeneratorSeq {
    /// Checks the structural invariants: equal lengths, `a_2 = r_2 = 1`,
    /// and `a_{i+1} = a_i + r_i`. Regulator membership is checked by
    /// [`recompose`].
    pub fn new(determiners: Vec<u64>, regulators: Vec<u64>) -> Result<Self, ChainError> {
        if determiners.len() != regulators.len() {
            return Err(ChainError::InvalidGenerators("length mismatch"));
        }
        if determiners.first() != Some(&1) || regulators.first() != Some(&1) {
            return Err(ChainError::InvalidGenerators("a_2 and r_2 must both be 1"));
        }
        for i in 1..determiners.len() {
            let next = determiners[i - 1]
                .checked_add(regulators[i - 1])
                .ok_or(ChainError::Overflow { index: i + 2 })?;
            if determiners[i] != next {
                return Err(ChainError::InvalidGenerators("a_{i+1} != a_i + r_i"));
            }
        }
        for (i, (a, r)) in determiners.iter().zip(&regulators).enumerate() {
            a.checked_add(*r).ok_or(ChainError::Overflow { index: i + 2 })?;
        }
        Ok(GeneratorSeq {
            determiners,
            regulators,
        })
    }

    /// `a_j` for `2 <= j <= L`.
    pub fn a(&self, j: usize) -> u64 {
        self.determiners[j - 2]
    }

    /// `r_j` for `2 <= j <= L`.
    pub fn r(&self, j: usize) -> u64 {
        self.regulators[j - 2]
    }

    /// `s_j = a_j + r_j` for `j >= 2`, and `s_1 = 1`.
    pub fn s(&self, j: usize) -> u64 {
        if j == 1 {
            1
        } else {
            self.a(j) + self.r(j)
        }
    }

    pub fn determiners(&self) -> &[u64] {
        &self.determiners
    }

    pub fn regulators(&self) -> &[u64] {
        &self.regulators
    }

    /// Chain length `δ = L - 1`, which is also the number of generators.
    pub fn length(&self) -> usize {
        self.regulators.len()
    }

    /// Index of the last generator, `L = δ + 1`.
    pub fn last_index(&self) -> usize {
        self.length() + 1
    }

    pub fn target(&self) -> u64 {
        self.s(self.last_index())
    }
}

/// Split each term into determiner and regulator: `a_j = s_{j-1}`,
/// `r_j = s_j - s_{j-1}` for `j >= 3`.
pub fn decompose(chain: &AdditionChain) -> Result<GeneratorSeq, ChainError> {
    if chain.terms.len() < 2 {
        return Err(ChainError::InvalidGenerators("chain has no generators"));
    }
    if let Some(j) = (3..=chain.terms.len()).find(|&j| !chain.step(j).uses(j - 1)) {
        return Err(ChainError::NotStarChain { index: j });
    }
    let mut determiners = vec![1];
    let mut regulators = vec![1];
    for j in 3..=chain.terms.len() {
        determiners.push(chain.term(j - 1));
        regulators.push(chain.term(j) - chain.term(j - 1));
    }
    Ok(GeneratorSeq {
        determiners,
        regulators,
    })
}

/// Inverse of [`decompose`]: rebuilds the star chain, with each step
/// recorded as `(j-1) + index_of(r_j)`.
pub fn recompose(gens: &GeneratorSeq) -> Result<AdditionChain, ChainError> {
    let mut terms = vec![1u64];
    let mut steps = Vec::with_capacity(gens.length());
    for j in 2..=gens.last_index() {
        let r = gens.r(j);
        let pos = terms
            .binary_search(&r)
            .map_err(|_| ChainError::RegulatorNotInChain { index: j, value: r })?;
        let s = gens
            .a(j)
            .checked_add(r)
            .ok_or(ChainError::Overflow { index: j })?;
        terms.push(s);
        steps.push((j, Step::new(j - 1, pos + 1)));
    }
    validate_chain(terms, steps)
}

/// A chain with a prefix of terms dropped; kept terms retain their base
/// indices and step provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedChain {
    base: AdditionChain,
    kept_indices: Vec<usize>,
}

pub fn truncate(chain: &AdditionChain, drop_prefix: usize) -> Result<TruncatedChain, ChainError> {
    let length = chain.length();
    if drop_prefix != 0 && drop_prefix >= length {
        return Err(ChainError::DropTooLarge {
            drop: drop_prefix,
            length,
        });
    }
    Ok(TruncatedChain {
        base: chain.clone(),
        kept_indices: (drop_prefix + 1..=chain.terms.len()).collect(),
    })
}

impl TruncatedChain {
    pub fn base(&self) -> &AdditionChain {
        &self.base
    }

    pub fn kept_indices(&self) -> &[usize] {
        &self.kept_indices
    }

    pub fn terms(&self) -> Vec<u64> {
        self.kept_indices.iter().map(|&j| self.base.term(j)).collect()
    }

    /// Addend provenance of kept terms, in base-chain indices. Index 1 has none.
    pub fn steps(&self) -> Vec<(usize, Step)> {
        self.kept_indices
            .iter()
            .filter(|&&j| j >= 2)
            .map(|&j| (j, self.base.step(j)))
            .collect()
    }

    pub fn first_index(&self) -> usize {
        self.kept_indices[0]
    }

    /// `Σ_{j ∈ kept, j >= 2} r_j` over the base chain's regulators.
    pub fn regulator_sum(&self, gens: &GeneratorSeq) -> u64 {
        self.kept_indices
            .iter()
            .filter(|&&j| j >= 2)
            .map(|&j| gens.r(j))
            .sum()
    }

    /// What the regulator tail must telescope to: `n - s_{k-1}` for first
    /// kept index `k >= 2`, or `n - 1` when nothing was dropped.
    pub fn telescoped_tail(&self) -> u64 {
        let k = self.first_index().max(2);
        self.base.target() - self.base.term(k - 1)
    }
}

/// Convenience: build a chain map for [`validate_chain`] from `(j, p, q)`.
pub fn steps_from_triples(triples: &[(usize, usize, usize)]) -> BTreeMap<usize, Step> {
    triples
        .iter()
        .map(|&(j, p, q)| (j, Step::new(p, q)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(terms: &[u64]) -> AdditionChain {
        AdditionChain::from_terms(terms.to_vec()).unwrap()
    }

    #[test]
    fn validate_examples() {
        let c = validate_chain(vec![1, 2, 3, 5], steps_from_triples(&[(3, 2, 1), (4, 3, 2)])).unwrap();
        assert_eq!(c.length(), 3);
        assert_eq!(c.target(), 5);

        let c = validate_chain(vec![1, 2, 4], steps_from_triples(&[(3, 2, 2)])).unwrap();
        assert_eq!(c.length(), 2);

        assert_eq!(
            validate_chain(vec![1, 2, 5], steps_from_triples(&[(3, 2, 1)])),
            Err(ChainError::NotAChain { index: 3 })
        );
    }

    #[test]
    fn validate_errors() {
        assert_eq!(validate_chain(vec![], []), Err(ChainError::Empty));
        assert_eq!(validate_chain(vec![1, 3], []), Err(ChainError::BadPrefix));
        assert_eq!(validate_chain(vec![2, 4], []), Err(ChainError::BadPrefix));
        assert_eq!(
            validate_chain(vec![1, 2, 2], steps_from_triples(&[(3, 1, 1)])),
            Err(ChainError::NotIncreasing { index: 3 })
        );
        // missing step for index 3
        assert_eq!(
            validate_chain(vec![1, 2, 3], []),
            Err(ChainError::NotAChain { index: 3 })
        );
        // forward reference
        assert_eq!(
            validate_chain(vec![1, 2, 4], steps_from_triples(&[(3, 3, 1)])),
            Err(ChainError::NotAChain { index: 3 })
        );
        // doublings up to 2^63, then a claimed u64::MAX = 2^63 + 2^63
        let mut terms: Vec<u64> = (0..64).map(|k| 1u64 << k).collect();
        terms.push(u64::MAX);
        let steps: Vec<_> = (2..=65).map(|j| (j, Step::new(j - 1, j - 1))).collect();
        assert_eq!(validate_chain(terms, steps), Err(ChainError::Overflow { index: 65 }));
    }

    #[test]
    fn minimal_chains() {
        assert_eq!(chain(&[1]).length(), 0);
        let c = chain(&[1, 2]);
        assert_eq!(c.length(), 1);
        assert_eq!(c.step(2), Step::new(1, 1));
    }

    #[test]
    fn star_detection() {
        assert!(chain(&[1, 2, 3, 5, 8]).is_star());
        assert!(chain(&[1, 2]).is_star());
        let c = validate_chain(vec![1, 2, 3, 4], steps_from_triples(&[(3, 2, 1), (4, 2, 2)])).unwrap();
        assert!(!is_star_chain(&c));
        // same terms, inferred steps pick the star form
        assert!(chain(&[1, 2, 3, 4]).is_star());
        // 8 - 5 = 3 is not a term, so 8 = 4 + 4 is the only option
        assert!(!chain(&[1, 2, 4, 5, 8]).is_star());
    }

    #[test]
    fn decompose_examples() {
        let g = decompose(&chain(&[1, 2, 3, 5])).unwrap();
        assert_eq!(g.determiners(), &[1, 2, 3]);
        assert_eq!(g.regulators(), &[1, 1, 2]);
        let g = decompose(&chain(&[1, 2, 3, 5, 8])).unwrap();
        assert_eq!(g.determiners(), &[1, 2, 3, 5]);
        assert_eq!(g.regulators(), &[1, 1, 2, 3]);
        let c = validate_chain(vec![1, 2, 3, 4], steps_from_triples(&[(3, 2, 1), (4, 2, 2)])).unwrap();
        assert_eq!(decompose(&c), Err(ChainError::NotStarChain { index: 4 }));
    }

    #[test]
    fn doubling_step_has_equal_parts() {
        let g = decompose(&chain(&[1, 2, 4, 8])).unwrap();
        assert_eq!(g.determiners(), &[1, 2, 4]);
        assert_eq!(g.regulators(), &[1, 2, 4]);
    }

    #[test]
    fn recompose_examples() {
        let g = GeneratorSeq::new(vec![1, 2, 3], vec![1, 1, 2]).unwrap();
        assert_eq!(recompose(&g).unwrap().terms(), &[1, 2, 3, 5]);
        let g = GeneratorSeq::new(vec![1], vec![1]).unwrap();
        assert_eq!(recompose(&g).unwrap().terms(), &[1, 2]);
        let g = GeneratorSeq::new(vec![1, 2], vec![1, 5]).unwrap();
        assert_eq!(
            recompose(&g),
            Err(ChainError::RegulatorNotInChain { index: 3, value: 5 })
        );
    }

    #[test]
    fn generator_invariants_enforced() {
        assert!(GeneratorSeq::new(vec![1, 3], vec![1, 1]).is_err());
        assert!(GeneratorSeq::new(vec![2], vec![1]).is_err());
        assert!(GeneratorSeq::new(vec![1, 2], vec![1]).is_err());
    }

    #[test]
    fn truncate_examples() {
        let c = chain(&[1, 2, 3, 5, 8]);
        let t = truncate(&c, 2).unwrap();
        assert_eq!(t.terms(), vec![3, 5, 8]);
        assert_eq!(t.kept_indices(), &[3, 4, 5]);
        assert_eq!(t.steps()[0], (3, c.step(3)));
        let g = decompose(&c).unwrap();
        assert_eq!(t.regulator_sum(&g), t.telescoped_tail());

        let t = truncate(&c, 0).unwrap();
        assert_eq!(t.terms(), c.terms());
        assert_eq!(t.regulator_sum(&g), 7);

        assert_eq!(
            truncate(&chain(&[1, 2]), 2),
            Err(ChainError::DropTooLarge { drop: 2, length: 1 })
        );
    }

    #[test]
    fn record_round_trip() {
        let c = validate_chain(vec![1, 2, 3, 5], steps_from_triples(&[(3, 2, 1), (4, 3, 2)])).unwrap();
        let line = c.to_string();
        assert_eq!(line, "n=5; terms=1,2,3,5; steps=2:1+1;3:2+1;4:3+2");
        assert_eq!(line.parse::<AdditionChain>().unwrap(), c);
        assert_eq!("1,2,3,5".parse::<AdditionChain>().unwrap().terms(), c.terms());
        assert!("n=6; terms=1,2,3,5".parse::<AdditionChain>().is_err());
        assert!(matches!(
            "1,2,99999999999999999999999".parse::<AdditionChain>(),
            Err(ChainError::Overflow { .. })
        ));
    }

    #[test]
    fn json_form_validates() {
        let c = chain(&[1, 2, 4, 5]);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.starts_with(r#"{"target":5,"terms":[1,2,4,5],"steps":["#));
        let back: AdditionChain = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"target":5,"terms":[1,2,4,5],"steps":[{"index":3,"left":2,"right":2},{"index":4,"left":3,"right":3}]}"#;
        assert!(serde_json::from_str::<AdditionChain>(bad).is_err());
    }
}
