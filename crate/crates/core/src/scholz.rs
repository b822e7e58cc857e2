//! Scholz conjecture checks and the length bounds, over desk-scale sweeps.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cache::LengthCache;
use crate::chain::{decompose, truncate, AdditionChain, GeneratorSeq};
use crate::identity::{self, IdentityError};
use crate::search::{
    binary_upper_bound, shortest_chain, star_chain_with_min_regulator, Budget, SearchConfig,
    SearchError,
};

/// Largest `n` whose Mersenne number `2^n - 1` fits in 64 bits.
pub const MAX_MERSENNE_EXPONENT: u64 = 63;

#[derive(Debug, Error)]
pub enum ScholzError {
    #[error("n={0} outside 2..=63")]
    ExponentOutOfRange(u64),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

/// `Σ_{j=2}^{ι} a_j + r_ι + r_{ι+1} + 1 - ∫`, evaluated on the generators of
/// a shortest star chain for `n` (length `ι >= 2`).
pub fn reformulated_rhs(gens: &GeneratorSeq) -> Result<i128, IdentityError> {
    let len = gens.length();
    if len < 2 {
        return Err(IdentityError::DegenerateLength(len));
    }
    let determiners: i128 = (2..=len).map(|j| gens.a(j) as i128).sum();
    Ok(determiners + gens.r(len) as i128 + gens.r(len + 1) as i128 + 1
        - identity::step_integral(gens))
}

/// Result of the two length bounds for one `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundChecks {
    /// `ι(n) <= n/2`; `None` when no shortest star chain has every
    /// `r_j >= 2` for `j >= 3`.
    pub half_ok: Option<bool>,
    /// `ι(n) <= (n+1)/2`.
    pub half_plus_ok: bool,
    /// The qualifying chain for `half_ok`, when one exists.
    #[serde(skip)]
    pub qualifying: Option<AdditionChain>,
}

/// Bound checks for `n >= 3` given its exact shortest length.
pub fn bound_checks(n: u64, iota: u32, budget: Budget) -> Result<BoundChecks, SearchError> {
    let half_plus_ok = 2 * iota as u64 <= n + 1;
    let qualifying = star_chain_with_min_regulator(n, iota, 2, budget)?;
    let half_ok = qualifying.as_ref().map(|chain| {
        // the regulators from index 3 on telescope to n - 2, each at least 2
        let gens = decompose(chain).expect("star search yields star chains");
        if let Ok(tail) = truncate(chain, 2) {
            debug_assert_eq!(tail.regulator_sum(&gens), n - 2);
        }
        2 * iota as u64 <= n
    });
    Ok(BoundChecks {
        half_ok,
        half_plus_ok,
        qualifying,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    Incomplete,
}

/// Per-`n` verdicts. Every boolean is recomputable from the stored integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScholzRecord {
    pub n: u64,
    pub iota_n: Option<u32>,
    pub iota_mersenne: Option<u32>,
    /// `ι(2^n - 1) <= n - 1 + ι(n)`
    pub classic_ok: Option<bool>,
    pub reformulated_rhs: Option<i128>,
    /// `ι(2^n - 1) <= reformulated_rhs`
    pub reformulated_ok: Option<bool>,
    /// `reformulated_rhs == ι(n) + n - 1`
    pub consistency_ok: Option<bool>,
    pub half_ok: Option<bool>,
    pub half_plus_ok: Option<bool>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ScholzRecord {
    fn empty(n: u64) -> Self {
        ScholzRecord {
            n,
            iota_n: None,
            iota_mersenne: None,
            classic_ok: None,
            reformulated_rhs: None,
            reformulated_ok: None,
            consistency_ok: None,
            half_ok: None,
            half_plus_ok: None,
            status: Status::Incomplete,
            note: None,
        }
    }

    /// Names of verdicts that were evaluated and came out false.
    pub fn falsifications(&self) -> Vec<&'static str> {
        [
            ("classic_ok", self.classic_ok),
            ("reformulated_ok", self.reformulated_ok),
            ("consistency_ok", self.consistency_ok),
            ("half_ok", self.half_ok),
            ("half_plus_ok", self.half_plus_ok),
        ]
        .into_iter()
        .filter(|(_, v)| *v == Some(false))
        .map(|(k, _)| k)
        .collect()
    }

    pub const CSV_HEADER: &'static str =
        "n,iota_n,iota_mersenne,classic_ok,reformulated_rhs,consistency_ok,half_ok,half_plus_ok,status";

    pub fn csv_row(&self) -> String {
        fn cell<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "NA".to_string(), T::to_string)
        }
        let status = match self.status {
            Status::Complete => "complete",
            Status::Incomplete => "incomplete",
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            cell(&self.iota_n),
            cell(&self.iota_mersenne),
            cell(&self.classic_ok),
            cell(&self.reformulated_rhs),
            cell(&self.consistency_ok),
            cell(&self.half_ok),
            cell(&self.half_plus_ok),
            status
        )
    }
}

/// A shortest chain and its length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortest {
    pub length: u32,
    pub witness: AdditionChain,
    pub star_witness: AdditionChain,
}

/// Shortest-length provider shared by the checks: small targets are
/// answered directly, others come from the cache or a fresh search.
#[derive(Debug, Clone)]
pub struct Lab {
    config: SearchConfig,
    cache: Option<Arc<LengthCache>>,
}

impl Lab {
    pub fn new(config: SearchConfig) -> Self {
        Lab {
            config: config.star_only(false),
            cache: None,
        }
    }

    pub fn with_cache(mut self, cache: Arc<LengthCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    /// Exact `ι(n)`. Only the general length comes from the cache; the star
    /// witness is searched at that length.
    pub fn shortest(&self, n: u64) -> Result<Shortest, SearchError> {
        if n <= 2 {
            let w = AdditionChain::from_terms((1..=n).collect()).expect("1 or 1,2");
            return Ok(Shortest {
                length: (n - 1) as u32,
                witness: w.clone(),
                star_witness: w,
            });
        }
        if let Some(entry) = self.cache.as_ref().and_then(|c| c.get(n)) {
            let star = star_chain_with_min_regulator(n, entry.length, 1, self.config.budget)?;
            if let Some(star_witness) = star {
                return Ok(Shortest {
                    length: entry.length,
                    witness: entry.witness,
                    star_witness,
                });
            }
        }
        let r = shortest_chain(n, &self.config)?;
        if let Some(cache) = &self.cache {
            // a failed write only costs a recomputation later
            let _ = cache.put(n, r.shortest_length, &r.witness);
        }
        Ok(Shortest {
            length: r.shortest_length,
            witness: r.witness,
            star_witness: r.star_witness,
        })
    }

    pub fn iota(&self, n: u64) -> Result<u32, SearchError> {
        self.shortest(n).map(|s| s.length)
    }

    /// `reformulated_rhs == ι(n) + n - 1` using the deterministic shortest
    /// star witness.
    pub fn consistency_check(&self, n: u64) -> Result<bool, ScholzError> {
        let s = self.shortest(n)?;
        let rhs = reformulated_rhs(&decompose(&s.star_witness).map_err(IdentityError::from)?)?;
        Ok(rhs == s.length as i128 + n as i128 - 1)
    }

    /// Full record for one `n` in `2..=63`. Search failures leave the record
    /// incomplete with a note; nothing is guessed.
    pub fn classic_scholz_check(&self, n: u64) -> Result<ScholzRecord, ScholzError> {
        if !(2..=MAX_MERSENNE_EXPONENT).contains(&n) {
            return Err(ScholzError::ExponentOutOfRange(n));
        }
        let mut rec = ScholzRecord::empty(n);
        let small = match self.shortest(n) {
            Ok(s) => s,
            Err(e) => {
                rec.note = Some(e.to_string());
                return Ok(rec);
            }
        };
        rec.iota_n = Some(small.length);

        if n >= 3 {
            let gens = decompose(&small.star_witness).map_err(IdentityError::from)?;
            let rhs = reformulated_rhs(&gens)?;
            rec.reformulated_rhs = Some(rhs);
            rec.consistency_ok = Some(rhs == small.length as i128 + n as i128 - 1);
            match bound_checks(n, small.length, self.config.budget) {
                Ok(b) => {
                    rec.half_ok = b.half_ok;
                    rec.half_plus_ok = Some(b.half_plus_ok);
                }
                Err(e) => rec.note = Some(e.to_string()),
            }
        }

        let mersenne = (1u64 << n) - 1;
        match self.iota(mersenne) {
            Ok(big) => {
                rec.iota_mersenne = Some(big);
                rec.classic_ok = Some(big as u64 <= n - 1 + small.length as u64);
                rec.reformulated_ok = rec.reformulated_rhs.map(|rhs| big as i128 <= rhs);
            }
            Err(e) => {
                rec.note = Some(e.to_string());
                return Ok(rec);
            }
        }
        if rec.note.is_none() {
            rec.status = Status::Complete;
        }
        Ok(rec)
    }

    /// Records for `n_min..=n_max`, ordered by `n`.
    pub fn sweep(&self, n_min: u64, n_max: u64) -> Result<Vec<ScholzRecord>, ScholzError> {
        let range: Vec<u64> = (n_min..=n_max).collect();
        if self.config.jobs > 1 {
            let per_n = Lab {
                config: self.config.with_jobs(1),
                cache: self.cache.clone(),
            };
            range
                .par_iter()
                .map(|&n| per_n.classic_scholz_check(n))
                .collect()
        } else {
            range.iter().map(|&n| self.classic_scholz_check(n)).collect()
        }
    }

    /// Bound records over a wide range: exact lengths up to `exact_max`
    /// (or from the cache), binary-method chains beyond.
    pub fn bound_sweep(
        &self,
        n_min: u64,
        n_max: u64,
        exact_max: u64,
    ) -> Result<Vec<BoundRecord>, SearchError> {
        let one = |n: u64| -> Result<BoundRecord, SearchError> {
            let cached = self.cache.as_ref().and_then(|c| c.get(n));
            if n <= exact_max || cached.is_some() {
                let length = match cached {
                    Some(e) => e.length,
                    None => self.iota(n)?,
                };
                let b = bound_checks(n, length, self.config.budget)?;
                Ok(BoundRecord {
                    n,
                    length,
                    exact: true,
                    half_ok: b.half_ok,
                    half_plus_ok: b.half_plus_ok,
                })
            } else {
                let chain = binary_upper_bound(n);
                let length = chain.length() as u32;
                Ok(BoundRecord {
                    n,
                    length,
                    exact: false,
                    half_ok: None,
                    half_plus_ok: 2 * length as u64 <= n + 1,
                })
            }
        };
        let range: Vec<u64> = (n_min.max(3)..=n_max).collect();
        if self.config.jobs > 1 {
            range.par_iter().map(|&n| one(n)).collect()
        } else {
            range.iter().map(|&n| one(n)).collect()
        }
    }
}

/// One row of a bound sweep. When `exact` is false, `length` is the length
/// of a verified binary-method chain, an upper bound on `ι(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundRecord {
    pub n: u64,
    pub length: u32,
    pub exact: bool,
    pub half_ok: Option<bool>,
    pub half_plus_ok: bool,
}

impl BoundRecord {
    pub const CSV_HEADER: &'static str = "n,length,exact,half_ok,half_plus_ok";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n,
            self.length,
            self.exact,
            self.half_ok.map_or_else(|| "NA".to_string(), |b| b.to_string()),
            self.half_plus_ok
        )
    }
}
