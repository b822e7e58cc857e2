// Every identity is recomputed here straight from the chain terms and
// compared with the library, on all small star chains.

use addchain::chain::{decompose, recompose, steps_from_triples, validate_chain, ChainError};
use addchain::identity::{self, evaluate_all, evaluate_generators};
use addchain::search::{enumerate_chains, enumerate_star_chains};
use addchain::AdditionChain;
use num_rational::Ratio;
use proptest::prelude::*;

const N_MAX: u64 = 24;
const LEN_MAX: usize = 9;

/// Terms padded so `s[j]` is the 1-based j-th term.
fn one_based(c: &AdditionChain) -> Vec<i128> {
    std::iter::once(0).chain(c.terms().iter().map(|&t| t as i128)).collect()
}

/// Step function `t -> R(floor t)` integrated over `[2, δ-1]` by a midpoint
/// rule in floating point.
fn quadrature(s: &[i128], d: usize) -> f64 {
    if d <= 3 {
        return 0.0;
    }
    let big_r = |t: f64| (s[t.floor() as usize] - 1) as f64;
    let steps_per_unit = 64;
    let h = 1.0 / steps_per_unit as f64;
    let (lo, hi) = (2.0, (d - 1) as f64);
    let count = ((hi - lo) / h).round() as usize;
    (0..count).map(|i| big_r(lo + (i as f64 + 0.5) * h) * h).sum()
}

fn corpus() -> Vec<AdditionChain> {
    (3..=N_MAX)
        .flat_map(|n| enumerate_star_chains(n, LEN_MAX).unwrap())
        .collect()
}

#[test]
fn every_identity_on_every_small_star_chain() {
    let chains = corpus();
    assert!(chains.len() > 10_000, "corpus too small: {}", chains.len());
    for c in &chains {
        let s = one_based(c);
        let d = c.length();
        let l = d + 1;
        let n = s[l];
        let a = |j: usize| if j == 2 { 1 } else { s[j - 1] };
        let r = |j: usize| if j == 2 { 1 } else { s[j] - s[j - 1] };
        let integral = (2..=d.saturating_sub(2)).map(|m| s[m] - 1).sum::<i128>();

        let g = decompose(c).unwrap();
        let rep = evaluate_generators(&g);
        assert!(rep.all_hold(), "{c}: {:?}", rep.verdicts.failures());

        assert_eq!(identity::step_integral(&g), integral, "{c}");
        assert!((quadrature(&s, d) - integral as f64).abs() < 1e-6, "{c}");

        let rsum: i128 = (2..=l).map(r).sum();
        assert_eq!(rsum, n - 1, "{c}");
        assert_eq!(rep.regulator_sum, rsum);

        let sup = (2..=l).map(r).max().unwrap();
        let inf = (2..=l).map(r).min().unwrap();
        let len = Ratio::from_integer(d as i128);
        assert!(Ratio::new(n - 1, sup) <= len && len <= Ratio::new(n - 1, inf), "{c}");
        assert_eq!(identity::length_sandwich(&g), (Ratio::new(n - 1, sup), Ratio::new(n - 1, inf)));

        assert!((2..=l).map(|j| s[j]).sum::<i128>() >= 2 * n - 2, "{c}");

        if d < 2 {
            assert!(identity::determiner_closed_form(&g).is_err());
            continue;
        }
        let dd = d as i128;
        let closed_lhs: i128 = (2..=d).map(a).sum();
        let closed_rhs = (dd - 1) + (2..d).map(|j| (d - j) as i128 * r(j)).sum::<i128>();
        assert_eq!(closed_lhs, closed_rhs, "{c}");
        let side = identity::determiner_closed_form(&g).unwrap();
        assert_eq!((side.lhs, side.rhs), (closed_lhs, closed_rhs));

        let full_lhs: i128 = (2..=l).map(a).sum();
        let full_rhs = (n - 1) + (dd - 1) + a(d) - r(l) + integral;
        assert_eq!(full_lhs, full_rhs, "{c}");
        let side = identity::determiner_integral_identity(&g).unwrap();
        assert_eq!((side.lhs, side.rhs), (full_lhs, full_rhs));
        let side = identity::determiner_integral_identity_expanded(&g).unwrap();
        assert_eq!((side.lhs, side.rhs), (full_lhs, (n - 1) + (dd - 1) + a(l) - r(d) - r(l) + integral));

        let elem_lhs: i128 = (2..=l).map(|j| s[j]).sum();
        let elem_rhs = 2 * (n - 1) + (dd - 1) + a(d) - r(l) + integral;
        assert_eq!(elem_lhs, elem_rhs, "{c}");
        let side = identity::element_sum_identity(&g).unwrap();
        assert_eq!((side.lhs, side.rhs), (elem_lhs, elem_rhs));
    }
}

#[test]
fn abel_summation_on_corpus() {
    for c in corpus() {
        let s = one_based(&c);
        let d = c.length();
        let r = |j: usize| if j == 2 { 1 } else { s[j] - s[j - 1] };
        let weighted: i128 = (2..d).map(|j| (d - j) as i128 * r(j)).sum();
        let plain: i128 = (2..d).map(r).sum();
        let integral: i128 = (2..=d.saturating_sub(2)).map(|m| s[m] - 1).sum();
        assert_eq!(weighted, plain + integral, "{c}");
        let side = identity::abel_cross_check(&decompose(&c).unwrap());
        assert_eq!(side.residual(), 0, "{c}");
    }
}

#[test]
fn decompose_recompose_round_trip_on_corpus() {
    for c in corpus() {
        let g = decompose(&c).unwrap();
        assert_eq!(recompose(&g).unwrap(), c);
        assert_eq!(g.determiners().len(), c.length());
        assert_eq!(g.target(), c.target());
    }
}

#[test]
fn non_star_chains_are_rejected() {
    let mut rejected = 0;
    for n in 3..=N_MAX {
        for c in enumerate_chains(n, 7).unwrap() {
            if c.is_star() {
                continue;
            }
            rejected += 1;
            assert!(matches!(decompose(&c), Err(ChainError::NotStarChain { .. })), "{c}");
            assert!(evaluate_all(&c).is_err());
        }
    }
    assert!(rejected > 0);
}

#[test]
fn star_enumeration_is_the_star_part_of_full_enumeration() {
    for n in 3..=20 {
        let all: Vec<_> = enumerate_chains(n, 7).unwrap().filter(|c| c.is_star()).collect();
        let star: Vec<_> = enumerate_star_chains(n, 7).unwrap().collect();
        assert_eq!(all, star, "n={n}");
    }
}

#[test]
fn step_integral_grows_by_last_partial_sum_under_extension() {
    for c in corpus().into_iter().filter(|c| c.length() < LEN_MAX) {
        let base = identity::step_integral(&decompose(&c).unwrap());
        let terms = c.terms();
        let last = *terms.last().unwrap();
        let d = c.length();
        for &t in terms {
            let mut ext = terms.to_vec();
            ext.push(last + t);
            let grown = identity::step_integral(&decompose(&AdditionChain::from_terms(ext).unwrap()).unwrap());
            // the new upper limit adds R(δ-1) = s_{δ-1} - 1
            let expect = if d + 1 >= 4 { terms[d - 2] as i128 - 1 } else { 0 };
            assert_eq!(grown - base, expect, "{c} + {t}");
            assert!(grown >= base);
        }
    }
}

#[test]
fn step_orientation_does_not_matter() {
    let forward = validate_chain(vec![1, 2, 3, 5, 8], steps_from_triples(&[(3, 2, 1), (4, 3, 2), (5, 4, 3)])).unwrap();
    let backward = validate_chain(vec![1, 2, 3, 5, 8], steps_from_triples(&[(3, 1, 2), (4, 2, 3), (5, 3, 4)])).unwrap();
    assert_eq!(decompose(&forward).unwrap(), decompose(&backward).unwrap());
    assert_eq!(evaluate_all(&forward).unwrap(), evaluate_all(&backward).unwrap());
}

fn star_chain(picks: Vec<prop::sample::Index>) -> AdditionChain {
    let mut terms = vec![1u64, 2];
    for p in picks {
        let last = *terms.last().unwrap();
        terms.push(last + terms[p.index(terms.len())]);
    }
    AdditionChain::from_terms(terms).unwrap()
}

proptest! {
    #[test]
    fn random_star_chains_satisfy_everything(picks in prop::collection::vec(any::<prop::sample::Index>(), 0..40)) {
        let c = star_chain(picks);
        prop_assert!(c.is_star());
        let rep = evaluate_all(&c).unwrap();
        prop_assert!(rep.all_hold(), "{}: {:?}", c, rep.verdicts.failures());
        prop_assert_eq!(recompose(&decompose(&c).unwrap()).unwrap(), c);
    }

    #[test]
    fn record_and_json_round_trip(picks in prop::collection::vec(any::<prop::sample::Index>(), 0..40)) {
        let c = star_chain(picks);
        let text = c.to_string();
        let back: AdditionChain = text.parse().unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_string(), text);
        let json = serde_json::to_string(&c).unwrap();
        let back: AdditionChain = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
