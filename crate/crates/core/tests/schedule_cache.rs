use std::io::Write;
use std::sync::Arc;

use addchain::cache::{format_line, parse_line, CacheEntry, LengthCache};
use addchain::schedule::emit;
use addchain::scholz::Lab;
use addchain::search::{binary_length, binary_upper_bound};
use addchain::{shortest_chain, AdditionChain, SearchConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn naive_pow(base: u64, exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc = 1 % m;
    for _ in 0..exp {
        acc = acc * (base as u128 % m) % m;
    }
    acc as u64
}

#[test]
fn schedules_match_repeated_multiplication() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=3000u64);
        let base = rng.gen::<u64>();
        let modulus = rng.gen_range(2..=u64::MAX);
        let chain = if n >= 3 {
            shortest_chain(n, &SearchConfig::default()).unwrap().witness
        } else {
            binary_upper_bound(n)
        };
        let got = emit(&chain).evaluate(base, modulus).unwrap();
        assert_eq!(got, naive_pow(base, n, modulus), "base={base} n={n} m={modulus}");
    }
}

#[test]
fn shortest_schedules_never_use_more_multiplications_than_binary() {
    for n in 3..=1024u64 {
        let s = emit(&shortest_chain(n, &SearchConfig::default()).unwrap().witness);
        assert!(s.multiplications() as u32 <= binary_length(n), "n={n}");
    }
    let fifteen = emit(&shortest_chain(15, &SearchConfig::default()).unwrap().witness);
    assert_eq!(fifteen.multiplications(), 5);
    assert_eq!(binary_length(15), 6);
}

#[test]
fn cache_round_trip_and_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lengths.tsv");
    let cache = LengthCache::open(&path).unwrap();
    assert!(cache.is_empty());
    for n in [3u64, 15, 127, 1000] {
        let r = shortest_chain(n, &SearchConfig::default()).unwrap();
        cache.put(n, r.shortest_length, &r.witness).unwrap();
    }
    let reopened = LengthCache::open(&path).unwrap();
    assert_eq!(reopened.len(), 4);
    for n in [3u64, 15, 127, 1000] {
        let hit = reopened.get(n).unwrap();
        let fresh = shortest_chain(n, &SearchConfig::default()).unwrap();
        assert_eq!(hit.length, fresh.shortest_length);
        assert_eq!(hit.witness, fresh.witness);
        let line = format_line(n, &hit);
        let (m, back) = parse_line(&line, 1).unwrap();
        assert_eq!(m, n);
        assert_eq!(format_line(m, &back), line);
    }
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
}

#[test]
fn corrupt_cache_lines_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lengths.tsv");
    let good = format_line(
        5,
        &CacheEntry {
            length: 3,
            witness: AdditionChain::from_terms(vec![1, 2, 4, 5]).unwrap(),
        },
    );
    let mut tampered = format_line(
        7,
        &CacheEntry {
            length: 4,
            witness: AdditionChain::from_terms(vec![1, 2, 4, 6, 7]).unwrap(),
        },
    );
    tampered = tampered.replacen("\t4\t", "\t3\t", 1);
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "{good}").unwrap();
    writeln!(f, "{tampered}").unwrap();
    writeln!(f, "garbage").unwrap();
    drop(f);

    let cache = LengthCache::open(&path).unwrap();
    assert_eq!(cache.len(), 1);
    assert_eq!(cache.skipped().len(), 2);
    assert_eq!(cache.get(5).unwrap().length, 3);
    assert!(cache.get(7).is_none());
}

#[test]
fn lab_with_cache_matches_lab_without() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Arc::new(LengthCache::open(dir.path().join("c.tsv")).unwrap());
    let cached = Lab::new(SearchConfig::default()).with_cache(cache.clone());
    let plain = Lab::new(SearchConfig::default());
    let first = cached.sweep(2, 9).unwrap();
    assert!(!cache.is_empty());
    let second = cached.sweep(2, 9).unwrap();
    assert_eq!(first, second);
    assert_eq!(first, plain.sweep(2, 9).unwrap());
}
