use crate::chain::{validate_chain, AdditionChain, Step};

/// Left-to-right binary (square-and-multiply) chain for `n >= 1`.
///
/// Length is `⌊log2 n⌋ + ν(n) - 1`.
pub fn binary_upper_bound(n: u64) -> AdditionChain {
    assert!(n >= 1, "binary chain needs n >= 1");
    let mut terms = vec![1u64];
    let mut steps = Vec::new();
    let bits = 63 - n.leading_zeros();
    for bit in (0..bits).rev() {
        let last = terms.len();
        terms.push(terms[last - 1] * 2);
        steps.push((last + 1, Step::new(last, last)));
        if n >> bit & 1 == 1 {
            let last = terms.len();
            terms.push(terms[last - 1] + 1);
            steps.push((last + 1, Step::new(last, 1)));
        }
    }
    validate_chain(terms, steps).expect("binary method yields a valid chain")
}

/// `⌊log2 n⌋ + ν(n) - 1` without building the chain.
pub fn binary_length(n: u64) -> u32 {
    assert!(n >= 1);
    (63 - n.leading_zeros()) + n.count_ones() - 1
}

/// `⌊log2 n⌋ + ⌈log2 ν(n)⌉`, a lower bound on the shortest chain length.
pub fn lower_bound(n: u64) -> u32 {
    assert!(n >= 1, "lower bound needs n >= 1");
    let floor_log = 63 - n.leading_zeros();
    let weight = n.count_ones();
    floor_log + ceil_log2(weight)
}

fn ceil_log2(x: u32) -> u32 {
    if x <= 1 {
        0
    } else {
        32 - (x - 1).leading_zeros()
    }
}
