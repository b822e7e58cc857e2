//! Depth-bounded search for a chain of exactly a given length.
//!
//! Children are tried largest first, so among all chains of the requested
//! length the first one found is the lexicographically greatest.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

/// Which steps a search may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    General,
    /// Every step adds some earlier term to the previous term.
    Star,
    /// Star steps whose added term (the regulator) is at least the given value
    /// for every step after `1, 2`.
    StarMinRegulator(u64),
}

#[derive(Debug, Default)]
pub(crate) struct Limits {
    pub max_nodes: Option<u64>,
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Aborted;

#[derive(Debug, Default)]
pub(crate) struct Shared {
    nodes: AtomicU64,
    aborted: AtomicBool,
}

impl Shared {
    pub fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }
}

const FLUSH_EVERY: u64 = 4096;

struct Worker<'a> {
    target: u64,
    mode: Mode,
    limits: &'a Limits,
    shared: &'a Shared,
    local_nodes: u64,
    buffers: Vec<Vec<u64>>,
}

/// Outcome of expanding the top of the tree for parallel work splitting.
enum Frontier {
    Pending(Vec<u64>, u32),
    Solved(Vec<u64>),
}

impl<'a> Worker<'a> {
    fn new(target: u64, mode: Mode, limits: &'a Limits, shared: &'a Shared) -> Self {
        Worker {
            target,
            mode,
            limits,
            shared,
            local_nodes: 0,
            buffers: Vec::new(),
        }
    }

    fn flush(&mut self) {
        self.shared.nodes.fetch_add(self.local_nodes, Ordering::Relaxed);
        self.local_nodes = 0;
    }

    fn tick(&mut self) -> Result<(), Aborted> {
        self.local_nodes += 1;
        if self.local_nodes >= FLUSH_EVERY {
            self.flush();
            let over_nodes = self
                .limits
                .max_nodes
                .is_some_and(|m| self.shared.nodes() > m);
            let over_time = self.limits.deadline.is_some_and(|d| Instant::now() >= d);
            if over_nodes || over_time {
                self.shared.aborted.store(true, Ordering::Relaxed);
            }
        }
        if self.shared.aborted.load(Ordering::Relaxed) {
            return Err(Aborted);
        }
        Ok(())
    }

    fn min_regulator(&self) -> u64 {
        match self.mode {
            Mode::StarMinRegulator(m) => m,
            _ => 1,
        }
    }

    /// Cheap feasibility tests. `Some(true)` means `chain` was completed to
    /// the target in place, `Some(false)` means the node is dead.
    fn settle(&self, chain: &mut Vec<u64>, rem: u32) -> Option<bool> {
        let n = self.target;
        let max = *chain.last().expect("nonempty");
        if max == n {
            return Some(true);
        }
        if rem == 0 {
            return Some(false);
        }
        let reach = reach(max, rem);
        if reach < n as u128 {
            return Some(false);
        }
        if reach == n as u128 && max >= self.min_regulator() {
            let mut v = max;
            for _ in 0..rem {
                v *= 2;
                chain.push(v);
            }
            return Some(true);
        }
        if rem == 1 {
            let done = match self.mode {
                Mode::General => {
                    // n = a + b with b <= a, both in the chain
                    chain
                        .iter()
                        .rev()
                        .take_while(|&&a| a as u128 * 2 >= n as u128)
                        .any(|&a| chain.binary_search(&(n - a)).is_ok())
                }
                _ => {
                    let add = n - max;
                    add >= self.min_regulator() && chain.binary_search(&add).is_ok()
                }
            };
            if done {
                chain.push(n);
            }
            return Some(done);
        }
        // Unless every remaining step doubles, some step adds less than the
        // current maximum.
        let second = chain[chain.len() - 2] as u128;
        let mixed = ((max as u128 + second) << (rem - 1)).max((3 * max as u128) << (rem - 2));
        if (n as u128) > mixed {
            return Some(false);
        }
        None
    }

    fn children(&self, chain: &[u64], rem: u32, out: &mut Vec<u64>) {
        out.clear();
        let n = self.target;
        let max = *chain.last().expect("nonempty");
        let viable = |s: u64| reach(s, rem - 1) >= n as u128;
        match self.mode {
            Mode::General => {
                for i in (0..chain.len()).rev() {
                    let a = chain[i];
                    if a * 2 <= max {
                        break;
                    }
                    for &b in chain[..=i].iter().rev() {
                        let s = a + b;
                        if s <= max || !viable(s) {
                            break;
                        }
                        if s <= n {
                            out.push(s);
                        }
                    }
                }
                out.sort_unstable_by(|x, y| y.cmp(x));
                out.dedup();
            }
            Mode::Star | Mode::StarMinRegulator(_) => {
                let min_reg = self.min_regulator();
                for &b in chain.iter().rev() {
                    let s = max + b;
                    if b < min_reg || !viable(s) {
                        break;
                    }
                    if s <= n {
                        out.push(s);
                    }
                }
            }
        }
    }

    fn search(&mut self, chain: &mut Vec<u64>, rem: u32) -> Result<bool, Aborted> {
        self.tick()?;
        if let Some(done) = self.settle(chain, rem) {
            return Ok(done);
        }
        let depth = rem as usize;
        if self.buffers.len() <= depth {
            self.buffers.resize_with(depth + 1, Vec::new);
        }
        let mut kids = std::mem::take(&mut self.buffers[depth]);
        self.children(chain, rem, &mut kids);
        let mut found = false;
        for &c in &kids {
            chain.push(c);
            match self.search(chain, rem - 1) {
                Ok(true) => {
                    found = true;
                    break;
                }
                Ok(false) => {
                    chain.pop();
                }
                Err(e) => {
                    self.buffers[depth] = kids;
                    return Err(e);
                }
            }
        }
        self.buffers[depth] = kids;
        Ok(found)
    }

    /// Walk `levels` levels with the same rules as [`search`], collecting
    /// unexpanded nodes in visiting order. Stops at the first solved node.
    fn frontier(
        &mut self,
        chain: &mut Vec<u64>,
        rem: u32,
        levels: u32,
        out: &mut Vec<Frontier>,
    ) -> Result<bool, Aborted> {
        if levels == 0 {
            out.push(Frontier::Pending(chain.clone(), rem));
            return Ok(false);
        }
        self.tick()?;
        let mut probe = chain.clone();
        if let Some(done) = self.settle(&mut probe, rem) {
            if done {
                out.push(Frontier::Solved(probe));
            }
            return Ok(done);
        }
        let mut kids = Vec::new();
        self.children(chain, rem, &mut kids);
        for c in kids {
            chain.push(c);
            let done = self.frontier(chain, rem - 1, levels - 1, out)?;
            chain.pop();
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn reach(max: u64, rem: u32) -> u128 {
    if rem >= 64 {
        u128::MAX
    } else {
        (max as u128) << rem
    }
}

/// Search for a chain `1, 2, ...` ending at `target` with at most `length`
/// steps (exactly `length` when no shorter chain exists). Requires
/// `target >= 3` and `length >= 1`.
pub(crate) fn find_chain(
    target: u64,
    length: u32,
    mode: Mode,
    limits: &Limits,
    shared: &Shared,
    jobs: usize,
) -> Result<Option<Vec<u64>>, Aborted> {
    let mut chain = vec![1u64, 2];
    let rem = length - 1;
    if jobs <= 1 || rem < 4 {
        let mut w = Worker::new(target, mode, limits, shared);
        let found = w.search(&mut chain, rem);
        w.flush();
        return Ok(found?.then_some(chain));
    }

    let mut w = Worker::new(target, mode, limits, shared);
    let mut frontier = Vec::new();
    let split = rem.min(3);
    let res = w.frontier(&mut chain, rem, split, &mut frontier);
    w.flush();
    res?;

    let run = || {
        frontier.par_iter().find_map_first(|item| match item {
            Frontier::Solved(c) => Some(Ok(c.clone())),
            Frontier::Pending(prefix, rem) => {
                let mut w = Worker::new(target, mode, limits, shared);
                let mut c = prefix.clone();
                let res = w.search(&mut c, *rem);
                w.flush();
                match res {
                    Ok(true) => Some(Ok(c)),
                    Ok(false) => None,
                    Err(e) => Some(Err(e)),
                }
            }
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    match pool.install(run) {
        Some(Ok(c)) => Ok(Some(c)),
        Some(Err(e)) => Err(e),
        None if shared.aborted.load(Ordering::Relaxed) => Err(Aborted),
        None => Ok(None),
    }
}
