//! Exhaustive counting and enumeration of AP-free permutations of `{1..n}`.
//!
//! Permutations are built left to right. For `k = 3` every placed pair
//! `(x, y)` forbids `2y - x` for the rest of the branch, so legality is a
//! single bit test. For `k >= 4` each placed value keeps the length of the
//! longest chain ending at it for every difference.

use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apcore::{find_ap, ApConstraint, Seq};
use crate::error::{ApError, Result};

pub mod cache;

pub use cache::CountCache;

/// Largest `n` the bit-set search state supports.
pub const MAX_SEARCH_N: usize = 63;

/// Largest number of free positions the factorial oracle will enumerate.
pub const ORACLE_MAX_FREE: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountQuery {
    n: usize,
    constraint: ApConstraint,
    prefix: Seq,
}

impl CountQuery {
    pub fn new(n: usize, constraint: ApConstraint, prefix: Seq) -> Result<Self> {
        if n == 0 {
            return Err(ApError::Domain("n must be positive".into()));
        }
        if prefix.len() > n {
            return Err(ApError::Domain(format!(
                "prefix of length {} is longer than n={n}",
                prefix.len()
            )));
        }
        if let Some(&v) = prefix.values().iter().find(|&&v| v as u64 > n as u64) {
            return Err(ApError::Domain(format!("prefix value {v} exceeds n={n}")));
        }
        Ok(CountQuery {
            n,
            constraint,
            prefix,
        })
    }

    pub fn unprefixed(n: usize, constraint: ApConstraint) -> Result<Self> {
        Self::new(n, constraint, Seq::empty())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constraint(&self) -> ApConstraint {
        self.constraint
    }

    pub fn prefix(&self) -> &Seq {
        &self.prefix
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub query: CountQuery,
    pub count: BigUint,
    /// Search-tree nodes visited (diagnostic only).
    pub node_count: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Queries with `n` above this are refused.
    pub ceiling: usize,
    /// Worker threads; 0 means the rayon default.
    pub threads: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            ceiling: 20,
            threads: 0,
        }
    }
}

impl SearchOptions {
    pub fn single_threaded() -> Self {
        SearchOptions {
            threads: 1,
            ..Default::default()
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let limit = self.ceiling.min(MAX_SEARCH_N);
        if n > limit {
            return Err(ApError::Feasibility(format!(
                "n={n} exceeds the search ceiling {limit}"
            )));
        }
        Ok(())
    }
}

/// Incremental legality state for one branch of the search.
trait Frontier: Clone + Send + Sync {
    fn new(n: usize, c: ApConstraint) -> Self;
    fn is_free(&self, v: usize) -> bool;
    fn place(&mut self, v: usize);
    fn unplace(&mut self, v: usize);
    fn depth(&self) -> usize;
}

/// `k = 3`: used and forbidden value bit sets, with an undo log of the
/// forbidden set.
#[derive(Clone)]
struct ThreeFrontier {
    n: usize,
    parity: crate::apcore::Parity,
    used: u64,
    forbidden: u64,
    placed: Vec<usize>,
    undo: Vec<u64>,
}

impl Frontier for ThreeFrontier {
    fn new(n: usize, c: ApConstraint) -> Self {
        ThreeFrontier {
            n,
            parity: c.parity(),
            used: 0,
            forbidden: 0,
            placed: Vec::with_capacity(n),
            undo: Vec::with_capacity(n),
        }
    }

    #[inline]
    fn is_free(&self, v: usize) -> bool {
        (self.used | self.forbidden) & (1 << v) == 0
    }

    fn place(&mut self, y: usize) {
        self.undo.push(self.forbidden);
        let twice = 2 * y as i64;
        for &x in &self.placed {
            if !self.parity.accepts(y as i64 - x as i64) {
                continue;
            }
            let z = twice - x as i64;
            if z >= 1 && z as usize <= self.n {
                self.forbidden |= 1 << z;
            }
        }
        self.used |= 1 << y;
        self.placed.push(y);
    }

    fn unplace(&mut self, y: usize) {
        debug_assert_eq!(self.placed.last(), Some(&y));
        self.placed.pop();
        self.used &= !(1 << y);
        self.forbidden = self.undo.pop().expect("undo log underflow");
    }

    fn depth(&self) -> usize {
        self.placed.len()
    }
}

/// `k >= 4`: `chains[v][d]` is the longest parity-matching chain ending at
/// placed value `v` with difference `d`. A row is rewritten whenever its
/// value is placed, so backtracking only clears the used bit.
#[derive(Clone)]
struct ChainFrontier {
    n: usize,
    k: usize,
    parity: crate::apcore::Parity,
    used: u64,
    placed: Vec<usize>,
    chains: Vec<u8>,
}

impl ChainFrontier {
    #[inline]
    fn row_width(&self) -> usize {
        2 * self.n + 1
    }

    #[inline]
    fn chain(&self, v: usize, diff: i64) -> u8 {
        self.chains[v * self.row_width() + (diff + self.n as i64) as usize]
    }
}

impl Frontier for ChainFrontier {
    fn new(n: usize, c: ApConstraint) -> Self {
        ChainFrontier {
            n,
            k: c.k(),
            parity: c.parity(),
            used: 0,
            placed: Vec::with_capacity(n),
            chains: vec![0; (n + 1) * (2 * n + 1)],
        }
    }

    fn is_free(&self, v: usize) -> bool {
        if self.used & (1 << v) != 0 {
            return false;
        }
        self.placed.iter().all(|&x| {
            let diff = v as i64 - x as i64;
            !self.parity.accepts(diff) || (self.chain(x, diff) as usize) + 1 < self.k
        })
    }

    fn place(&mut self, v: usize) {
        let width = self.row_width();
        for diff in -(self.n as i64)..=self.n as i64 {
            let x = v as i64 - diff;
            let len = if diff != 0
                && self.parity.accepts(diff)
                && x >= 1
                && x as usize <= self.n
                && self.used & (1 << x) != 0
            {
                self.chain(x as usize, diff) + 1
            } else {
                1
            };
            self.chains[v * width + (diff + self.n as i64) as usize] = len;
        }
        self.used |= 1 << v;
        self.placed.push(v);
    }

    fn unplace(&mut self, v: usize) {
        debug_assert_eq!(self.placed.last(), Some(&v));
        self.placed.pop();
        self.used &= !(1 << v);
    }

    fn depth(&self) -> usize {
        self.placed.len()
    }
}

/// Replays the prefix. `None` when the prefix already contains the AP.
fn start<F: Frontier>(q: &CountQuery) -> Option<F> {
    let mut f = F::new(q.n, q.constraint);
    for &v in q.prefix.values() {
        let v = v as usize;
        if !f.is_free(v) {
            return None;
        }
        f.place(v);
    }
    Some(f)
}

fn count_subtree<F: Frontier>(f: &mut F, n: usize, nodes: &mut u64) -> u128 {
    *nodes += 1;
    if f.depth() == n {
        return 1;
    }
    let mut total = 0;
    for v in 1..=n {
        if f.is_free(v) {
            f.place(v);
            total += count_subtree(f, n, nodes);
            f.unplace(v);
        }
    }
    total
}

/// Legal extensions of the root by up to `extra` values, in lexicographic
/// order. Shallower leaves appear when `n` runs out first.
fn split_tasks<F: Frontier>(root: &F, n: usize, extra: usize, nodes: &mut u64) -> Vec<Vec<usize>> {
    let mut tasks = Vec::new();
    let mut path = Vec::new();
    let mut f = root.clone();
    fn go<F: Frontier>(
        f: &mut F,
        n: usize,
        extra: usize,
        path: &mut Vec<usize>,
        tasks: &mut Vec<Vec<usize>>,
        nodes: &mut u64,
    ) {
        if path.len() == extra || f.depth() == n {
            tasks.push(path.clone());
            return;
        }
        *nodes += 1;
        for v in 1..=n {
            if f.is_free(v) {
                f.place(v);
                path.push(v);
                go(f, n, extra, path, tasks, nodes);
                path.pop();
                f.unplace(v);
            }
        }
    }
    go(&mut f, n, extra, &mut path, &mut tasks, nodes);
    tasks
}

fn run_count<F: Frontier>(q: &CountQuery, opts: &SearchOptions) -> (u128, u64) {
    let Some(root) = start::<F>(q) else {
        return (0, 1);
    };
    let mut nodes = 0;
    let tasks = split_tasks(&root, q.n, 2, &mut nodes);
    let work = |path: &Vec<usize>| {
        let mut f = root.clone();
        for &v in path {
            f.place(v);
        }
        let mut local = 0;
        let c = count_subtree(&mut f, q.n, &mut local);
        (c, local)
    };
    let (count, sub_nodes) = if opts.threads == 1 {
        tasks.iter().map(work).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    } else {
        let run = || {
            tasks
                .par_iter()
                .map(work)
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
        };
        if opts.threads == 0 {
            run()
        } else {
            match rayon::ThreadPoolBuilder::new().num_threads(opts.threads).build() {
                Ok(pool) => pool.install(run),
                Err(_) => run(),
            }
        }
    };
    (count, nodes + sub_nodes)
}

/// Exact number of permutations of `{1..n}` that start with the query's
/// prefix and avoid the query's progression.
pub fn count_apfree(q: &CountQuery, opts: &SearchOptions) -> Result<CountRecord> {
    opts.check(q.n)?;
    let started = Instant::now();
    let (count, node_count) = if q.constraint.k() == 3 {
        run_count::<ThreeFrontier>(q, opts)
    } else {
        run_count::<ChainFrontier>(q, opts)
    };
    Ok(CountRecord {
        query: q.clone(),
        count: BigUint::from(count),
        node_count,
        elapsed: started.elapsed(),
    })
}

fn enumerate_with<F: Frontier>(q: &CountQuery, limit: usize) -> Vec<Seq> {
    let mut out = Vec::new();
    let Some(mut f) = start::<F>(q) else {
        return out;
    };
    let mut path: Vec<i64> = q.prefix.values().to_vec();
    fn go<F: Frontier>(f: &mut F, n: usize, limit: usize, path: &mut Vec<i64>, out: &mut Vec<Seq>) {
        if out.len() >= limit {
            return;
        }
        if f.depth() == n {
            out.push(Seq::from_vec_unchecked(path.clone()));
            return;
        }
        for v in 1..=n {
            if out.len() >= limit {
                return;
            }
            if f.is_free(v) {
                f.place(v);
                path.push(v as i64);
                go(f, n, limit, path, out);
                path.pop();
                f.unplace(v);
            }
        }
    }
    go(&mut f, q.n, limit, &mut path, &mut out);
    out
}

/// The first `limit` qualifying permutations in lexicographic order.
pub fn enumerate_apfree(q: &CountQuery, limit: usize, opts: &SearchOptions) -> Result<Vec<Seq>> {
    opts.check(q.n)?;
    if limit == 0 {
        return Err(ApError::Domain("limit must be positive".into()));
    }
    Ok(if q.constraint.k() == 3 {
        enumerate_with::<ThreeFrontier>(q, limit)
    } else {
        enumerate_with::<ChainFrontier>(q, limit)
    })
}

/// Independent count: every completion of the prefix is generated and
/// filtered with [`find_ap`].
pub fn oracle_count(q: &CountQuery) -> Result<CountRecord> {
    let free = q.n - q.prefix.len();
    if free > ORACLE_MAX_FREE {
        return Err(ApError::Feasibility(format!(
            "oracle would enumerate {free}! completions (limit {ORACLE_MAX_FREE}!)"
        )));
    }
    let started = Instant::now();
    let rest: Vec<i64> = (1..=q.n as i64)
        .filter(|v| !q.prefix.values().contains(v))
        .collect();
    let mut count = 0u64;
    let mut nodes = 0u64;
    let mut full = q.prefix.values().to_vec();
    for tail in rest.iter().copied().permutations(free) {
        nodes += 1;
        full.truncate(q.prefix.len());
        full.extend(tail);
        let seq = Seq::from_vec_unchecked(full.clone());
        if find_ap(&seq, q.constraint)?.is_none() {
            count += 1;
        }
    }
    Ok(CountRecord {
        query: q.clone(),
        count: BigUint::from(count),
        node_count: nodes,
        elapsed: started.elapsed(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixVerdict {
    /// Every completion contains the progression.
    pub forced: bool,
    /// Lexicographically first completion that avoids it, when one exists.
    pub counterexample: Option<Seq>,
    pub record: CountRecord,
}

/// Decides whether every permutation of `{1..n}` beginning with `prefix`
/// contains a progression matching `c`.
pub fn check_prefix_forces_ap(
    n: usize,
    prefix: Seq,
    c: ApConstraint,
    opts: &SearchOptions,
) -> Result<PrefixVerdict> {
    let q = CountQuery::new(n, c, prefix)?;
    let record = count_apfree(&q, opts)?;
    let forced = record.count == BigUint::from(0u8);
    let counterexample = if forced {
        None
    } else {
        enumerate_apfree(&q, 1, opts)?.into_iter().next()
    };
    Ok(PrefixVerdict {
        forced,
        counterexample,
        record,
    })
}
