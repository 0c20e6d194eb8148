//! Infinite sequences assembled from finite arithmetic blocks, and streaming
//! procedures that locate 3-term progressions in permutations of the
//! positive integers.
//!
//! Three block families are supported:
//!
//! * [`StreamKind::Interleaved`]: even blocks `E_i` and odd blocks `O_i`
//!   alternating, `E_1 O_1 E_2 O_2 ...`. `E_i` holds the `4^i / 2` evens from
//!   `(4^i + 2) / 3` to `(4^{i+1} - 4) / 3`; `O_i` holds the `4^{i-1}` odds
//!   from `(4^i + 2) / 6` to `(4^{i+1} - 10) / 6`. Together they cover every
//!   positive integer once, and an odd value is always followed only by evens
//!   more than twice as large, so no 4-term progression with odd difference
//!   appears.
//! * [`StreamKind::FourFree`]: blocks `[a^{2i}, a^{2i+1}]`, free of 4-term
//!   progressions.
//! * [`StreamKind::ThreeFree`]: blocks `[p_k, q_k]` with `p_0 = 1, q_0 = 2`,
//!   `p_k = 2 q_{k-1}`, `q_k = 3 q_{k-1} - 1`, free of 3-term progressions.
//!
//! Every block is emitted in a 3AP-free order supplied by a [`BlockOrder`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::apcore::{affine_image, canonical_apfree_perm, AffineMap, ApWitness, Parity, Seq};
use crate::error::{range_err, ApError, Result};

/// Default consumption budget for the streaming finders.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Largest block a cursor will hold in memory.
pub const MAX_MATERIALIZED_BLOCK: u64 = 1 << 28;

/// The arithmetic set `{start, start + step, ..., start + (count - 1) step}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRange {
    pub start: i64,
    pub step: i64,
    pub count: u64,
}

impl BlockRange {
    fn checked(start: i64, step: i64, count: u64) -> Result<Self> {
        let r = BlockRange { start, step, count };
        r.last()?;
        Ok(r)
    }

    pub fn last(&self) -> Result<i64> {
        i64::try_from(self.count - 1)
            .ok()
            .and_then(|c| c.checked_mul(self.step))
            .and_then(|x| x.checked_add(self.start))
            .ok_or_else(|| range_err(format!("block at {} with {} terms", self.start, self.count)))
    }

    /// Number of members `<= n`.
    pub fn members_up_to(&self, n: i64) -> u64 {
        if n < self.start {
            return 0;
        }
        let reach = ((n - self.start) / self.step) as u64 + 1;
        reach.min(self.count)
    }

    pub fn contains(&self, v: i64) -> bool {
        v >= self.start && (v - self.start) % self.step == 0 && (((v - self.start) / self.step) as u64) < self.count
    }

    pub fn materialize(&self, order: &dyn BlockOrder) -> Result<Block> {
        if self.count > MAX_MATERIALIZED_BLOCK {
            return Err(range_err(format!(
                "block of {} terms is past the materialization horizon",
                self.count
            )));
        }
        let count = self.count as usize;
        let perm = order.order(count);
        if perm.permutation_size() != Some(count) {
            return Err(ApError::Domain(format!(
                "block order produced a non-permutation of 1..{count}"
            )));
        }
        let values = affine_image(&perm, AffineMap::new(self.start, self.step)?)?;
        Ok(Block {
            range: *self,
            order: perm,
            values,
        })
    }
}

/// A block together with the order its members are emitted in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub range: BlockRange,
    /// Permutation of `{1..count}`.
    pub order: Seq,
    /// `order` pushed through the block's affine map.
    pub values: Seq,
}

/// Source of 3AP-free permutations of `{1..m}` used to order blocks.
pub trait BlockOrder: Send + Sync + fmt::Debug {
    fn order(&self, count: usize) -> Seq;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CanonicalOrder;

impl BlockOrder for CanonicalOrder {
    fn order(&self, count: usize) -> Seq {
        canonical_apfree_perm(count)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StreamKind {
    /// Alternating even and odd blocks covering all positive integers.
    Interleaved,
    FourFree { a: u64 },
    ThreeFree,
}

impl StreamKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            StreamKind::FourFree { a } if a < 2 => {
                Err(ApError::Domain(format!("fourfree base a={a} must be >= 2")))
            }
            other => Ok(other),
        }
    }

    /// The `index`-th block in emission order, counting from 0.
    pub fn block(self, index: usize) -> Result<BlockRange> {
        match self {
            StreamKind::Interleaved => {
                let (even, odd) = interleaved_blocks(index as u32 / 2 + 1)?;
                Ok(if index.is_multiple_of(2) { even } else { odd })
            }
            StreamKind::FourFree { a } => fourfree_block(a, index as u32),
            StreamKind::ThreeFree => threefree_block(index as u32),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StreamKind::Interleaved => "theorem2",
            StreamKind::FourFree { .. } => "fourfree",
            StreamKind::ThreeFree => "threefree",
        }
    }
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamKind::FourFree { a } => write!(f, "fourfree(a={a})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BlockStreamSpec {
    kind: StreamKind,
    order: Arc<dyn BlockOrder>,
}

impl BlockStreamSpec {
    pub fn new(kind: StreamKind) -> Result<Self> {
        Ok(BlockStreamSpec {
            kind: kind.validate()?,
            order: Arc::new(CanonicalOrder),
        })
    }

    pub fn with_order(kind: StreamKind, order: Arc<dyn BlockOrder>) -> Result<Self> {
        Ok(BlockStreamSpec {
            kind: kind.validate()?,
            order,
        })
    }

    pub fn kind(&self) -> StreamKind {
        self.kind
    }

    pub fn block(&self, index: usize) -> Result<Block> {
        self.kind.block(index)?.materialize(self.order.as_ref())
    }
}

fn pow_u64(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp)
        .filter(|&v| v <= i64::MAX as u64)
        .ok_or_else(|| range_err(format!("{base}^{exp}")))
}

/// Even block `E_i` and odd block `O_i` of the interleaved stream, `i >= 1`.
pub fn interleaved_blocks(i: u32) -> Result<(BlockRange, BlockRange)> {
    if i == 0 {
        return Err(ApError::Domain("interleaved blocks are indexed from 1".into()));
    }
    let four_i = pow_u64(4, i)? as i64;
    let even = BlockRange::checked((four_i + 2) / 3, 2, four_i as u64 / 2)?;
    let odd = BlockRange::checked((four_i + 2) / 6, 2, four_i as u64 / 4)?;
    Ok((even, odd))
}

/// `[a^{2i}, a^{2i+1}]`.
pub fn fourfree_block(a: u64, i: u32) -> Result<BlockRange> {
    if a < 2 {
        return Err(ApError::Domain(format!("fourfree base a={a} must be >= 2")));
    }
    let exp = i
        .checked_mul(2)
        .ok_or_else(|| range_err(format!("{a}^(2*{i})")))?;
    let lo = pow_u64(a, exp)?;
    let hi = pow_u64(a, exp + 1)?;
    BlockRange::checked(lo as i64, 1, hi - lo + 1)
}

/// `(p_k, q_k)`.
pub fn threefree_endpoints(k: u32) -> Result<(i64, i64)> {
    let (mut p, mut q) = (1i64, 2i64);
    for _ in 0..k {
        let next_q = q
            .checked_mul(3)
            .map(|x| x - 1)
            .ok_or_else(|| range_err(format!("q after {q}")))?;
        p = 2 * q;
        q = next_q;
    }
    Ok((p, q))
}

/// `[p_k, q_k]`.
pub fn threefree_block(k: u32) -> Result<BlockRange> {
    let (p, q) = threefree_endpoints(k)?;
    BlockRange::checked(p, 1, (q - p + 1) as u64)
}

/// Lazy, restartable walk over a block stream.
#[derive(Debug)]
pub struct StreamCursor {
    spec: BlockStreamSpec,
    block_index: usize,
    intra: usize,
    emitted: u64,
    current: Option<Block>,
}

pub fn stream(spec: &BlockStreamSpec) -> StreamCursor {
    StreamCursor {
        spec: spec.clone(),
        block_index: 0,
        intra: 0,
        emitted: 0,
        current: None,
    }
}

impl StreamCursor {
    pub fn spec(&self) -> &BlockStreamSpec {
        &self.spec
    }

    /// Index of the block the next value comes from.
    pub fn block_index(&self) -> usize {
        match &self.current {
            Some(b) if self.intra >= b.values.len() => self.block_index + 1,
            _ => self.block_index,
        }
    }

    /// True when the next value starts a new block.
    pub fn at_block_start(&self) -> bool {
        match &self.current {
            None => true,
            Some(b) => self.intra == 0 || self.intra >= b.values.len(),
        }
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn restart(&mut self) {
        self.block_index = 0;
        self.intra = 0;
        self.emitted = 0;
        self.current = None;
    }

    pub fn next_value(&mut self) -> Result<i64> {
        loop {
            match &self.current {
                Some(b) if self.intra < b.values.len() => {
                    let v = b.values.values()[self.intra];
                    self.intra += 1;
                    self.emitted += 1;
                    return Ok(v);
                }
                Some(_) => {
                    self.block_index += 1;
                    self.intra = 0;
                    self.current = Some(self.spec.block(self.block_index)?);
                }
                None => {
                    self.current = Some(self.spec.block(self.block_index)?);
                }
            }
        }
    }

    pub fn next_n(&mut self, n: usize) -> Result<Seq> {
        let values = (0..n).map(|_| self.next_value()).collect::<Result<Vec<_>>>()?;
        Seq::new(values)
    }
}

impl Iterator for StreamCursor {
    type Item = Result<i64>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_value())
    }
}

/// Result of a budgeted streaming search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StreamOutcome {
    Found { witness: ApWitness },
    BudgetExhausted { consumed: usize },
    SourceExhausted { consumed: usize },
}

impl StreamOutcome {
    pub fn witness(&self) -> Option<&ApWitness> {
        match self {
            StreamOutcome::Found { witness } => Some(witness),
            _ => None,
        }
    }
}

/// Tracks distinctness and positivity of consumed values.
struct Intake {
    seen: HashSet<i64>,
    consumed: usize,
}

impl Intake {
    fn new() -> Self {
        Intake {
            seen: HashSet::new(),
            consumed: 0,
        }
    }

    fn admit(&mut self, v: i64) -> Result<usize> {
        if v <= 0 {
            return Err(ApError::Domain(format!("stream value {v} is not positive")));
        }
        if !self.seen.insert(v) {
            return Err(ApError::Domain(format!(
                "stream value {v} repeated at position {}",
                self.consumed + 1
            )));
        }
        self.consumed += 1;
        Ok(self.consumed)
    }
}

/// Follows the first term `a_1`, the first later term `a_k > a_1`, and then
/// waits for `2 a_k - a_1`, which must arrive in any permutation of the
/// positive integers.
pub fn find_3ap_streaming<I>(source: I, budget: usize) -> Result<StreamOutcome>
where
    I: IntoIterator<Item = Result<i64>>,
{
    let mut intake = Intake::new();
    let mut first: Option<(usize, i64)> = None;
    let mut larger: Option<(usize, i64, i64)> = None;
    for item in source {
        if intake.consumed >= budget {
            return Ok(StreamOutcome::BudgetExhausted {
                consumed: intake.consumed,
            });
        }
        let v = item?;
        let pos = intake.admit(v)?;
        match (first, larger) {
            (None, _) => first = Some((pos, v)),
            (Some((_, a1)), None) if v > a1 => {
                let target = v
                    .checked_mul(2)
                    .map(|x| x - a1)
                    .ok_or_else(|| range_err(format!("2 * {v} - {a1}")))?;
                larger = Some((pos, v, target));
            }
            (Some((p1, a1)), Some((pk, ak, target))) if v == target => {
                return Ok(StreamOutcome::Found {
                    witness: ApWitness {
                        positions: vec![p1, pk, pos],
                        values: vec![a1, ak, v],
                        diff: ak - a1,
                    },
                });
            }
            _ => {}
        }
    }
    Ok(StreamOutcome::SourceExhausted {
        consumed: intake.consumed,
    })
}

/// Runs an incremental odd-difference 3AP detector over the stream and
/// returns the first triple to complete. Among triples completed by the
/// same value, the smallest `(first, middle)` positions win.
pub fn find_odd3ap_streaming<I>(source: I, budget: usize) -> Result<StreamOutcome>
where
    I: IntoIterator<Item = Result<i64>>,
{
    find_3ap_streaming_with(source, Parity::Odd, budget)
}

/// Incremental 3AP detection with a parity filter.
pub fn find_3ap_streaming_with<I>(source: I, parity: Parity, budget: usize) -> Result<StreamOutcome>
where
    I: IntoIterator<Item = Result<i64>>,
{
    let mut intake = Intake::new();
    let mut values: Vec<i64> = Vec::new();
    let mut position: HashMap<i64, usize> = HashMap::new();
    for item in source {
        if intake.consumed >= budget {
            return Ok(StreamOutcome::BudgetExhausted {
                consumed: intake.consumed,
            });
        }
        let z = item?;
        let pz = intake.admit(z)? - 1;
        let mut best: Option<(usize, usize)> = None;
        for (py, &y) in values.iter().enumerate() {
            let d = z - y;
            if !parity.accepts(d) {
                continue;
            }
            let Some(x) = y.checked_sub(d) else { continue };
            if let Some(&px) = position.get(&x) {
                if px < py && best.is_none_or(|b| (px, py) < b) {
                    best = Some((px, py));
                }
            }
        }
        if let Some((px, py)) = best {
            return Ok(StreamOutcome::Found {
                witness: ApWitness {
                    positions: vec![px + 1, py + 1, pz + 1],
                    values: vec![values[px], values[py], z],
                    diff: z - values[py],
                },
            });
        }
        position.insert(z, pz);
        values.push(z);
    }
    Ok(StreamOutcome::SourceExhausted {
        consumed: intake.consumed,
    })
}

/// The two ways an odd-difference 3AP is forced once the first even
/// (normalized) term `a_k` has arrived.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum OddCase {
    /// `a_j < 2 a_k - 1`: `(a_1, a_k, 2 a_k - 1)` will complete.
    Direct {
        pending: [i64; 3],
        /// 1-based position of the third term if it is already present.
        completed_at: Option<usize>,
    },
    /// `a_j >= 2 a_k - 1`: the eleven values `a_j + t d`, `t = -1..=9`,
    /// arrive in an order that starts 2, 1 once renumbered to `1..=11`.
    Watch {
        d: i64,
        watch_set: Vec<i64>,
        /// Arrival order of the watch values seen so far, renumbered.
        induced: Vec<i64>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamAnalysis {
    pub a1: i64,
    /// 1-based position of the first term whose normalized value is even.
    pub k: usize,
    pub ak: i64,
    pub aj: i64,
    pub case: OddCase,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OddExplanation {
    Ready(StreamAnalysis),
    /// No even term yet after normalization.
    InsufficientData,
}

/// Reports which branch of the odd-difference argument applies to a
/// prefix. Values below the first term are ignored and the rest are shifted
/// so the first term becomes 1; reported values are in the original scale.
pub fn explain_odd3ap(prefix: &Seq) -> Result<OddExplanation> {
    let values = prefix.values();
    let Some(&a1) = values.first() else {
        return Ok(OddExplanation::InsufficientData);
    };
    let shift = a1 - 1;
    let kept: Vec<(usize, i64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= a1)
        .map(|(i, &v)| (i + 1, v - shift))
        .collect();
    let Some(split) = kept.iter().position(|&(_, u)| u % 2 == 0) else {
        return Ok(OddExplanation::InsufficientData);
    };
    let (k, ak) = kept[split];
    let aj = kept[..split].iter().map(|&(_, u)| u).max().expect("first term precedes");
    let third = ak
        .checked_mul(2)
        .map(|x| x - 1)
        .ok_or_else(|| range_err(format!("2 * {ak} - 1")))?;
    let case = if aj < third {
        let completed_at = kept[split + 1..]
            .iter()
            .find(|&&(_, u)| u == third)
            .map(|&(p, _)| p);
        OddCase::Direct {
            pending: [a1, ak + shift, third + shift],
            completed_at,
        }
    } else {
        let d = aj - ak;
        let watch: Vec<i64> = (-1..=9)
            .map(|t| {
                d.checked_mul(t)
                    .and_then(|x| x.checked_add(aj))
                    .ok_or_else(|| range_err(format!("{aj} + {t} * {d}")))
            })
            .collect::<Result<_>>()?;
        let induced = kept
            .iter()
            .filter_map(|&(_, u)| watch.iter().position(|&w| w == u))
            .map(|t| t as i64 + 1)
            .collect();
        OddCase::Watch {
            d,
            watch_set: watch.iter().map(|&w| w + shift).collect(),
            induced,
        }
    };
    Ok(OddExplanation::Ready(StreamAnalysis {
        a1,
        k,
        ak: ak + shift,
        aj: aj + shift,
        case,
    }))
}
