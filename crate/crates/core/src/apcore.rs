//! Sequences of distinct positive integers and detection of arithmetic
//! progressions hidden in them as subsequences.
//!
//! A k-term AP subsequence is a choice of positions `i_1 < ... < i_k` whose
//! values read left to right are `v, v + d, ..., v + (k - 1) d` for some
//! nonzero `d`. Decreasing progressions (`d < 0`) count. Parity filters look
//! at `|d|`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{range_err, ApError, Result};

/// A finite sequence of pairwise distinct positive integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Seq(Vec<i64>);

impl Seq {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if v <= 0 {
                return Err(ApError::Domain(format!(
                    "value {v} at position {} is not positive",
                    i + 1
                )));
            }
            if !seen.insert(v) {
                return Err(ApError::Domain(format!(
                    "value {v} repeated at position {}",
                    i + 1
                )));
            }
        }
        Ok(Seq(values))
    }

    pub fn empty() -> Self {
        Seq(Vec::new())
    }

    /// Caller guarantees positivity and distinctness.
    pub(crate) fn from_vec_unchecked(values: Vec<i64>) -> Self {
        debug_assert!(Seq::new(values.clone()).is_ok());
        Seq(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<i64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Returns `n` when the sequence is a permutation of `{1..n}`.
    pub fn permutation_size(&self) -> Option<usize> {
        let n = self.0.len();
        self.0
            .iter()
            .all(|&v| v >= 1 && v as u64 <= n as u64)
            .then_some(n)
    }

    /// Parses whitespace- or comma-separated decimal integers.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|e| ApError::Domain(format!("cannot parse {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Seq::new(values)
    }
}

impl TryFrom<Vec<i64>> for Seq {
    type Error = ApError;

    fn try_from(values: Vec<i64>) -> Result<Self> {
        Seq::new(values)
    }
}

impl From<Seq> for Vec<i64> {
    fn from(seq: Seq) -> Self {
        seq.0
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Which common differences count, judged on `|d|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    #[default]
    Any,
    Odd,
    Even,
}

impl Parity {
    pub const ALL: [Parity; 3] = [Parity::Any, Parity::Odd, Parity::Even];

    #[inline]
    pub fn accepts(self, diff: i64) -> bool {
        match self {
            Parity::Any => true,
            Parity::Odd => diff.unsigned_abs() % 2 == 1,
            Parity::Even => diff.unsigned_abs().is_multiple_of(2),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Any => "any",
            Parity::Odd => "odd",
            Parity::Even => "even",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Parity {
    type Err = ApError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(Parity::Any),
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            other => Err(ApError::Domain(format!(
                "unknown parity {other:?} (expected any, odd or even)"
            ))),
        }
    }
}

/// The progression to avoid: `k` terms, difference parity filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConstraint")]
pub struct ApConstraint {
    k: usize,
    parity: Parity,
}

#[derive(Deserialize)]
struct RawConstraint {
    k: usize,
    parity: Parity,
}

impl TryFrom<RawConstraint> for ApConstraint {
    type Error = ApError;

    fn try_from(raw: RawConstraint) -> Result<Self> {
        ApConstraint::new(raw.k, raw.parity)
    }
}

impl ApConstraint {
    pub fn new(k: usize, parity: Parity) -> Result<Self> {
        if k < 3 {
            return Err(ApError::Domain(format!("term count k={k} must be at least 3")));
        }
        Ok(ApConstraint { k, parity })
    }

    pub fn three(parity: Parity) -> Self {
        ApConstraint { k: 3, parity }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }
}

impl fmt::Display for ApConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} parity={}", self.k, self.parity)
    }
}

/// A located progression: 1-based positions, the values there, and `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApWitness {
    pub positions: Vec<usize>,
    pub values: Vec<i64>,
    pub diff: i64,
}

impl ApWitness {
    /// Re-checks every witness invariant against the host sequence.
    pub fn is_valid_for(&self, seq: &[i64], parity: Parity) -> bool {
        if self.positions.len() != self.values.len() || self.positions.len() < 2 {
            return false;
        }
        if self.diff == 0 || !parity.accepts(self.diff) {
            return false;
        }
        if self.positions.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        let mut expected = self.values[0] as i128;
        for (&p, &v) in self.positions.iter().zip(&self.values) {
            if p == 0 || p > seq.len() || seq[p - 1] != v || v as i128 != expected {
                return false;
            }
            expected += self.diff as i128;
        }
        true
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Value-to-position lookup. Dense when the values are compact.
pub(crate) enum PositionIndex {
    Dense { min: i64, slots: Vec<u32> },
    Sparse(HashMap<i64, usize>),
}

impl PositionIndex {
    const ABSENT: u32 = u32::MAX;

    pub(crate) fn new(values: &[i64]) -> Self {
        let (Some(&min), Some(&max)) = (values.iter().min(), values.iter().max()) else {
            return PositionIndex::Sparse(HashMap::new());
        };
        let span = (max as i128 - min as i128 + 1) as u128;
        if span <= 4 * values.len() as u128 + 64 && values.len() < u32::MAX as usize {
            let mut slots = vec![Self::ABSENT; span as usize];
            for (i, &v) in values.iter().enumerate() {
                slots[(v - min) as usize] = i as u32;
            }
            PositionIndex::Dense { min, slots }
        } else {
            PositionIndex::Sparse(values.iter().enumerate().map(|(i, &v)| (v, i)).collect())
        }
    }

    /// 0-based position of `value`.
    #[inline]
    pub(crate) fn get(&self, value: i64) -> Option<usize> {
        match self {
            PositionIndex::Dense { min, slots } => {
                let off = value.checked_sub(*min)?;
                if off < 0 {
                    return None;
                }
                match slots.get(off as usize) {
                    Some(&p) if p != Self::ABSENT => Some(p as usize),
                    _ => None,
                }
            }
            PositionIndex::Sparse(map) => map.get(&value).copied(),
        }
    }
}

#[inline]
fn advance(value: i64, diff: i64) -> Result<i64> {
    value
        .checked_add(diff)
        .ok_or_else(|| range_err(format!("{value} + {diff}")))
}

#[inline]
fn retreat(value: i64, diff: i64) -> Result<i64> {
    value
        .checked_sub(diff)
        .ok_or_else(|| range_err(format!("{value} - {diff}")))
}

fn witness(values: &[i64], start: usize, diff: i64, positions: Vec<usize>) -> ApWitness {
    debug_assert_eq!(values[positions[0]], values[start]);
    ApWitness {
        values: positions.iter().map(|&p| values[p]).collect(),
        positions: positions.into_iter().map(|p| p + 1).collect(),
        diff,
    }
}

/// Finds the k-term AP subsequence with the lexicographically smallest
/// position tuple, or `None` if the sequence avoids the constraint.
///
/// Every progression is fixed by its first two positions, so scanning
/// `(p1, p2)` in lexicographic order and extending forward through the
/// value index visits candidates in exactly the tie-break order.
pub fn find_ap(seq: &Seq, c: ApConstraint) -> Result<Option<ApWitness>> {
    let values = seq.values();
    let index = PositionIndex::new(values);
    let k = c.k();
    for p1 in 0..values.len() {
        for p2 in p1 + 1..values.len() {
            let diff = values[p2] - values[p1];
            if !c.parity().accepts(diff) {
                continue;
            }
            let mut terms = 2;
            let mut last = values[p2];
            let mut last_pos = p2;
            while terms < k {
                match index.get(advance(last, diff)?) {
                    Some(p) if p > last_pos => {
                        last += diff;
                        last_pos = p;
                        terms += 1;
                    }
                    _ => break,
                }
            }
            if terms == k {
                let mut positions = Vec::with_capacity(k);
                let mut v = values[p1];
                for _ in 0..k {
                    positions.push(index.get(v).expect("term located above"));
                    v += diff;
                }
                return Ok(Some(witness(values, p1, diff, positions)));
            }
        }
    }
    Ok(None)
}

/// Length of the longest AP subsequence whose difference matches `parity`,
/// with one witness of that length (lexicographically smallest positions).
///
/// Returns `(0, None)` for an empty sequence and `(1, None)` when no
/// parity-matching pair exists.
///
/// Each pair of positions is the consecutive pair of exactly one maximal
/// chain, so walking forward only from pairs that cannot be extended
/// backwards touches every pair once: O(n^2) time, O(n) space.
pub fn longest_ap(seq: &Seq, parity: Parity) -> Result<(usize, Option<ApWitness>)> {
    let values = seq.values();
    if values.is_empty() {
        return Ok((0, None));
    }
    let index = PositionIndex::new(values);
    let mut best_len = 1;
    let mut best: Option<(usize, usize)> = None;
    for p1 in 0..values.len() {
        for p2 in p1 + 1..values.len() {
            let diff = values[p2] - values[p1];
            if !parity.accepts(diff) {
                continue;
            }
            if matches!(index.get(retreat(values[p1], diff)?), Some(p) if p < p1) {
                continue;
            }
            let mut len = 2;
            let mut last = values[p2];
            let mut last_pos = p2;
            loop {
                match index.get(advance(last, diff)?) {
                    Some(p) if p > last_pos => {
                        last += diff;
                        last_pos = p;
                        len += 1;
                    }
                    _ => break,
                }
            }
            if len > best_len {
                best_len = len;
                best = Some((p1, p2));
            }
        }
    }
    let witness = best.map(|(p1, p2)| {
        let diff = values[p2] - values[p1];
        let positions = (0..best_len as i64)
            .map(|t| index.get(values[p1] + t * diff).expect("chain term"))
            .collect();
        witness(values, p1, diff, positions)
    });
    Ok((best_len, witness))
}

/// Quick yes/no for 3AP-freeness of a permutation of `{1..n}`.
pub fn is_three_free_permutation(perm: &[i64]) -> bool {
    let n = perm.len();
    let mut pos = vec![usize::MAX; n + 1];
    for (i, &v) in perm.iter().enumerate() {
        debug_assert!(v >= 1 && v as usize <= n);
        pos[v as usize] = i;
    }
    for j in 0..n {
        let twice = 2 * perm[j];
        for &x in &perm[..j] {
            let z = twice - x;
            if z >= 1 && (z as usize) <= n && pos[z as usize] > j {
                return false;
            }
        }
    }
    true
}

/// A 3AP-free permutation of `{1..n}`: the evens (a scaled copy of the
/// construction on `{1..n/2}`) followed by the odds. Any 3AP has first and
/// third terms of equal parity, so none can straddle the two halves.
///
/// `n = 1` and `n = 2` are emitted in increasing order.
pub fn canonical_apfree_perm(n: usize) -> Seq {
    assert!(n >= 1, "canonical permutation needs n >= 1");
    let mut out = Vec::with_capacity(n);
    fill_canonical(n, 1, 0, &mut out);
    Seq::from_vec_unchecked(out)
}

/// Appends `scale * f(n) + shift` to `out`.
fn fill_canonical(n: usize, scale: i64, shift: i64, out: &mut Vec<i64>) {
    match n {
        0 => {}
        1 => out.push(scale + shift),
        2 => {
            out.push(scale + shift);
            out.push(2 * scale + shift);
        }
        _ => {
            fill_canonical(n / 2, 2 * scale, shift, out);
            fill_canonical(n.div_ceil(2), 2 * scale, shift - scale, out);
        }
    }
}

/// `t -> start + (t - 1) * step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineMap {
    start: i64,
    step: i64,
}

impl AffineMap {
    pub fn new(start: i64, step: i64) -> Result<Self> {
        if step < 1 {
            return Err(ApError::Domain(format!("affine step {step} must be >= 1")));
        }
        Ok(AffineMap { start, step })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn step(&self) -> i64 {
        self.step
    }

    pub fn apply(&self, t: i64) -> Result<i64> {
        (t - 1)
            .checked_mul(self.step)
            .and_then(|x| x.checked_add(self.start))
            .ok_or_else(|| range_err(format!("{} + ({t} - 1) * {}", self.start, self.step)))
    }
}

/// Relabels a permutation of `{1..m}` onto `{start, start + step, ...}`.
/// AP subsequences correspond in both directions.
pub fn affine_image(perm: &Seq, map: AffineMap) -> Result<Seq> {
    if perm.permutation_size().is_none() {
        return Err(ApError::Domain(format!(
            "affine_image expects a permutation of 1..{}",
            perm.len()
        )));
    }
    if !perm.is_empty() {
        map.apply(perm.len() as i64)?;
    }
    let out = perm
        .values()
        .iter()
        .map(|&t| map.apply(t))
        .collect::<Result<Vec<_>>>()?;
    if out.iter().any(|&v| v <= 0) {
        return Err(ApError::Domain(format!(
            "affine image starting at {} leaves the positive integers",
            map.start()
        )));
    }
    Ok(Seq::from_vec_unchecked(out))
}

pub fn reverse(seq: &Seq) -> Seq {
    Seq::from_vec_unchecked(seq.values().iter().rev().copied().collect())
}

/// `v -> n + 1 - v` on a permutation of `{1..n}`.
pub fn complement(seq: &Seq) -> Result<Seq> {
    let n = seq
        .permutation_size()
        .ok_or_else(|| ApError::Domain("complement expects a permutation of 1..n".into()))?;
    Ok(Seq::from_vec_unchecked(
        seq.values().iter().map(|&v| n as i64 + 1 - v).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[i64]) -> Seq {
        Seq::new(v.to_vec()).unwrap()
    }

    fn any3() -> ApConstraint {
        ApConstraint::three(Parity::Any)
    }

    #[test]
    fn identity_is_an_ap() {
        let w = find_ap(&s(&[1, 2, 3]), any3()).unwrap().unwrap();
        assert_eq!(w.positions, vec![1, 2, 3]);
        assert_eq!(w.diff, 1);
    }

    #[test]
    fn two_four_one_three_is_free() {
        assert!(find_ap(&s(&[2, 4, 1, 3]), any3()).unwrap().is_none());
    }

    #[test]
    fn one_two_four_three_contains_one_two_three() {
        let w = find_ap(&s(&[1, 2, 4, 3]), any3()).unwrap().unwrap();
        assert_eq!(w.values, vec![1, 2, 3]);
        assert_eq!(w.positions, vec![1, 2, 4]);
        assert_eq!(w.diff, 1);
    }

    #[test]
    fn odd_filter_finds_8_9_10() {
        let c = ApConstraint::three(Parity::Odd);
        let w = find_ap(&s(&[8, 11, 9, 10]), c).unwrap().unwrap();
        assert_eq!(w.values, vec![8, 9, 10]);
        assert_eq!(w.diff, 1);
    }

    #[test]
    fn decreasing_progressions_count() {
        let w = find_ap(&s(&[11, 10, 9]), ApConstraint::three(Parity::Odd))
            .unwrap()
            .unwrap();
        assert_eq!(w.diff, -1);
    }

    #[test]
    fn even_filter_ignores_unit_steps() {
        let c = ApConstraint::three(Parity::Even);
        assert!(find_ap(&s(&[1, 2, 3]), c).unwrap().is_none());
        let w = find_ap(&s(&[1, 2, 3, 5]), c).unwrap().unwrap();
        assert_eq!(w.values, vec![1, 3, 5]);
    }

    #[test]
    fn longest_examples() {
        assert_eq!(longest_ap(&s(&[1, 2, 3, 4]), Parity::Any).unwrap().0, 4);
        assert_eq!(longest_ap(&s(&[2, 4, 1, 3]), Parity::Any).unwrap().0, 2);
        let (len, w) = longest_ap(&s(&[1, 3, 5, 2]), Parity::Odd).unwrap();
        assert_eq!(len, 2);
        assert!(w.unwrap().is_valid_for(&[1, 3, 5, 2], Parity::Odd));
        assert_eq!(longest_ap(&Seq::empty(), Parity::Any).unwrap(), (0, None));
        assert_eq!(longest_ap(&s(&[2, 4]), Parity::Odd).unwrap(), (1, None));
    }

    #[test]
    fn canonical_small_cases() {
        assert_eq!(canonical_apfree_perm(1).values(), &[1]);
        assert_eq!(canonical_apfree_perm(2).values(), &[1, 2]);
        assert_eq!(canonical_apfree_perm(3).values(), &[2, 1, 3]);
        assert_eq!(canonical_apfree_perm(4).values(), &[2, 4, 1, 3]);
    }

    #[test]
    fn canonical_is_deterministic_and_free() {
        for n in 1..=300 {
            let p = canonical_apfree_perm(n);
            assert_eq!(p, canonical_apfree_perm(n));
            assert_eq!(p.permutation_size(), Some(n));
            assert!(find_ap(&p, any3()).unwrap().is_none(), "n={n}");
        }
    }

    #[test]
    fn affine_examples() {
        let m = AffineMap::new(2, 2).unwrap();
        assert_eq!(affine_image(&s(&[1, 2]), m).unwrap().values(), &[2, 4]);
        let m = AffineMap::new(3, 2).unwrap();
        assert_eq!(affine_image(&s(&[2, 4, 1, 3]), m).unwrap().values(), &[5, 9, 3, 7]);
        let m = AffineMap::new(7, 4).unwrap();
        assert_eq!(affine_image(&s(&[1]), m).unwrap().values(), &[7]);
    }

    #[test]
    fn affine_rejects_bad_input() {
        assert!(AffineMap::new(1, 0).is_err());
        let m = AffineMap::new(1, 1).unwrap();
        assert!(matches!(affine_image(&s(&[1, 3]), m), Err(ApError::Domain(_))));
        let m = AffineMap::new(-5, 1).unwrap();
        assert!(matches!(affine_image(&s(&[1, 2]), m), Err(ApError::Domain(_))));
        let m = AffineMap::new(1, i64::MAX / 2).unwrap();
        assert!(matches!(
            affine_image(&s(&[1, 2, 3, 4]), m),
            Err(ApError::ArithmeticRange(_))
        ));
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(reverse(&s(&[2, 4, 1, 3])).values(), &[3, 1, 4, 2]);
        assert_eq!(complement(&s(&[2, 4, 1, 3])).unwrap().values(), &[3, 1, 4, 2]);
        assert_eq!(reverse(&s(&[1])).values(), &[1]);
        assert!(matches!(complement(&s(&[1, 5])), Err(ApError::Domain(_))));
    }

    #[test]
    fn seq_validation() {
        assert!(Seq::new(vec![1, 1]).is_err());
        assert!(Seq::new(vec![0]).is_err());
        assert!(Seq::new(vec![-3]).is_err());
        assert_eq!(Seq::parse("2 4,1\n3").unwrap().values(), &[2, 4, 1, 3]);
        assert!(Seq::parse("1 x").is_err());
        assert_eq!(s(&[2, 4, 1, 3]).to_string(), "2 4 1 3");
    }

    #[test]
    fn constraint_validation() {
        assert!(ApConstraint::new(2, Parity::Any).is_err());
        assert!("weird".parse::<Parity>().is_err());
        assert_eq!("odd".parse::<Parity>().unwrap(), Parity::Odd);
        let c: std::result::Result<ApConstraint, _> =
            serde_json::from_str(r#"{"k":1,"parity":"any"}"#);
        assert!(c.is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = i64::MAX - 1;
        let seq = s(&[1, big]);
        assert!(matches!(find_ap(&seq, any3()), Err(ApError::ArithmeticRange(_))));
    }

    #[test]
    fn sparse_values_use_hash_index() {
        let seq = s(&[1_000_000, 7, 2_000_000 - 7, 3, 1_999_993 * 2 - 1_000_000]);
        let w = find_ap(&seq, any3()).unwrap().unwrap();
        assert!(w.is_valid_for(seq.values(), Parity::Any));
        assert_eq!(w.positions, vec![1, 3, 5]);
    }
}
