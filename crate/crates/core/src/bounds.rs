//! Exact checks of the known inequalities on `M(n)`, the number of
//! 3AP-free permutations of `{1..n}`.
//!
//! Every verdict is an integer comparison: `2.7` is `27/10`, and
//! `M(n) >= c^n / 2` with `c = 2132^{1/10}` becomes `(2M)^10 >= 2132^n`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::apcore::{ApConstraint, Parity};
use crate::counting::{count_apfree, oracle_count, CountQuery, SearchOptions};
use crate::error::{ApError, Result};

/// Published values of `M(n)`.
pub const PUBLISHED_COUNTS: [(usize, u64); 9] = [
    (4, 10),
    (8, 282),
    (9, 496),
    (10, 1066),
    (11, 2460),
    (12, 6128),
    (13, 12840),
    (14, 29380),
    (15, 73904),
];

/// `c^10` for the lower-bound constant `c`.
pub const LOWER_BOUND_BASE_POW10: u64 = 2132;

pub fn published_count(n: usize) -> Option<BigUint> {
    PUBLISHED_COUNTS
        .iter()
        .find(|&&(m, _)| m == n)
        .map(|&(_, c)| BigUint::from(c))
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(2^{n-1}, floor((n+1)/2)! * ceil((n+1)/2)!)`.
pub fn davis_bounds(n: usize) -> Result<(BigUint, BigUint)> {
    if n == 0 {
        return Err(ApError::Domain("davis_bounds needs n >= 1".into()));
    }
    let lower = BigUint::one() << (n - 1);
    let half = (n as u64).div_ceil(2);
    let upper = factorial(half) * factorial((n as u64 + 2) / 2);
    Ok((lower, upper))
}

/// `M <= 2.7^n / 21`, as `21 * 10^n * M <= 27^n`. Asserted only for `n >= 11`.
pub fn sharma_upper_holds(n: usize, m: &BigUint) -> Result<bool> {
    if n < 11 {
        return Err(ApError::Domain(format!("upper bound is stated for n >= 11, got {n}")));
    }
    let lhs = m * 21u32 * Pow::pow(BigUint::from(10u32), n);
    let rhs = Pow::pow(BigUint::from(27u32), n);
    Ok(lhs <= rhs)
}

/// `M >= c^n / 2` with `c^10 = 2132`, as `(2M)^10 >= 2132^n`. Stated for `n >= 8`.
pub fn exponential_lower_holds(n: usize, m: &BigUint) -> Result<bool> {
    if n < 8 {
        return Err(ApError::Domain(format!("lower bound is stated for n >= 8, got {n}")));
    }
    let (lhs, rhs) = lower_bound_sides(n, m);
    Ok(lhs >= rhs)
}

/// `((2M)^10, 2132^n)`.
pub fn lower_bound_sides(n: usize, m: &BigUint) -> (BigUint, BigUint) {
    let lhs = Pow::pow(m * 2u32, 10u32);
    let rhs = Pow::pow(BigUint::from(LOWER_BOUND_BASE_POW10), n);
    (lhs, rhs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceCheck {
    /// Human-readable relation, e.g. `M(8) >= 2*M(4)^2`.
    pub relation: String,
    pub n: usize,
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub holds: bool,
}

/// Evaluates `M(2n) >= 2 M(n)^2` and `M(2n+1) >= 2 M(n) M(n+1)` wherever the
/// needed values are present. Missing values are skipped.
pub fn recurrence_check(values: &BTreeMap<usize, BigUint>) -> Vec<RecurrenceCheck> {
    let mut out = Vec::new();
    for (&n, m) in values {
        if let Some(even) = values.get(&(2 * n)) {
            let rhs = m * m * 2u32;
            out.push(RecurrenceCheck {
                relation: format!("M({}) >= 2*M({n})^2", 2 * n),
                n: 2 * n,
                holds: *even >= rhs,
                lhs: even.clone(),
                rhs,
            });
        }
        if let (Some(next), Some(odd)) = (values.get(&(n + 1)), values.get(&(2 * n + 1))) {
            let rhs = m * next * 2u32;
            out.push(RecurrenceCheck {
                relation: format!("M({}) >= 2*M({n})*M({})", 2 * n + 1, n + 1),
                n: 2 * n + 1,
                holds: *odd >= rhs,
                lhs: odd.clone(),
                rhs,
            });
        }
    }
    out.sort_by_key(|c| c.n);
    out
}

/// If the lower bound holds at `n` (and `n + 1`), it holds for the values
/// the doubling recurrences guarantee at `2n` (and `2n + 1`).
pub fn induction_step_holds(n: usize, m_n: &BigUint, m_next: Option<&BigUint>) -> Result<bool> {
    if !exponential_lower_holds(n, m_n)? {
        return Ok(false);
    }
    let even = m_n * m_n * 2u32;
    let mut ok = exponential_lower_holds(2 * n, &even)?;
    if let Some(m_next) = m_next {
        if exponential_lower_holds(n + 1, m_next)? {
            ok &= exponential_lower_holds(2 * n + 1, &(m_n * m_next * 2u32))?;
        }
    }
    Ok(ok)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Published,
    Computed,
    /// Computed and equal to the published value.
    PublishedAndComputed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountsSource {
    /// Published table only.
    Published,
    /// Exhaustive pruned search.
    Search(SearchOptions),
    /// Factorial enumeration (`n <= 10`).
    Oracle,
    /// Search everywhere; where a published value exists the two must agree.
    PublishedChecked(SearchOptions),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub n: usize,
    pub m: Option<BigUint>,
    pub source: Option<Provenance>,
    pub davis_lower_ok: Option<bool>,
    pub davis_upper_ok: Option<bool>,
    /// Only for `n >= 11`.
    pub sharma_ok: Option<bool>,
    /// Only for `n >= 8`.
    pub exponential_ok: Option<bool>,
    /// `(2M)^10 == 2132^n`.
    pub exponential_equality: Option<bool>,
}

impl LedgerRow {
    fn from_value(n: usize, m: Option<(BigUint, Provenance)>) -> Result<Self> {
        let Some((m, source)) = m else {
            return Ok(LedgerRow {
                n,
                m: None,
                source: None,
                davis_lower_ok: None,
                davis_upper_ok: None,
                sharma_ok: None,
                exponential_ok: None,
                exponential_equality: None,
            });
        };
        let (lo, hi) = davis_bounds(n)?;
        let (lhs, rhs) = lower_bound_sides(n, &m);
        Ok(LedgerRow {
            n,
            davis_lower_ok: Some(lo <= m),
            davis_upper_ok: Some(m <= hi),
            sharma_ok: (n >= 11).then(|| sharma_upper_holds(n, &m)).transpose()?,
            exponential_ok: (n >= 8).then_some(lhs >= rhs),
            exponential_equality: (n >= 8).then_some(lhs == rhs),
            m: Some(m),
            source: Some(source),
        })
    }

    pub fn available(&self) -> bool {
        self.m.is_some()
    }

    /// True when every applicable flag holds.
    pub fn all_ok(&self) -> bool {
        [self.davis_lower_ok, self.davis_upper_ok, self.sharma_ok, self.exponential_ok]
            .iter()
            .all(|f| f.unwrap_or(true))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundLedger {
    pub rows: Vec<LedgerRow>,
    pub recurrences: Vec<RecurrenceCheck>,
}

impl BoundLedger {
    pub fn row(&self, n: usize) -> Option<&LedgerRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn values(&self) -> BTreeMap<usize, BigUint> {
        self.rows
            .iter()
            .filter_map(|r| r.m.clone().map(|m| (r.n, m)))
            .collect()
    }
}

fn computed(n: usize, source: CountsSource) -> Result<BigUint> {
    let q = CountQuery::unprefixed(n, ApConstraint::three(Parity::Any))?;
    match source {
        CountsSource::Oracle => Ok(oracle_count(&q)?.count),
        CountsSource::Search(opts) | CountsSource::PublishedChecked(opts) => {
            Ok(count_apfree(&q, &opts)?.count)
        }
        CountsSource::Published => unreachable!("published source never computes"),
    }
}

/// One row per `n` in `1..=n_max`, plus every recurrence the available
/// values allow.
pub fn bounds_ledger(n_max: usize, source: CountsSource) -> Result<BoundLedger> {
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let value = match source {
            CountsSource::Published => published_count(n).map(|m| (m, Provenance::Published)),
            CountsSource::Search(_) | CountsSource::Oracle => {
                Some((computed(n, source)?, Provenance::Computed))
            }
            CountsSource::PublishedChecked(_) => {
                let m = computed(n, source)?;
                match published_count(n) {
                    Some(p) if p != m => {
                        return Err(ApError::ProvenanceMismatch {
                            n,
                            table: p.to_string(),
                            computed: m.to_string(),
                        })
                    }
                    Some(_) => Some((m, Provenance::PublishedAndComputed)),
                    None => Some((m, Provenance::Computed)),
                }
            }
        };
        rows.push(LedgerRow::from_value(n, value)?);
    }
    let mut ledger = BoundLedger {
        rows,
        recurrences: Vec::new(),
    };
    ledger.recurrences = recurrence_check(&ledger.values());
    Ok(ledger)
}
