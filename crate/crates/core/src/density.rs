//! Counting functions `A(n) = |S ∩ [1, n]|` and density profiles for the
//! block-built sets, plus the density lower-bound report they certify.
//!
//! All ratios are exact; floats appear only in rendering.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{range_err, ApError, Result};
use crate::infinite::StreamKind;

pub type Density = Ratio<u64>;

/// Agreement required between a closed-form density and the matching
/// profile tail.
pub const PROFILE_TOLERANCE: f64 = 0.01;

/// Exact `A(n)` by summing whole blocks; no enumeration.
pub fn membership_count(kind: StreamKind, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(ApError::Domain("membership_count needs n >= 1".into()));
    }
    let n = i64::try_from(n).map_err(|_| range_err(format!("n={n}")))?;
    let kind = kind.validate()?;
    let mut total = 0u64;
    // Interleaved blocks come in (even, odd) pairs whose starts grow
    // separately; odd starts are the smaller of each pair.
    for index in 0.. {
        let block = kind.block(index)?;
        let past = match kind {
            StreamKind::Interleaved => index % 2 == 1 && block.start > n,
            _ => block.start > n,
        };
        if past {
            break;
        }
        total += block.members_up_to(n);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Last element of a block: a local maximum of `A(n)/n`.
    BlockEnd,
    /// One before the next block: a local minimum of `A(n)/n`.
    GapEnd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensitySample {
    pub n: u64,
    pub count: u64,
    pub ratio: Density,
    pub kind: SampleKind,
    pub block: usize,
}

impl DensitySample {
    pub fn ratio_f64(&self) -> f64 {
        self.ratio.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub kind: StreamKind,
    pub samples: Vec<DensitySample>,
    /// Largest block-end ratio among the last three blocks.
    pub tail_max: Density,
    /// Smallest gap-end ratio among the last three gaps.
    pub tail_min: Density,
}

fn sparse_kind(kind: StreamKind) -> Result<StreamKind> {
    match kind.validate()? {
        StreamKind::Interleaved => Err(ApError::NotApplicable(
            "the interleaved stream covers every positive integer".into(),
        )),
        other => Ok(other),
    }
}

/// Samples `A(n)/n` at each block end and just before each following block,
/// for blocks `0..=k_max`.
pub fn density_profile(kind: StreamKind, k_max: usize) -> Result<DensityProfile> {
    let kind = sparse_kind(kind)?;
    if k_max < 1 {
        return Err(ApError::Domain("k_max must be >= 1".into()));
    }
    let mut samples = Vec::with_capacity(2 * (k_max + 1));
    let mut cumulative = 0u64;
    for index in 0..=k_max {
        let block = kind.block(index)?;
        let end = block.last()? as u64;
        cumulative += block.count;
        samples.push(DensitySample {
            n: end,
            count: cumulative,
            ratio: Ratio::new(cumulative, end),
            kind: SampleKind::BlockEnd,
            block: index,
        });
        let gap_end = kind.block(index + 1)?.start as u64 - 1;
        samples.push(DensitySample {
            n: gap_end,
            count: cumulative,
            ratio: Ratio::new(cumulative, gap_end),
            kind: SampleKind::GapEnd,
            block: index,
        });
    }
    let tail = |which: SampleKind| {
        samples
            .iter()
            .filter(move |s| s.kind == which)
            .rev()
            .take(3)
            .map(|s| s.ratio)
    };
    let tail_max = tail(SampleKind::BlockEnd).max().expect("at least one block");
    let tail_min = tail(SampleKind::GapEnd).min().expect("at least one gap");
    Ok(DensityProfile {
        kind,
        samples,
        tail_max,
        tail_min,
    })
}

/// `(upper, lower)` densities of the constructed sets, in closed form.
pub fn closed_form_densities(kind: StreamKind) -> Result<(Density, Density)> {
    match sparse_kind(kind)? {
        StreamKind::FourFree { a } => {
            let next = a.checked_add(1).ok_or_else(|| range_err(format!("{a} + 1")))?;
            Ok((Ratio::new(a, next), Ratio::new(1, next)))
        }
        StreamKind::ThreeFree => Ok((Ratio::new(1, 2), Ratio::new(1, 4))),
        StreamKind::Interleaved => unreachable!("rejected above"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    /// Best upper density of a 3-free set.
    #[serde(rename = "alpha(3)")]
    Alpha3,
    #[serde(rename = "alpha(4)")]
    Alpha4,
    /// Best lower density of a 3-free set.
    #[serde(rename = "beta(3)")]
    Beta3,
    #[serde(rename = "beta(4)")]
    Beta4,
    /// alpha(n) = beta(n) for every n >= 5.
    #[serde(rename = "alpha(n>=5)=beta(n>=5)")]
    AtLeastFive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Equality,
    LowerBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Stream { stream: StreamKind },
    /// The positive integers themselves admit an ordering with no 5-term AP.
    PositiveIntegers,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    pub profile_value: Density,
    pub deviation: f64,
    pub tolerance: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub quantity: Quantity,
    pub bound: Density,
    pub kind: BoundKind,
    pub witness: Witness,
    pub note: String,
    pub profile_check: Option<ProfileCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBoundsReport {
    pub k_max: usize,
    pub entries: Vec<BoundEntry>,
}

impl DensityBoundsReport {
    pub fn entry(&self, q: Quantity) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.quantity == q)
    }
}

fn check(closed: Density, profile: Density) -> ProfileCheck {
    let deviation = (closed.to_f64().unwrap_or(f64::NAN) - profile.to_f64().unwrap_or(f64::NAN)).abs();
    ProfileCheck {
        profile_value: profile,
        deviation,
        tolerance: PROFILE_TOLERANCE,
        within: deviation <= PROFILE_TOLERANCE,
    }
}

/// Density bounds certified by the constructions, each compared with the
/// tail of its profile up to block `k_max`.
pub fn alpha_beta_report(a_list: &[u64], k_max: usize) -> Result<DensityBoundsReport> {
    if a_list.is_empty() {
        return Err(ApError::Domain("a_list must be nonempty".into()));
    }
    let mut best_a = a_list[0];
    for &a in a_list {
        StreamKind::FourFree { a }.validate()?;
        if a > best_a {
            best_a = a;
        }
    }
    let four = |a| StreamKind::FourFree { a };

    let (upper, _) = closed_form_densities(four(best_a))?;
    let alpha4 = BoundEntry {
        quantity: Quantity::Alpha4,
        bound: upper,
        kind: BoundKind::LowerBound,
        witness: Witness::Stream { stream: four(best_a) },
        note: format!("a/(a+1) at a={best_a}; letting a grow without bound gives alpha(4) = 1"),
        profile_check: Some(check(upper, density_profile(four(best_a), k_max)?.tail_max)),
    };

    let (_, lower) = closed_form_densities(four(2))?;
    let beta4 = BoundEntry {
        quantity: Quantity::Beta4,
        bound: lower,
        kind: BoundKind::LowerBound,
        witness: Witness::Stream { stream: four(2) },
        note: "1/(a+1) at a=2".into(),
        profile_check: Some(check(lower, density_profile(four(2), k_max)?.tail_min)),
    };

    let three = density_profile(StreamKind::ThreeFree, k_max)?;
    let (t_upper, t_lower) = closed_form_densities(StreamKind::ThreeFree)?;
    let alpha3 = BoundEntry {
        quantity: Quantity::Alpha3,
        bound: t_upper,
        kind: BoundKind::LowerBound,
        witness: Witness::Stream { stream: StreamKind::ThreeFree },
        note: "upper density of the threefree block set".into(),
        profile_check: Some(check(t_upper, three.tail_max)),
    };
    let beta3 = BoundEntry {
        quantity: Quantity::Beta3,
        bound: t_lower,
        kind: BoundKind::LowerBound,
        witness: Witness::Stream { stream: StreamKind::ThreeFree },
        note: "lower density of the threefree block set".into(),
        profile_check: Some(check(t_lower, three.tail_min)),
    };

    let five = BoundEntry {
        quantity: Quantity::AtLeastFive,
        bound: Ratio::from_integer(1),
        kind: BoundKind::Equality,
        witness: Witness::PositiveIntegers,
        note: "the positive integers are 5-free and have density 1".into(),
        profile_check: None,
    };

    Ok(DensityBoundsReport {
        k_max,
        entries: vec![alpha3, alpha4, beta3, beta4, five],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        let four2 = StreamKind::FourFree { a: 2 };
        assert_eq!(membership_count(four2, 2).unwrap(), 2);
        assert_eq!(membership_count(four2, 2048).unwrap(), 1371);
        assert_eq!(membership_count(StreamKind::ThreeFree, 14).unwrap(), 9);
        assert_eq!(membership_count(StreamKind::Interleaved, 1000).unwrap(), 1000);
        assert!(membership_count(four2, 0).is_err());
    }

    #[test]
    fn profile_examples() {
        let p = density_profile(StreamKind::FourFree { a: 2 }, 5).unwrap();
        let s = p.samples.iter().find(|s| s.n == 2048).unwrap();
        assert_eq!((s.count, s.ratio), (1371, Ratio::new(1371, 2048)));

        let p = density_profile(StreamKind::ThreeFree, 8).unwrap();
        let s = p.samples.iter().find(|s| s.n == 9842).unwrap();
        assert_eq!(s.count, 4926);
        assert_eq!(s.kind, SampleKind::BlockEnd);
        let s = p.samples.iter().find(|s| s.n == 19683).unwrap();
        assert_eq!(s.count, 4926);
        assert_eq!(s.kind, SampleKind::GapEnd);
        assert!((s.ratio_f64() - 0.2503).abs() < 1e-4);

        let p = density_profile(StreamKind::ThreeFree, 2).unwrap();
        assert!(p.samples.iter().any(|s| (s.n, s.count) == (14, 9)));
    }

    #[test]
    fn profile_counts_match_membership() {
        for kind in [StreamKind::FourFree { a: 3 }, StreamKind::ThreeFree] {
            let p = density_profile(kind, 6).unwrap();
            for s in &p.samples {
                assert_eq!(s.count, membership_count(kind, s.n).unwrap());
            }
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(
            closed_form_densities(StreamKind::FourFree { a: 2 }).unwrap(),
            (Ratio::new(2, 3), Ratio::new(1, 3))
        );
        assert_eq!(
            closed_form_densities(StreamKind::FourFree { a: 5 }).unwrap(),
            (Ratio::new(5, 6), Ratio::new(1, 6))
        );
        assert_eq!(
            closed_form_densities(StreamKind::ThreeFree).unwrap(),
            (Ratio::new(1, 2), Ratio::new(1, 4))
        );
        assert!(matches!(
            closed_form_densities(StreamKind::Interleaved),
            Err(ApError::NotApplicable(_))
        ));
    }

    #[test]
    fn report_examples() {
        let r = alpha_beta_report(&[2], 8).unwrap();
        let b4 = r.entry(Quantity::Beta4).unwrap();
        assert_eq!(b4.bound, Ratio::new(1, 3));
        assert_eq!(b4.witness, Witness::Stream { stream: StreamKind::FourFree { a: 2 } });

        let r = alpha_beta_report(&[2, 10], 4).unwrap();
        assert_eq!(r.entry(Quantity::Alpha4).unwrap().bound, Ratio::new(10, 11));
        let a3 = r.entry(Quantity::Alpha3).unwrap();
        assert_eq!(a3.bound, Ratio::new(1, 2));
        assert_eq!(a3.witness, Witness::Stream { stream: StreamKind::ThreeFree });
        let five = r.entry(Quantity::AtLeastFive).unwrap();
        assert_eq!((five.bound, five.kind), (Ratio::from_integer(1), BoundKind::Equality));

        assert!(alpha_beta_report(&[], 4).is_err());
        assert!(alpha_beta_report(&[1], 4).is_err());
    }

    #[test]
    fn report_tails_agree_at_documented_depth() {
        let r = alpha_beta_report(&[2], 8).unwrap();
        for e in &r.entries {
            if let Some(c) = &e.profile_check {
                assert!(c.within, "{:?} deviates by {}", e.quantity, c.deviation);
            }
        }
    }
}
