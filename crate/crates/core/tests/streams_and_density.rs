use std::collections::HashSet;

use apfree::apcore::{find_ap, is_three_free_permutation};
use apfree::density::{closed_form_densities, density_profile, membership_count, SampleKind};
use apfree::infinite::{
    fourfree_block, interleaved_blocks, stream, threefree_block, threefree_endpoints, BlockStreamSpec,
    StreamKind,
};
use apfree::{ApConstraint, Parity, Seq};
use num_traits::ToPrimitive;

const KINDS: [StreamKind; 3] = [
    StreamKind::Interleaved,
    StreamKind::FourFree { a: 2 },
    StreamKind::ThreeFree,
];

#[test]
fn emitted_set_is_union_of_finished_blocks() {
    for kind in KINDS {
        let spec = BlockStreamSpec::new(kind).unwrap();
        let mut cursor = stream(&spec);
        let mut emitted = HashSet::new();
        let mut expected = HashSet::new();
        for index in 0..9 {
            let block = spec.block(index).unwrap();
            for _ in 0..block.range.count {
                assert!(emitted.insert(cursor.next_value().unwrap()), "{kind}: repeated value");
            }
            let r = block.range;
            expected.extend((0..r.count as i64).map(|t| r.start + t * r.step));
            assert_eq!(emitted, expected, "{kind} after block {index}");
        }
    }
}

#[test]
fn interleaved_stream_covers_integers_once() {
    let spec = BlockStreamSpec::new(StreamKind::Interleaved).unwrap();
    for i in 1..=7u32 {
        // After the pair (E_i, O_i): evens 2..=(4^{i+1}-4)/3, odds 1..=(4^{i+1}-10)/6.
        let mut cursor = stream(&spec);
        let len: u64 = (1..=i).map(|j| 4u64.pow(j) / 2 + 4u64.pow(j) / 4).sum();
        let values = cursor.next_n(len as usize).unwrap();
        let top_even = (4i64.pow(i + 1) - 4) / 3;
        let top_odd = (4i64.pow(i + 1) - 10) / 6;
        let expected: HashSet<i64> = (1..=top_even)
            .filter(|v| if v % 2 == 0 { *v <= top_even } else { *v <= top_odd })
            .collect();
        let got: HashSet<i64> = values.values().iter().copied().collect();
        assert_eq!(got, expected, "i={i}");
    }

    let mut cursor = stream(&spec);
    let values = cursor.next_n(100_000).unwrap();
    let mut seen = vec![false; 1 << 20];
    let mut frontier = 0;
    let mut running_min_missing = 1;
    for &v in values.values() {
        seen[v as usize] = true;
        while seen[running_min_missing] {
            running_min_missing += 1;
        }
        frontier = frontier.max(running_min_missing);
    }
    // Every integer below the first gap has been emitted exactly once
    // (distinctness is enforced by `next_n`).
    assert!(frontier > 40_000, "frontier {frontier}");
    assert!((1..frontier).all(|v| seen[v]));
}

#[test]
fn blocks_are_separated() {
    for i in 1..=29 {
        let (_, odd) = interleaved_blocks(i).unwrap();
        let (next_even, _) = interleaved_blocks(i + 1).unwrap();
        assert!(2 * odd.last().unwrap() < next_even.start, "i={i}");
    }
    for a in 2..=6u64 {
        for i in 0.. {
            let (Ok(cur), Ok(next)) = (fourfree_block(a, i), fourfree_block(a, i + 1)) else {
                break;
            };
            assert!(next.start >= 2 * cur.last().unwrap(), "a={a} i={i}");
        }
    }
    for k in 1..=38 {
        let (_, q_prev) = threefree_endpoints(k - 1).unwrap();
        let (p, q) = threefree_endpoints(k).unwrap();
        assert_eq!(p, 2 * q_prev);
        assert_eq!(q - p + 1, q_prev);
        assert_eq!(threefree_block(k).unwrap().count as i64, q_prev);
    }
}

#[test]
fn stream_prefixes_avoid_their_progressions() {
    let cases = [
        (StreamKind::Interleaved, ApConstraint::new(4, Parity::Odd).unwrap()),
        (StreamKind::FourFree { a: 2 }, ApConstraint::new(4, Parity::Any).unwrap()),
        (StreamKind::FourFree { a: 3 }, ApConstraint::new(4, Parity::Any).unwrap()),
        (StreamKind::ThreeFree, ApConstraint::new(3, Parity::Any).unwrap()),
    ];
    for (kind, c) in cases {
        let spec = BlockStreamSpec::new(kind).unwrap();
        let prefix = stream(&spec).next_n(3000).unwrap();
        assert!(find_ap(&prefix, c).unwrap().is_none(), "{kind} {c}");
    }
}

#[test]
fn each_block_order_is_three_free() {
    for kind in KINDS {
        let spec = BlockStreamSpec::new(kind).unwrap();
        for index in 0..8 {
            let block = spec.block(index).unwrap();
            assert!(is_three_free_permutation(block.order.values()), "{kind} block {index}");
        }
    }
}

#[test]
fn membership_matches_stream_prefix() {
    for kind in KINDS {
        let spec = BlockStreamSpec::new(kind).unwrap();
        let mut cursor = stream(&spec);
        let mut values = Vec::new();
        // Emit whole blocks until every block meeting [1, 10^5] is out.
        for index in 0.. {
            let r = kind.block(index).unwrap();
            if r.start > 100_000 && (kind != StreamKind::Interleaved || index % 2 == 1) {
                break;
            }
            for _ in 0..r.count {
                values.push(cursor.next_value().unwrap());
            }
        }
        values.sort_unstable();
        for n in [1u64, 2, 3, 7, 14, 99, 1000, 2048, 4095, 9842, 19683, 65_536, 100_000] {
            let direct = values.partition_point(|&v| v <= n as i64) as u64;
            assert_eq!(membership_count(kind, n).unwrap(), direct, "{kind} n={n}");
        }
    }
}

#[test]
fn ratio_extremes_sit_at_block_boundaries() {
    for kind in [StreamKind::FourFree { a: 2 }, StreamKind::ThreeFree] {
        let members: HashSet<i64> = (0..)
            .map(|i| kind.block(i).unwrap())
            .take_while(|r| r.start <= 10_000)
            .flat_map(|r| (0..r.count as i64).map(move |t| r.start + t * r.step))
            .collect();
        let mut count = 0u64;
        let mut prev: Option<(bool, f64)> = None;
        for n in 1..=10_000i64 {
            let inside = members.contains(&n);
            count += inside as u64;
            let ratio = count as f64 / n as f64;
            if let Some((was_inside, prev_ratio)) = prev {
                if inside && was_inside {
                    assert!(ratio >= prev_ratio, "{kind}: ratio fell inside a block at {n}");
                }
                if !inside && !was_inside {
                    assert!(ratio < prev_ratio, "{kind}: ratio rose inside a gap at {n}");
                }
            }
            prev = Some((inside, ratio));
        }
    }
}

#[test]
fn profiles_converge_to_closed_forms() {
    for (kind, k_max, from) in [(StreamKind::FourFree { a: 2 }, 12, 5), (StreamKind::ThreeFree, 20, 8)] {
        let (upper, lower) = closed_form_densities(kind).unwrap();
        let profile = density_profile(kind, k_max).unwrap();
        let dev = |kind_: SampleKind, target: f64| -> Vec<f64> {
            profile
                .samples
                .iter()
                .filter(|s| s.kind == kind_)
                .map(|s| (s.ratio_f64() - target).abs())
                .collect()
        };
        let ends = dev(SampleKind::BlockEnd, upper.to_f64().unwrap());
        let gaps = dev(SampleKind::GapEnd, lower.to_f64().unwrap());
        for series in [&ends, &gaps] {
            assert!(series[2..].windows(2).all(|w| w[1] <= w[0]), "{kind}: {series:?}");
            assert!(series[from..].iter().all(|&d| d <= 0.01), "{kind}: {series:?}");
        }
        for s in &profile.samples {
            assert!(s.count <= s.n);
            assert_eq!(s.ratio, num_rational::Ratio::new(s.count, s.n));
        }
    }
}

#[test]
fn block_values_lie_in_their_range() {
    let spec = BlockStreamSpec::new(StreamKind::Interleaved).unwrap();
    for index in 0..10 {
        let block = spec.block(index).unwrap();
        let r = block.range;
        assert!(block.values.values().iter().all(|&v| r.contains(v)));
        assert_eq!(block.values.len() as u64, r.count);
        let _: &Seq = &block.order;
    }
}
