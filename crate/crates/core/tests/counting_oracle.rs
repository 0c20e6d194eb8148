use std::collections::HashSet;

use apfree::apcore::reverse;
use apfree::counting::{count_apfree, enumerate_apfree, oracle_count, CountQuery, SearchOptions};
use apfree::{ApConstraint, Parity, Seq};
use num_bigint::BigUint;

fn query(n: usize, k: usize, parity: Parity, prefix: &[i64]) -> CountQuery {
    CountQuery::new(
        n,
        ApConstraint::new(k, parity).unwrap(),
        Seq::new(prefix.to_vec()).unwrap(),
    )
    .unwrap()
}

fn search(q: &CountQuery) -> BigUint {
    count_apfree(q, &SearchOptions::default()).unwrap().count
}

#[test]
fn search_matches_oracle_up_to_eight() {
    for n in 1..=8 {
        for k in [3, 4] {
            for parity in Parity::ALL {
                let q = query(n, k, parity, &[]);
                assert_eq!(search(&q), oracle_count(&q).unwrap().count, "n={n} k={k} {parity}");
            }
        }
    }
}

#[test]
fn prefixed_search_matches_oracle() {
    for prefix in [&[2, 1][..], &[1], &[3, 5], &[4, 1, 6], &[1, 2, 3]] {
        for parity in Parity::ALL {
            let q = query(8, 3, parity, prefix);
            assert_eq!(search(&q), oracle_count(&q).unwrap().count, "{prefix:?} {parity}");
        }
    }
}

#[test]
fn avoiding_four_terms_is_easier() {
    for n in 1..=10 {
        for parity in Parity::ALL {
            assert!(search(&query(n, 4, parity, &[])) >= search(&query(n, 3, parity, &[])));
        }
    }
}

#[test]
fn counts_split_over_first_value() {
    for n in 2..=10 {
        for (k, parity) in [(3, Parity::Any), (3, Parity::Odd), (4, Parity::Even)] {
            let total = search(&query(n, k, parity, &[]));
            let split: BigUint = (1..=n as i64).map(|v| search(&query(n, k, parity, &[v]))).sum();
            assert_eq!(total, split, "n={n} k={k} {parity}");
        }
    }
}

#[test]
fn reversal_pairs_permutations() {
    for n in 2..=8 {
        let all = enumerate_apfree(&query(n, 3, Parity::Any, &[]), usize::MAX, &SearchOptions::default()).unwrap();
        assert_eq!(BigUint::from(all.len()), search(&query(n, 3, Parity::Any, &[])));
        assert_eq!(all.len() % 2, 0);
        let set: HashSet<_> = all.iter().cloned().collect();
        for p in &all {
            assert!(set.contains(&reverse(p)));
        }
        assert!(all.windows(2).all(|w| w[0].values() < w[1].values()), "lexicographic order");
    }
    for n in 9..=16 {
        let count = search(&query(n, 3, Parity::Any, &[]));
        assert_eq!(count % 2u32, BigUint::from(0u32), "n={n}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    for (n, k, parity) in [(12, 3, Parity::Any), (10, 4, Parity::Odd), (11, 3, Parity::Even)] {
        let q = query(n, k, parity, &[]);
        let one = count_apfree(&q, &SearchOptions::single_threaded()).unwrap();
        let many = count_apfree(&q, &SearchOptions { threads: 3, ..Default::default() }).unwrap();
        assert_eq!(one.count, many.count);
        assert_eq!(one.node_count, many.node_count);
    }
}
