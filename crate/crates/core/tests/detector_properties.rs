use apfree::apcore::{
    affine_image, canonical_apfree_perm, complement, find_ap, is_three_free_permutation, longest_ap, reverse,
    AffineMap,
};
use apfree::{ApConstraint, Parity, Seq};
use proptest::prelude::*;

/// Smallest position tuple (0-based) of a k-term AP, by walking every
/// increasing tuple in lexicographic order and abandoning a tuple as soon as
/// its values stop forming a progression.
fn naive_first(values: &[i64], k: usize, parity: Parity) -> Option<Vec<usize>> {
    fn extend(values: &[i64], k: usize, parity: Parity, tuple: &mut Vec<usize>) -> bool {
        if tuple.len() == k {
            return true;
        }
        let from = tuple.last().map_or(0, |&p| p + 1);
        for p in from..values.len() {
            let ok = match tuple.len() {
                0 => true,
                1 => {
                    let d = values[p] - values[tuple[0]];
                    parity.accepts(d)
                }
                _ => {
                    let d = values[tuple[1]] - values[tuple[0]];
                    values[p] - values[*tuple.last().unwrap()] == d
                }
            };
            if ok {
                tuple.push(p);
                if extend(values, k, parity, tuple) {
                    return true;
                }
                tuple.pop();
            }
        }
        false
    }
    let mut tuple = Vec::new();
    extend(values, k, parity, &mut tuple).then_some(tuple)
}

fn naive_longest(values: &[i64], parity: Parity) -> usize {
    if values.is_empty() {
        return 0;
    }
    (2..=values.len())
        .take_while(|&k| naive_first(values, k, parity).is_some())
        .last()
        .unwrap_or(1)
}

fn distinct_values(max_len: usize, max_value: i64) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::btree_set(1..=max_value, 0..=max_len)
        .prop_flat_map(|set| Just(set.into_iter().collect::<Vec<_>>()).prop_shuffle())
}

fn permutation(max_n: usize) -> impl Strategy<Value = Vec<i64>> {
    (1..=max_n).prop_flat_map(|n| Just((1..=n as i64).collect::<Vec<_>>()).prop_shuffle())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn detector_matches_naive(values in distinct_values(40, 200)) {
        let seq = Seq::new(values.clone()).unwrap();
        for k in 3..=5 {
            for parity in Parity::ALL {
                let c = ApConstraint::new(k, parity).unwrap();
                let got = find_ap(&seq, c).unwrap();
                let expected = naive_first(&values, k, parity);
                prop_assert_eq!(
                    got.as_ref().map(|w| w.positions.iter().map(|p| p - 1).collect::<Vec<_>>()),
                    expected
                );
                if let Some(w) = got {
                    prop_assert!(w.is_valid_for(&values, parity));
                    prop_assert_eq!(w.len(), k);
                }
            }
        }
    }

    #[test]
    fn longest_matches_naive(values in distinct_values(14, 40)) {
        let seq = Seq::new(values.clone()).unwrap();
        for parity in Parity::ALL {
            let (len, w) = longest_ap(&seq, parity).unwrap();
            prop_assert_eq!(len, naive_longest(&values, parity));
            if len >= 2 {
                let w = w.unwrap();
                prop_assert!(w.is_valid_for(&values, parity));
                prop_assert_eq!(w.len(), len);
                let first = naive_first(&values, len, parity).unwrap();
                prop_assert_eq!(w.positions.iter().map(|p| p - 1).collect::<Vec<_>>(), first);
            }
        }
    }

    #[test]
    fn emptiness_survives_reverse_and_complement(values in permutation(12)) {
        let seq = Seq::new(values).unwrap();
        let rev = reverse(&seq);
        let comp = complement(&seq).unwrap();
        for k in 3..=4 {
            for parity in Parity::ALL {
                let c = ApConstraint::new(k, parity).unwrap();
                let base = find_ap(&seq, c).unwrap().is_none();
                prop_assert_eq!(base, find_ap(&rev, c).unwrap().is_none());
                prop_assert_eq!(base, find_ap(&comp, c).unwrap().is_none());
            }
        }
    }

    #[test]
    fn affine_images_preserve_detection(
        values in permutation(14),
        start in 1i64..1000,
        step in 1i64..9,
    ) {
        let perm = Seq::new(values).unwrap();
        let image = affine_image(&perm, AffineMap::new(start, step).unwrap()).unwrap();
        for k in 3..=4 {
            let any = ApConstraint::new(k, Parity::Any).unwrap();
            prop_assert_eq!(
                find_ap(&perm, any).unwrap().is_none(),
                find_ap(&image, any).unwrap().is_none()
            );
            let odd = ApConstraint::new(k, Parity::Odd).unwrap();
            let even = ApConstraint::new(k, Parity::Even).unwrap();
            if step % 2 == 1 {
                prop_assert_eq!(
                    find_ap(&perm, odd).unwrap().is_none(),
                    find_ap(&image, odd).unwrap().is_none()
                );
            } else {
                prop_assert!(find_ap(&image, odd).unwrap().is_none());
                prop_assert_eq!(
                    find_ap(&perm, any).unwrap().is_none(),
                    find_ap(&image, even).unwrap().is_none()
                );
            }
        }
    }

    #[test]
    fn quick_check_agrees_with_detector(values in permutation(30)) {
        let seq = Seq::new(values.clone()).unwrap();
        prop_assert_eq!(
            is_three_free_permutation(&values),
            find_ap(&seq, ApConstraint::three(Parity::Any)).unwrap().is_none()
        );
    }
}

#[test]
fn canonical_permutations_are_three_free_up_to_4096() {
    for n in 1..=4096 {
        let p = canonical_apfree_perm(n);
        assert_eq!(p.permutation_size(), Some(n));
        assert!(is_three_free_permutation(p.values()), "n={n}");
    }
}
