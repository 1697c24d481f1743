mod common;

use common::{graph, set};
use popctl_core::capacity::{
    count_entries, lasso_capacity, loop_partition, CapacityError, LassoPlay,
};
use popctl_core::StateSet;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn two_state_loop_has_infinite_capacity() {
    let g = graph(2, &[(0, 0), (0, 1), (1, 1)]);
    let play = LassoPlay::new(vec![], vec![g.clone()]).unwrap();
    assert!(lasso_capacity(&play).is_infinite());
    assert_eq!(
        loop_partition(&g, set(&[0, 1])).unwrap(),
        Some((set(&[0]), set(&[1])))
    );
    // three rounds, accumulator {1}: one entry per round
    let acc = vec![set(&[1]); 4];
    assert_eq!(count_entries(&[g.clone(), g.clone(), g], &acc).unwrap(), 3);
}

#[test]
fn permutation_loops_are_finite() {
    let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
    let play = LassoPlay::new(vec![], vec![g.clone()]).unwrap();
    assert_eq!(
        lasso_capacity(&play),
        popctl_core::capacity::CapacityVerdict::Finite
    );
    assert_eq!(loop_partition(&g, set(&[0, 1, 2])).unwrap(), None);
}

#[test]
fn repeated_split_and_merge_is_infinite() {
    // q0 -delta-> {q1, q2} -a-> {f, q0}, repeated with f kept
    let (q0, q1, q2, f) = (0, 1, 2, 3);
    let prefix = vec![
        graph(4, &[(q0, q1), (q0, q2)]),
        graph(4, &[(q1, f), (q2, q0)]),
    ];
    let cycle = vec![
        graph(4, &[(q0, q1), (q0, q2), (f, f)]),
        graph(4, &[(q1, f), (q2, q0), (f, f)]),
    ];
    let play = LassoPlay::new(prefix, cycle.clone()).unwrap();
    assert!(lasso_capacity(&play).is_infinite());
    let h = cycle[0].compose(&cycle[1]);
    assert_eq!(
        loop_partition(&h, set(&[q0, f])).unwrap(),
        Some((set(&[q0]), set(&[f])))
    );
}

#[test]
fn malformed_inputs_are_rejected() {
    let g = graph(2, &[(0, 1)]);
    assert_eq!(
        LassoPlay::new(vec![], vec![]),
        Err(CapacityError::EmptyCycle)
    );
    assert!(matches!(
        LassoPlay::new(vec![], vec![g.clone()]),
        Err(CapacityError::BrokenChain { .. })
    ));
    assert_eq!(
        loop_partition(&g, set(&[0, 1])),
        Err(CapacityError::NotALoop)
    );
    assert!(matches!(
        count_entries(std::slice::from_ref(&g), &[StateSet::EMPTY]),
        Err(CapacityError::LengthMismatch { .. })
    ));
    assert!(matches!(
        count_entries(&[g], &[set(&[0]), StateSet::EMPTY]),
        Err(CapacityError::NotSuccessorClosed { .. })
    ));
}

#[test]
fn lasso_and_partition_agree_on_random_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut infinite = 0;
    for _ in 0..400 {
        let n = rand::Rng::gen_range(&mut rng, 1..=4);
        let (g, s) = common::random_loop(&mut rng, n);
        let lasso = lasso_capacity(&LassoPlay::new(vec![], vec![g.clone()]).unwrap());
        let part = loop_partition(&g, s).unwrap();
        assert_eq!(lasso.is_infinite(), part.is_some(), "{g:?}");
        infinite += usize::from(part.is_some());
    }
    assert!(
        infinite > 20 && infinite < 380,
        "degenerate sample: {infinite}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_witness_is_valid(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, s) = common::random_loop(&mut rng, n);
        if let Some((t, u)) = loop_partition(&g, s).unwrap() {
            prop_assert_eq!(t.union(u), s);
            prop_assert!(!t.intersects(u));
            prop_assert!(!u.is_empty());
            prop_assert!(g.image_of(u).is_subset(u));
            prop_assert!(g.image_of(t).intersects(u));
            // the cycle repeated k times has at least k entries into U
            let k = 5;
            let play = vec![g.clone(); k];
            prop_assert!(count_entries(&play, &vec![u; k + 1]).unwrap() >= k);
        }
    }
}
