use rand::Rng;

use super::{Nfa, NfaBuilder};

/// Complete NFA on `states >= 2` states `q0..`: every (state, action) pair
/// gets a uniformly drawn nonempty successor set, except that the target,
/// the last state, is a sink. `q0` is initial.
pub fn random_complete<R: Rng + ?Sized>(rng: &mut R, states: usize, actions: usize) -> Nfa {
    assert!(states >= 2 && actions >= 1 && states <= 64);
    let full = u64::MAX >> (64 - states);
    let mut b = NfaBuilder::new();
    let qs: Vec<usize> = (0..states).map(|i| b.state(&format!("q{i}"))).collect();
    let acts: Vec<usize> = (0..actions).map(|j| b.action(&format!("a{j}"))).collect();
    let f = qs[states - 1];
    for &q in &qs[..states - 1] {
        for &a in &acts {
            let mask = rng.gen_range(1..=full);
            for (i, &r) in qs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    b.edge(q, a, r);
                }
            }
        }
    }
    for &a in &acts {
        b.edge(f, a, f);
    }
    b.initial(qs[0]).target(f);
    b.build(None).expect("random NFA is well formed")
}
