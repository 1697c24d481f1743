//! Independent simulations and random-instance sweeps. Work items are spread
//! over the rayon pool when the `parallel` feature is on; the `_sequential`
//! variants always run on the calling thread.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nfa::{random_complete, Nfa};
use crate::popsim::{
    exact_winner, exhaustive_verify, run, Adversary, ExactBudget, RunOutcome, SimError,
};
use crate::synth::{decide, ArenaError, ArenaOptions, Controller};
use crate::Player;

/// Maps `f` over `items`, in parallel when available. Output order follows
/// input order.
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

pub fn map_sequential<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    Even,
    OneOff,
    Random(u64),
}

impl AdversaryKind {
    pub fn adversary(self) -> Adversary {
        match self {
            AdversaryKind::Even => Adversary::Even,
            AdversaryKind::OneOff => Adversary::OneOff,
            AdversaryKind::Random(seed) => Adversary::random(seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub m: u64,
    pub adversary: AdversaryKind,
}

fn run_job(
    nfa: &Nfa,
    controller: &Controller,
    job: &Job,
    budget: usize,
) -> Result<RunOutcome, SimError> {
    run(
        nfa,
        &mut controller.cursor(),
        job.m,
        &mut job.adversary.adversary(),
        budget,
        false,
    )
}

/// Runs `controller` once per job with a fresh cursor and adversary.
pub fn run_batch(
    nfa: &Nfa,
    controller: &Controller,
    jobs: &[Job],
    budget: usize,
) -> Vec<Result<RunOutcome, SimError>> {
    map(jobs, |job| run_job(nfa, controller, job, budget))
}

pub fn run_batch_sequential(
    nfa: &Nfa,
    controller: &Controller,
    jobs: &[Job],
    budget: usize,
) -> Vec<Result<RunOutcome, SimError>> {
    map_sequential(jobs, |job| run_job(nfa, controller, job, budget))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub max_states: usize,
    pub max_actions: usize,
    /// `exact_winner` is computed for `m = 1..=exact_up_to`.
    pub exact_up_to: u64,
    /// Controllers are verified exhaustively for `m = 1..=verify_up_to`.
    pub verify_up_to: u64,
    pub exact_budget: ExactBudget,
    pub verify_max_states: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            max_states: 4,
            max_actions: 2,
            exact_up_to: 5,
            verify_up_to: 3,
            exact_budget: ExactBudget::default(),
            verify_max_states: 1_000_000,
        }
    }
}

/// Outcome of cross-checking the synthesis against the explicit game on one
/// random instance.
#[derive(Debug, Clone)]
pub struct Consistency {
    pub seed: u64,
    pub nfa: Arc<Nfa>,
    pub decision: Result<Player, ArenaError>,
    /// Winner for `m = 1, 2, ...`.
    pub exact: Vec<Result<Player, SimError>>,
    pub verified: Vec<Result<bool, SimError>>,
    pub violations: Vec<String>,
}

impl Consistency {
    /// Whether some check ran out of budget instead of answering.
    pub fn undecided(&self) -> bool {
        self.decision.is_err()
            || self.exact.iter().any(Result::is_err)
            || self.verified.iter().any(Result::is_err)
    }
}

/// The random instance used for `seed`: 2 to `max_states` states and 1 to
/// `max_actions` actions.
pub fn random_instance(seed: u64, options: &SweepOptions) -> Nfa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rng.gen_range(2..=options.max_states.max(2));
    let actions = rng.gen_range(1..=options.max_actions.max(1));
    random_complete(&mut rng, states, actions)
}

pub fn check_instance(seed: u64, options: &SweepOptions) -> Consistency {
    let nfa = Arc::new(random_instance(seed, options));
    let decided = decide(&nfa, ArenaOptions::default());
    let exact: Vec<_> = (1..=options.exact_up_to)
        .map(|m| exact_winner(&nfa, m, options.exact_budget))
        .collect();
    let mut violations = Vec::new();
    let mut verified = Vec::new();
    if let Ok(d) = &decided {
        if let Some(c) = &d.controller {
            for (i, w) in exact.iter().enumerate() {
                if *w == Ok(Player::Two) {
                    violations.push(format!("decide = YES but Player2 wins m = {}", i + 1));
                }
            }
            for m in 1..=options.verify_up_to {
                let v = exhaustive_verify(&nfa, c, m, options.verify_max_states);
                if v == Ok(false) {
                    violations.push(format!("controller fails for m = {m}"));
                }
                verified.push(v);
            }
        }
    }
    let mut lost_at = None;
    for (i, w) in exact.iter().enumerate() {
        match (w, lost_at) {
            (Ok(Player::Two), None) => lost_at = Some(i + 1),
            (Ok(Player::One), Some(l)) => {
                violations.push(format!("Player1 wins m = {} after losing m = {l}", i + 1))
            }
            _ => {}
        }
    }
    Consistency {
        seed,
        nfa,
        decision: decided.map(|d| d.winner),
        exact,
        verified,
        violations,
    }
}

pub fn consistency_sweep(seeds: Range<u64>, options: &SweepOptions) -> Vec<Consistency> {
    let seeds: Vec<u64> = seeds.collect();
    map(&seeds, |&s| check_instance(s, options))
}

pub fn consistency_sweep_sequential(seeds: Range<u64>, options: &SweepOptions) -> Vec<Consistency> {
    let seeds: Vec<u64> = seeds.collect();
    map_sequential(&seeds, |&s| check_instance(s, options))
}
