mod common;

use std::sync::Arc;

use popctl_core::batch::{run_batch, AdversaryKind, Job};
use popctl_core::popsim::{exhaustive_verify, run, Adversary, RunStatus};
use popctl_core::synth::{Controller, ControllerError};

#[test]
fn json_round_trip() {
    for spec in ["split", "time", "memory-example", "nested:2"] {
        let nfa = common::gadget(spec);
        let c = common::controller(&nfa);
        let text = c.to_json();
        let back = Controller::from_json(&text, Arc::clone(&nfa)).unwrap();
        assert_eq!(back, c, "{spec}");
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn json_is_bound_to_its_automaton() {
    let c = common::controller(&common::gadget("split"));
    let other = common::gadget("time");
    assert_eq!(
        Controller::from_json(&c.to_json(), other).unwrap_err(),
        ControllerError::HashMismatch
    );
    assert!(matches!(
        Controller::from_json("{", common::gadget("split")),
        Err(ControllerError::Malformed(_))
    ));
}

#[test]
fn reloaded_controller_wins_random_runs() {
    for spec in ["split", "time", "memory-example"] {
        let nfa = common::gadget(spec);
        let c =
            Controller::from_json(&common::controller(&nfa).to_json(), Arc::clone(&nfa)).unwrap();
        let jobs: Vec<Job> = (0..100)
            .map(|s| Job {
                m: 10,
                adversary: AdversaryKind::Random(s),
            })
            .collect();
        for (job, out) in jobs.iter().zip(run_batch(&nfa, &c, &jobs, 100_000)) {
            assert_eq!(out.unwrap().status, RunStatus::Won, "{spec} {job:?}");
        }
    }
}

#[test]
fn synthesized_controllers_verify_exhaustively() {
    for (spec, max_m) in [
        ("split", 3),
        ("time", 3),
        ("memory-example", 3),
        ("nested:2", 2),
        ("counter:2", 2),
    ] {
        let nfa = common::gadget(spec);
        let c = common::controller(&nfa);
        for m in 1..=max_m {
            assert_eq!(
                exhaustive_verify(&nfa, &c, m, 2_000_000),
                Ok(true),
                "{spec} m = {m}"
            );
        }
    }
}

#[test]
fn flipped_action_is_caught() {
    let nfa = common::gadget("split");
    let c = common::controller(&nfa);
    let a = nfa.action_index("a").unwrap();
    assert_eq!(c.choose(c.initial()), nfa.action_index("delta"));
    let bad = c.with_action(c.initial(), a).unwrap();
    assert_eq!(exhaustive_verify(&nfa, &bad, 1, 100_000), Ok(false));
    let out = run(&nfa, &mut bad.cursor(), 1, &mut Adversary::Even, 50, false);
    assert!(!matches!(out, Ok(ref o) if o.won()));

    let mut caught = 0;
    let mut flips = 0;
    for id in 0..c.len() {
        let Some(orig) = c.choose(id) else { continue };
        for b in (0..nfa.num_actions()).filter(|&b| b != orig) {
            flips += 1;
            let bad = c.with_action(id, b).unwrap();
            if (1..=3).any(|m| exhaustive_verify(&nfa, &bad, m, 100_000) == Ok(false)) {
                caught += 1;
            }
        }
    }
    assert!(caught > 0 && caught <= flips);
    assert!(c.with_action(c.len(), a).is_err());
}

#[test]
fn cursor_follows_advance() {
    let nfa = common::gadget("time");
    let c = common::controller(&nfa);
    let mut cur = c.cursor();
    let out = run(&nfa, &mut cur, 4, &mut Adversary::OneOff, 1_000, true).unwrap();
    assert!(out.won());
    let mut node = c.initial();
    for step in out.trace.unwrap() {
        assert_eq!(c.choose(node), Some(step.action));
        node = c.advance(node, &step.split.graph()).unwrap();
    }
    assert!(c.is_win(node));
    assert_eq!(cur.node(), node);
}
