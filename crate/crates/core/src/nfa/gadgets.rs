//! Generators for the example families: the splitting gadget, the linear
//! cut-off family, the try/keep timing automaton and its nested version,
//! the memory example, the binary counter and their doubly exponential
//! combination.

use std::fmt;
use std::str::FromStr;

use super::{Nfa, NfaBuilder, NfaError, LOSE_SINK, WIN_SINK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetKind {
    Split,
    Linear,
    Time,
    Counter,
    DoubleExp,
    Nested,
    MemoryExample,
}

impl GadgetKind {
    pub const ALL: [GadgetKind; 7] = [
        GadgetKind::Split,
        GadgetKind::Linear,
        GadgetKind::Time,
        GadgetKind::Counter,
        GadgetKind::DoubleExp,
        GadgetKind::Nested,
        GadgetKind::MemoryExample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GadgetKind::Split => "split",
            GadgetKind::Linear => "linear",
            GadgetKind::Time => "time",
            GadgetKind::Counter => "counter",
            GadgetKind::DoubleExp => "doubleexp",
            GadgetKind::Nested => "nested",
            GadgetKind::MemoryExample => "memory-example",
        }
    }

    pub fn takes_parameter(self) -> bool {
        matches!(
            self,
            GadgetKind::Linear | GadgetKind::Counter | GadgetKind::DoubleExp | GadgetKind::Nested
        )
    }
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GadgetSpec {
    pub kind: GadgetKind,
    pub parameter: u32,
}

impl GadgetSpec {
    pub fn new(kind: GadgetKind, parameter: u32) -> Self {
        GadgetSpec { kind, parameter }
    }
}

impl fmt::Display for GadgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.takes_parameter() {
            write!(f, "{}:{}", self.kind, self.parameter)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

/// Accepts `kind` or `kind:parameter`, e.g. `split`, `counter:2`.
impl FromStr for GadgetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (
                n,
                p.parse::<u32>()
                    .map_err(|_| format!("invalid gadget parameter `{p}`"))?,
            ),
            None => (s, 0),
        };
        let kind = GadgetKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| format!("unknown gadget `{name}`"))?;
        if kind.takes_parameter() && !s.contains(':') {
            return Err(format!(
                "gadget `{name}` needs a parameter, e.g. `{name}:2`"
            ));
        }
        Ok(GadgetSpec::new(kind, param))
    }
}

pub fn generate(spec: &GadgetSpec) -> Result<Nfa, NfaError> {
    let p = spec.parameter as usize;
    if spec.kind.takes_parameter() && p == 0 {
        return Err(NfaError::Parameter {
            kind: spec.kind.to_string(),
            parameter: spec.parameter,
        });
    }
    let nfa = match spec.kind {
        GadgetKind::Split => split(),
        GadgetKind::Linear => linear(p),
        GadgetKind::Time => nested(1, false),
        GadgetKind::Counter => counter(p),
        GadgetKind::DoubleExp => doubleexp(p),
        GadgetKind::Nested => nested(p, true),
        GadgetKind::MemoryExample => memory_example(),
    };
    nfa.map_err(|e| match e {
        NfaError::TooManyStates(_) => NfaError::Parameter {
            kind: spec.kind.to_string(),
            parameter: spec.parameter,
        },
        e => e,
    })
}

/// Adds self-loops on every action for `q`.
fn loop_all(b: &mut NfaBuilder, q: usize) {
    for a in 0..b.num_actions() {
        b.edge(q, a, q);
    }
}

fn split() -> Result<Nfa, NfaError> {
    let mut b = NfaBuilder::new();
    let [q0, q1, q2, f] = ["q0", "q1", "q2", "f"].map(|s| b.state(s));
    let [a, bb, d] = ["a", "b", "delta"].map(|s| b.action(s));
    b.edge(q0, a, q0).edge(q0, bb, q0);
    b.edge(q0, d, q1).edge(q0, d, q2);
    b.edge(q1, d, q1).edge(q1, bb, q0).edge(q1, a, f);
    b.edge(q2, d, q2).edge(q2, a, q0).edge(q2, bb, f);
    loop_all(&mut b, f);
    b.initial(q0).target(f);
    b.build(None)
}

/// `b` scatters `q0` over the middle states and brings them back; from
/// `q_i` every `a_j` with `j != i` reaches `f`. Everything else is losing.
fn linear(c: usize) -> Result<Nfa, NfaError> {
    let mut b = NfaBuilder::new();
    let q0 = b.state("q0");
    let mid: Vec<usize> = (1..=c).map(|i| b.state(&format!("q{i}"))).collect();
    let f = b.state("f");
    let lose = b.state(LOSE_SINK);
    let acts: Vec<usize> = (1..=c).map(|j| b.action(&format!("a{j}"))).collect();
    let bb = b.action("b");
    for (i, &qi) in mid.iter().enumerate() {
        b.edge(q0, bb, qi);
        b.edge(qi, bb, q0);
        for (j, &aj) in acts.iter().enumerate() {
            if j != i {
                b.edge(qi, aj, f);
            }
        }
    }
    loop_all(&mut b, f);
    loop_all(&mut b, lose);
    b.initial(q0).target(f);
    b.build(Some(LOSE_SINK))
}

/// `levels` copies of the try/keep automaton, each nested inside the `q_top`
/// branch of the next one. Layer `L` has its own six actions; actions of an
/// inner layer freeze the outer layers except their `q0`, actions of an
/// outer layer are fatal inside inner layers. With `levels == 1` this is the
/// plain timing automaton, named without layer suffixes unless `suffix`.
fn nested(levels: usize, suffix: bool) -> Result<Nfa, NfaError> {
    const ACTIONS: [&str; 6] = ["try", "retry", "top", "bot", "keep", "restart"];
    let tag = |name: &str, layer: usize| {
        if suffix {
            format!("{name}_{layer}")
        } else {
            name.to_string()
        }
    };
    let mut b = NfaBuilder::new();
    // outermost layer first so that its q0 is state 0
    let mut layer_states = vec![[0usize; 4]; levels + 1];
    for layer in (1..=levels).rev() {
        layer_states[layer] = ["q0", "qtop", "qbot", "k"].map(|s| b.state(&tag(s, layer)));
    }
    let f = b.state("f");
    let lose = b.state(LOSE_SINK);
    let mut layer_actions = vec![[0usize; 6]; levels + 1];
    for layer in 1..=levels {
        layer_actions[layer] = ACTIONS.map(|s| b.action(&tag(s, layer)));
    }
    for layer in 1..=levels {
        let [q0, qtop, qbot, k] = layer_states[layer];
        let [try_, retry, top, bot, keep, restart] = layer_actions[layer];
        let exit = if layer == levels {
            f
        } else {
            layer_states[layer + 1][1]
        };
        let entry = if layer == 1 {
            qtop
        } else {
            layer_states[layer - 1][0]
        };
        b.edge(q0, try_, entry).edge(q0, try_, qbot);
        b.edge(qtop, keep, q0).edge(qtop, top, exit);
        b.edge(qbot, keep, k).edge(qbot, bot, exit);
        b.edge(k, restart, q0);
        for a in [try_, retry, top, bot, keep] {
            b.edge(k, a, k);
        }
        for inner in 1..layer {
            for &a in &layer_actions[inner] {
                for q in [qtop, qbot, k] {
                    b.edge(q, a, q);
                }
            }
        }
    }
    loop_all(&mut b, f);
    loop_all(&mut b, lose);
    b.initial(layer_states[levels][0]).target(f);
    b.build(Some(LOSE_SINK))
}

fn memory_example() -> Result<Nfa, NfaError> {
    let mut b = NfaBuilder::new();
    let [q0, q1, q2, q3, q4, f] = ["q0", "q1", "q2", "q3", "q4", "f"].map(|s| b.state(s));
    let lose = b.state(LOSE_SINK);
    let [a, bb, c] = ["a", "b", "c"].map(|s| b.action(s));
    b.edge(q1, a, q2)
        .edge(q2, a, q1)
        .edge(q3, a, q4)
        .edge(q4, a, q3);
    b.edge(q1, bb, q1).edge(q2, bb, q3);
    b.edge(q3, bb, q2).edge(q3, bb, q4).edge(q4, bb, q3);
    for q in [q1, q2, q3, q4] {
        b.edge(q0, c, q);
    }
    for q in [q1, q3, q4] {
        b.edge(q, c, f);
    }
    loop_all(&mut b, f);
    loop_all(&mut b, lose);
    b.initial(q0).target(f);
    b.build(Some(LOSE_SINK))
}

/// Counter transitions for action index `j` (1-based) from the counter
/// states; `None` means the losing sink.
struct Counter {
    c0: usize,
    low: Vec<usize>,
    high: Vec<usize>,
}

impl Counter {
    fn add_states(b: &mut NfaBuilder, n: usize) -> Counter {
        let c0 = b.state("c0");
        let mut low = Vec::new();
        let mut high = Vec::new();
        for i in 1..=n {
            low.push(b.state(&format!("l{i}")));
            high.push(b.state(&format!("h{i}")));
        }
        Counter { c0, low, high }
    }

    fn states(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.c0)
            .chain(self.low.iter().copied())
            .chain(self.high.iter().copied())
    }

    /// Successors on `alpha_j` (1-based `j`); empty means the losing sink.
    fn step(&self, q: usize, j: usize) -> Vec<usize> {
        if q == self.c0 {
            return self.low.clone();
        }
        if let Some(i) = self.low.iter().position(|&x| x == q).map(|i| i + 1) {
            return match j.cmp(&i) {
                std::cmp::Ordering::Equal => vec![self.high[i - 1]],
                std::cmp::Ordering::Less => vec![q],
                std::cmp::Ordering::Greater => vec![],
            };
        }
        let i = self
            .high
            .iter()
            .position(|&x| x == q)
            .expect("counter state")
            + 1;
        match j.cmp(&i) {
            std::cmp::Ordering::Equal => vec![],
            std::cmp::Ordering::Less => vec![q],
            std::cmp::Ordering::Greater => vec![self.low[i - 1]],
        }
    }
}

/// Binary counter over `n` bits. A `*` action from any non-losing counter
/// state reaches the winning sink, which serves as target.
fn counter(n: usize) -> Result<Nfa, NfaError> {
    let mut b = NfaBuilder::new();
    let cnt = Counter::add_states(&mut b, n);
    let win = b.state(WIN_SINK);
    let lose = b.state(LOSE_SINK);
    let alphas: Vec<usize> = (1..=n).map(|j| b.action(&format!("alpha{j}"))).collect();
    let star = b.action("*");
    let states: Vec<usize> = cnt.states().collect();
    for &q in &states {
        for (j, &a) in alphas.iter().enumerate() {
            for r in cnt.step(q, j + 1) {
                b.edge(q, a, r);
            }
        }
        b.edge(q, star, win);
    }
    loop_all(&mut b, win);
    loop_all(&mut b, lose);
    b.initial(cnt.c0).target(win);
    b.build(Some(LOSE_SINK))
}

/// Splitting gadget and `n`-bit counter side by side behind a fresh initial
/// state. Letters are pairs `x.alphaj` acting componentwise; `init` enters
/// both parts, `*` sends the counter (except the losing sink) and the split
/// target to the winning sink.
fn doubleexp(n: usize) -> Result<Nfa, NfaError> {
    let sp = split()?;
    let mut b = NfaBuilder::new();
    let init_q = b.state("I");
    let split_states: Vec<usize> = sp
        .state_names()
        .iter()
        .map(|s| b.state(&format!("s.{s}")))
        .collect();
    let cnt = Counter::add_states(&mut b, n);
    let win = b.state(WIN_SINK);
    let lose = b.state(LOSE_SINK);
    let init_a = b.action("init");
    let mut pairs = Vec::new();
    for x in 0..sp.num_actions() {
        for j in 1..=n {
            let a = b.action(&format!("{}.alpha{j}", sp.action_name(x)));
            pairs.push((a, x, j));
        }
    }
    let star = b.action("*");
    b.edge(init_q, init_a, split_states[sp.initial()]);
    b.edge(init_q, init_a, cnt.c0);
    for &(a, x, j) in &pairs {
        for q in 0..sp.num_states() {
            for r in sp.successors(q, x) {
                b.edge(split_states[q], a, split_states[r]);
            }
        }
        for q in cnt.states() {
            for r in cnt.step(q, j) {
                b.edge(q, a, r);
            }
        }
    }
    for q in cnt.states() {
        b.edge(q, star, win);
    }
    b.edge(split_states[sp.target()], star, win);
    loop_all(&mut b, win);
    loop_all(&mut b, lose);
    b.initial(init_q).target(win);
    b.build(Some(LOSE_SINK))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StateSet;

    fn gen(kind: GadgetKind, p: u32) -> Nfa {
        generate(&GadgetSpec::new(kind, p)).unwrap()
    }

    fn set(nfa: &Nfa, names: &[&str]) -> StateSet {
        names.iter().map(|n| nfa.state_index(n).unwrap()).collect()
    }

    #[test]
    fn linear_sizes() {
        let nfa = gen(GadgetKind::Linear, 3);
        // q0, q1..q3, f and the materialized losing sink
        assert_eq!(nfa.num_states(), 6);
        assert_eq!(nfa.num_actions(), 4);
        let q2 = nfa.state_index("q2").unwrap();
        let a2 = nfa.action_index("a2").unwrap();
        let a1 = nfa.action_index("a1").unwrap();
        assert_eq!(nfa.successors(q2, a2), set(&nfa, &[LOSE_SINK]));
        assert_eq!(nfa.successors(q2, a1), set(&nfa, &["f"]));
    }

    #[test]
    fn doubleexp_has_2n_plus_7_states_besides_losing_sink() {
        for n in 1..=3 {
            let nfa = gen(GadgetKind::DoubleExp, n);
            assert_eq!(nfa.num_states() - 1, 2 * n as usize + 7);
            assert_eq!(nfa.num_actions(), 3 * n as usize + 2);
        }
    }

    #[test]
    fn nested_sizes_and_time_isomorphism() {
        for l in 1..=4 {
            assert_eq!(gen(GadgetKind::Nested, l).num_states(), 4 * l as usize + 2);
        }
        let time = gen(GadgetKind::Time, 0);
        let n1 = gen(GadgetKind::Nested, 1);
        let strip = |s: &str| s.trim_end_matches("_1").to_string();
        let renamed: Vec<String> = n1.state_names().iter().map(|s| strip(s)).collect();
        assert_eq!(renamed, time.state_names());
        for q in 0..time.num_states() {
            for a in 0..time.num_actions() {
                assert_eq!(time.successors(q, a), n1.successors(q, a));
            }
        }
    }

    #[test]
    fn time_transitions() {
        let nfa = gen(GadgetKind::Time, 0);
        let s = |n: &str| nfa.state_index(n).unwrap();
        let a = |n: &str| nfa.action_index(n).unwrap();
        assert_eq!(
            nfa.successors(s("q0"), a("try")),
            set(&nfa, &["qtop", "qbot"])
        );
        assert_eq!(nfa.successors(s("q0"), a("retry")), set(&nfa, &[LOSE_SINK]));
        assert_eq!(nfa.successors(s("k"), a("retry")), set(&nfa, &["k"]));
        assert_eq!(nfa.successors(s("qbot"), a("keep")), set(&nfa, &["k"]));
        assert_eq!(nfa.successors(s("qtop"), a("bot")), set(&nfa, &[LOSE_SINK]));
    }

    #[test]
    fn nested_inner_actions_freeze_outer_layer() {
        let nfa = gen(GadgetKind::Nested, 2);
        let s = |n: &str| nfa.state_index(n).unwrap();
        let a = |n: &str| nfa.action_index(n).unwrap();
        assert_eq!(nfa.initial(), s("q0_2"));
        assert_eq!(
            nfa.successors(s("q0_2"), a("try_2")),
            set(&nfa, &["q0_1", "qbot_2"])
        );
        assert_eq!(
            nfa.successors(s("qtop_1"), a("top_1")),
            set(&nfa, &["qtop_2"])
        );
        assert_eq!(
            nfa.successors(s("qbot_2"), a("keep_1")),
            set(&nfa, &["qbot_2"])
        );
        assert_eq!(
            nfa.successors(s("q0_2"), a("keep_1")),
            set(&nfa, &[LOSE_SINK])
        );
        assert_eq!(
            nfa.successors(s("k_1"), a("keep_2")),
            set(&nfa, &[LOSE_SINK])
        );
        assert_eq!(nfa.successors(s("k_2"), a("keep_1")), set(&nfa, &["k_2"]));
    }

    /// Playing the counter discipline keeps every low/high state clear of the
    /// losing sink for exactly `2^n` letters.
    #[test]
    fn counter_survives_exactly_two_to_the_n_steps() {
        for n in 1..=4usize {
            let nfa = gen(GadgetKind::Counter, n as u32);
            let lose = nfa.state_index(LOSE_SINK).unwrap();
            let alpha = |j: usize| nfa.action_index(&format!("alpha{j}")).unwrap();
            let mut support = nfa.post(StateSet::singleton(nfa.initial()), alpha(1));
            let mut survived = 0;
            loop {
                // smallest bit still low
                let j =
                    (1..=n).find(|&i| support.contains(nfa.state_index(&format!("l{i}")).unwrap()));
                let Some(j) = j else {
                    // every choice now hits the sink
                    assert!((1..=n).all(|i| nfa.post(support, alpha(i)).contains(lose)));
                    break;
                };
                support = nfa.post(support, alpha(j));
                assert!(!support.contains(lose));
                survived += 1;
            }
            assert_eq!(survived + 1, 1 << n, "n = {n}");
        }
    }

    #[test]
    fn spec_strings() {
        assert_eq!(
            "counter:2".parse::<GadgetSpec>().unwrap(),
            GadgetSpec::new(GadgetKind::Counter, 2)
        );
        assert_eq!(
            "split".parse::<GadgetSpec>().unwrap().kind,
            GadgetKind::Split
        );
        assert!("linear".parse::<GadgetSpec>().is_err());
        assert!("bogus:1".parse::<GadgetSpec>().is_err());
        assert!(generate(&GadgetSpec::new(GadgetKind::Linear, 0)).is_err());
        assert!(generate(&GadgetSpec::new(GadgetKind::Linear, 80)).is_err());
    }
}
