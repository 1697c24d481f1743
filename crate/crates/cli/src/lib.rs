//! `popctl`: decide, synthesize, simulate and play population control
//! instances from the command line.

pub mod server;
pub mod session;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use popctl_core::popsim::{
    exact_winner, find_cutoff, run, Adversary, CutoffResult, ExactBudget, RunStatus, ScriptedTime,
    Strategy,
};
use popctl_core::support::{solve_support_game, SupportWitness};
use popctl_core::synth::{decide, ArenaOptions, Controller, DEFAULT_NODE_BUDGET};
use popctl_core::{generate, parse_nfa, GadgetSpec, Nfa, Player};

use session::{controller_for, NamedSplit, Session, Status};

/// Exit status contract.
pub mod exit {
    /// YES, Player 1, won.
    pub const OK: u8 = 0;
    /// NO, Player 2, lost.
    pub const NEGATIVE: u8 = 1;
    /// Parse, I/O or budget failure.
    pub const ERROR: u8 = 2;
    /// Simulation ran out of steps.
    pub const INCONCLUSIVE: u8 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "popctl", version, about = "Population control for NFAs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdversaryArg {
    Even,
    Oneoff,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Can one controller gather every finite population in the target?
    Decide {
        file: PathBuf,
        /// Write the synthesized controller here (JSON).
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// Parity arena node limit.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        /// Keep every action at supports with a synchronizing word.
        #[arg(long)]
        no_shortcut: bool,
    },
    /// Solve the game where the population is arbitrarily large.
    Support { file: PathBuf },
    /// Play a controller against an adversary.
    Simulate {
        file: PathBuf,
        #[arg(short)]
        m: u64,
        #[arg(long, value_enum, default_value = "even")]
        adversary: AdversaryArg,
        /// Required with `--adversary random`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Controller JSON from `decide --strategy`; synthesized if absent.
        #[arg(long, conflicts_with = "scripted_time")]
        strategy: Option<PathBuf>,
        /// Hand-written strategy for the try/keep timing automaton.
        #[arg(long)]
        scripted_time: bool,
        /// Print one line per step.
        #[arg(long)]
        trace: bool,
    },
    /// Winner of the game with exactly `m` agents.
    Exact {
        file: PathBuf,
        #[arg(short)]
        m: u64,
        #[arg(long, default_value_t = ExactBudget::default().max_configs)]
        max_configs: usize,
    },
    /// Smallest population Player 2 wins, scanning up to `--max`.
    Cutoff {
        file: PathBuf,
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = ExactBudget::default().max_configs)]
        max_configs: usize,
    },
    /// Write a built-in automaton such as `split`, `time`, `linear:3`.
    Gen {
        spec: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// HTTP session API and browser client.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory with the client bundle, served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = server::DEFAULT_CAPACITY)]
        sessions: usize,
    },
    /// Play Player 2 against the synthesized controller in the terminal.
    Play {
        file: PathBuf,
        #[arg(short)]
        m: u64,
    },
}

/// Reads an automaton file; `gadget:<spec>` names a built-in one.
pub fn load_nfa(path: &Path) -> anyhow::Result<Nfa> {
    if let Some(spec) = path.to_str().and_then(|s| s.strip_prefix("gadget:")) {
        let spec: GadgetSpec = spec.parse().map_err(|e: String| anyhow!(e))?;
        return Ok(generate(&spec)?);
    }
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_nfa(&text).with_context(|| format!("parsing {}", path.display()))
}

fn budget(max_configs: usize) -> ExactBudget {
    ExactBudget {
        max_configs,
        ..ExactBudget::default()
    }
}

/// Runs one command, writing its report to `out`, and returns the exit code.
pub fn execute(cmd: Command, out: &mut dyn Write, input: &mut dyn BufRead) -> anyhow::Result<u8> {
    match cmd {
        Command::Decide {
            file,
            strategy,
            budget,
            no_shortcut,
        } => {
            let nfa = Arc::new(load_nfa(&file)?);
            let opts = ArenaOptions {
                node_budget: budget,
                sync_shortcut: !no_shortcut,
                ..Default::default()
            };
            let d = decide(&nfa, opts)?;
            let yes = d.winner == Player::One;
            writeln!(out, "{}", if yes { "YES" } else { "NO" })?;
            let s = &d.stats;
            writeln!(
                out,
                "arena: {} choice nodes, {} response nodes, {} edges",
                s.choice_nodes, s.response_nodes, s.edges
            )?;
            let prios: Vec<String> = s
                .priorities
                .iter()
                .map(|(p, c)| format!("{p}:{c}"))
                .collect();
            writeln!(out, "priorities: {}", prios.join(" "))?;
            if let Some(c) = &d.controller {
                writeln!(out, "controller: {} memory states", c.len())?;
                if let Some(path) = strategy {
                    std::fs::write(&path, c.to_json())
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            } else if strategy.is_some() {
                writeln!(out, "no controller written")?;
            }
            Ok(if yes { exit::OK } else { exit::NEGATIVE })
        }
        Command::Support { file } => {
            let nfa = Arc::new(load_nfa(&file)?);
            let r = solve_support_game(&nfa);
            writeln!(out, "{}", r.winner)?;
            match &r.witness {
                SupportWitness::Word(w) => {
                    let names: Vec<&str> = w.iter().map(|&a| nfa.action_name(a)).collect();
                    writeln!(out, "word: {}", names.join(" "))?;
                }
                SupportWitness::Safe(sets) => {
                    writeln!(
                        out,
                        "reachable supports avoiding the target: {}",
                        sets.len()
                    )?;
                    if decide(&nfa, ArenaOptions::default()).is_ok_and(|d| d.winner == Player::One)
                    {
                        writeln!(
                            out,
                            "NOTE: every finite population can still be controlled (decide = YES)"
                        )?;
                    }
                }
            }
            Ok(if r.winner == Player::One {
                exit::OK
            } else {
                exit::NEGATIVE
            })
        }
        Command::Simulate {
            file,
            m,
            adversary,
            seed,
            budget,
            strategy,
            scripted_time,
            trace,
        } => {
            let nfa = Arc::new(load_nfa(&file)?);
            let mut adv = match (adversary, seed) {
                (AdversaryArg::Even, _) => Adversary::Even,
                (AdversaryArg::Oneoff, _) => Adversary::OneOff,
                (AdversaryArg::Random, Some(s)) => Adversary::random(s),
                (AdversaryArg::Random, None) => bail!("--adversary random needs --seed"),
            };
            let controller;
            let mut scripted;
            let mut cursor;
            let strat: &mut dyn Strategy = if scripted_time {
                scripted = ScriptedTime::new(&nfa)
                    .ok_or_else(|| anyhow!("not the timing automaton: states q0 qtop qbot k and actions try keep top bot restart expected"))?;
                &mut scripted
            } else {
                controller = match strategy {
                    Some(path) => {
                        let text = std::fs::read_to_string(&path)
                            .with_context(|| format!("reading {}", path.display()))?;
                        Controller::from_json(&text, Arc::clone(&nfa))?
                    }
                    None => controller_for(&nfa)?,
                };
                cursor = controller.cursor();
                &mut cursor
            };
            let o = run(&nfa, strat, m, &mut adv, budget, trace)?;
            if trace {
                write!(out, "{}", o.render_trace(&nfa))?;
            }
            let status = match o.status {
                RunStatus::Won => "won",
                RunStatus::Lost => "lost",
                RunStatus::Inconclusive => "inconclusive",
            };
            writeln!(out, "{status} after {} steps", o.steps)?;
            writeln!(out, "final: {}", o.final_config.render(&nfa))?;
            Ok(match o.status {
                RunStatus::Won => exit::OK,
                RunStatus::Lost => exit::NEGATIVE,
                RunStatus::Inconclusive => exit::INCONCLUSIVE,
            })
        }
        Command::Exact {
            file,
            m,
            max_configs,
        } => {
            let nfa = load_nfa(&file)?;
            let w = exact_winner(&nfa, m, budget(max_configs))?;
            writeln!(out, "{w}")?;
            Ok(if w == Player::One {
                exit::OK
            } else {
                exit::NEGATIVE
            })
        }
        Command::Cutoff {
            file,
            max,
            max_configs,
        } => {
            let nfa = load_nfa(&file)?;
            match find_cutoff(&nfa, max, budget(max_configs))? {
                CutoffResult::Cutoff(c) => {
                    writeln!(out, "cutoff = {c}")?;
                    Ok(exit::NEGATIVE)
                }
                CutoffResult::NoneUpTo(k) => {
                    writeln!(out, "no cutoff up to {k}")?;
                    Ok(exit::OK)
                }
            }
        }
        Command::Gen { spec, output } => {
            let spec: GadgetSpec = spec.parse().map_err(|e: String| anyhow!(e))?;
            let text = generate(&spec)?.to_text();
            match output {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => write!(out, "{text}")?,
            }
            Ok(exit::OK)
        }
        Command::Serve {
            port,
            static_dir,
            sessions,
        } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(port, static_dir, sessions))?;
            Ok(exit::OK)
        }
        Command::Play { file, m } => {
            let nfa = Arc::new(load_nfa(&file)?);
            let controller = Arc::new(controller_for(&nfa)?);
            let session = Session::new("terminal".into(), nfa, controller, m)?;
            play_terminal(session, out, input)
        }
    }
}

fn show(view: &session::SessionView, out: &mut dyn Write) -> std::io::Result<()> {
    let counts: Vec<String> = view
        .states
        .iter()
        .filter(|q| view.counts[*q] > 0)
        .map(|q| format!("{q}:{}", view.counts[q]))
        .collect();
    write!(out, "step {}: {}", view.step, counts.join(","))?;
    match &view.proposed_action {
        Some(a) => writeln!(out, "  controller plays {a}"),
        None => writeln!(out, "  {:?}", view.status),
    }
}

/// Prompts for one count per successor of each occupied state. `u` undoes
/// the last step, `q` quits.
fn play_terminal(
    mut s: Session,
    out: &mut dyn Write,
    input: &mut dyn BufRead,
) -> anyhow::Result<u8> {
    let mut line = String::new();
    'game: loop {
        let view = s.view();
        show(&view, out)?;
        match view.status {
            Status::Won => return Ok(exit::OK),
            Status::Inconclusive => return Ok(exit::INCONCLUSIVE),
            Status::Running => {}
        }
        let mut split = NamedSplit::new();
        for q in view
            .states
            .iter()
            .filter(|q| view.legal_successors.contains_key(*q))
        {
            let succ = &view.legal_successors[q];
            let count = view.counts[q];
            if let [only] = succ.as_slice() {
                split
                    .entry(q.clone())
                    .or_default()
                    .insert(only.clone(), count);
                continue;
            }
            loop {
                write!(out, "{q} ({count}) -> {}: ", succ.join(" "))?;
                out.flush()?;
                line.clear();
                if input.read_line(&mut line)? == 0 {
                    return Ok(exit::INCONCLUSIVE);
                }
                match line.trim() {
                    "q" => return Ok(exit::INCONCLUSIVE),
                    "u" => {
                        if let Err(e) = s.undo() {
                            writeln!(out, "{e}")?;
                        }
                        continue 'game;
                    }
                    text => {
                        let nums: Result<Vec<u64>, _> =
                            text.split_whitespace().map(str::parse).collect();
                        match nums {
                            Ok(v) if v.len() == succ.len() => {
                                let row = split.entry(q.clone()).or_default();
                                for (r, c) in succ.iter().zip(v) {
                                    row.insert(r.clone(), c);
                                }
                                break;
                            }
                            _ => writeln!(out, "enter {} counts", succ.len())?,
                        }
                    }
                }
            }
        }
        if let Err(e) = s.play(&split) {
            writeln!(out, "rejected: {e}")?;
        }
    }
}
