//! Random model generators and brute-force oracles shared by integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use pstctl::digital::{AgentInfo, DigitalMdp, DigitalState, MdpParts, MoveKind, Participant};
use pstctl::model::TimeInterval;
use pstctl::strategy::{Block, JointStrategyIrP, StrategySpace};

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("models")
}

/// `(file name, text)` of every hand-written model, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(models_dir())
        .expect("models dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "pta"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// 1 to 3 distinct targets with small integer weights, mostly just ahead of
/// `near`; with probability `jump` a target is anywhere.
fn distribution<R: Rng>(rng: &mut R, n: usize, near: usize, jump: f64) -> Vec<(BigRational, usize)> {
    let k = rng.random_range(1..=3usize.min(n));
    let mut targets: Vec<usize> = Vec::new();
    while targets.len() < k {
        // mostly forward, sometimes anywhere
        let t = if rng.random_bool(jump) {
            rng.random_range(0..n)
        } else {
            (near + rng.random_range(0..4)).min(n - 1)
        };
        if !targets.contains(&t) {
            targets.push(t);
        }
    }
    let weights: Vec<i64> = targets.iter().map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    weights.into_iter().map(|w| ratio(w, total)).zip(targets).collect()
}

fn act(action: usize, agent: usize, location: usize) -> MoveKind {
    MoveKind::Act {
        action,
        participants: vec![Participant { agent, location, edge: action }],
    }
}

fn random_labels<R: Rng>(rng: &mut R) -> Vec<usize> {
    (0..2).filter(|_| rng.random_bool(0.3)).collect()
}

/// Nondeterministic MDP over a single opponent agent with 1 to 3 moves per
/// state, at most one of them a tick.
pub fn random_mdp<R: Rng>(rng: &mut R, n: usize) -> DigitalMdp {
    let mut states = Vec::new();
    let mut labels = Vec::new();
    let mut moves = Vec::new();
    for s in 0..n {
        let loc = rng.random_range(0..3);
        states.push(DigitalState { locations: vec![loc], valuation: vec![] });
        labels.push(random_labels(rng));
        let mut list = Vec::new();
        if rng.random_bool(0.6) {
            list.push((MoveKind::Tick, distribution(rng, n, s, 0.2)));
        }
        let acts = rng.random_range(if list.is_empty() { 1 } else { 0 }..=2);
        for a in 0..acts {
            list.push((act(a, 0, loc), distribution(rng, n, s, 0.2)));
        }
        moves.push(list);
    }
    DigitalMdp::from_parts(MdpParts {
        agents: vec![AgentInfo { name: "E".into(), locations: vec!["l0".into(), "l1".into(), "l2".into()] }],
        actions: vec!["a".into(), "b".into(), "c".into()],
        propositions: vec!["p".into(), "q".into()],
        states,
        labels,
        moves,
    })
    .expect("well-formed random mdp")
}

/// Shape knobs for [`random_parametric`].
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub states: usize,
    /// Chance that a state belongs to the coalition.
    pub coalition: f64,
    /// Chance that a transition jumps to an arbitrary state.
    pub jump: f64,
}

/// Fully probabilistic once the coalition agent `C` (agent 0) is fixed:
/// each state either offers a random nonempty subset of its block's actions
/// or a single plain move. Block sizes are `sizes`.
pub fn random_parametric<R: Rng>(rng: &mut R, shape: Shape, sizes: &[usize]) -> (DigitalMdp, StrategySpace) {
    let n = shape.states;
    let names = ["a", "b", "c"];
    let blocks: Vec<Block> = sizes
        .iter()
        .enumerate()
        .map(|(l, &d)| Block {
            agent: 0,
            location: l,
            agent_name: "C".into(),
            location_name: format!("c{l}"),
            actions: names[..d].iter().map(|s| s.to_string()).collect(),
        })
        .collect();
    let mut states = Vec::new();
    let mut labels = Vec::new();
    let mut moves = Vec::new();
    for s in 0..n {
        let mut list = Vec::new();
        if rng.random_bool(shape.coalition) {
            let l = rng.random_range(0..sizes.len());
            states.push(DigitalState { locations: vec![l, 0], valuation: vec![] });
            let mut enabled: Vec<usize> = (0..sizes[l]).filter(|_| rng.random_bool(0.8)).collect();
            if enabled.is_empty() {
                enabled.push(rng.random_range(0..sizes[l]));
            }
            for a in enabled {
                list.push((act(a, 0, l), distribution(rng, n, s, shape.jump)));
            }
        } else {
            states.push(DigitalState { locations: vec![sizes.len(), 0], valuation: vec![] });
            let kind = if rng.random_bool(0.5) { MoveKind::Tick } else { act(3, 1, 0) };
            list.push((kind, distribution(rng, n, s, shape.jump)));
        }
        labels.push(random_labels(rng));
        moves.push(list);
    }
    let mut c_locations: Vec<String> = (0..sizes.len()).map(|l| format!("c{l}")).collect();
    c_locations.push("plain".into());
    let mdp = DigitalMdp::from_parts(MdpParts {
        agents: vec![
            AgentInfo { name: "C".into(), locations: c_locations },
            AgentInfo { name: "E".into(), locations: vec!["e".into()] },
        ],
        actions: vec!["a".into(), "b".into(), "c".into(), "env".into()],
        propositions: vec!["p".into(), "q".into()],
        states,
        labels,
        moves,
    })
    .expect("well-formed random parametric model");
    (mdp, StrategySpace::from_blocks(vec![0], blocks))
}

/// Interior point of the strategy simplex, bounded away from the faces.
pub fn random_theta<R: Rng>(rng: &mut R, space: &StrategySpace) -> JointStrategyIrP {
    let weights = space
        .blocks()
        .iter()
        .map(|b| {
            let raw: Vec<f64> = b.actions.iter().map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        })
        .collect();
    JointStrategyIrP { weights }
}

/// States reachable from the initial state.
pub fn reachable(mdp: &DigitalMdp) -> Vec<bool> {
    let mut seen = vec![false; mdp.num_states()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(s) = stack.pop() {
        for m in mdp.moves(s) {
            for (t, _) in mdp.transitions(m) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
    }
    seen
}

pub fn random_set<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(density)).collect()
}

pub fn random_interval<R: Rng>(rng: &mut R) -> TimeInterval {
    let lower = rng.random_range(0..4);
    if rng.random_bool(0.25) {
        TimeInterval::new(lower, None).unwrap()
    } else {
        TimeInterval::bounded(lower, lower + rng.random_range(0..5))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Opt {
    Min,
    Max,
}

/// Value function over `(state, elapsed ticks)` solved by plain in-place
/// sweeps over every pair until nothing moves. `terminal` decides pairs
/// outright; `beyond` is the value once the interval's upper bound is passed.
fn sweep(
    mdp: &DigitalMdp,
    interval: TimeInterval,
    opt: Opt,
    start: f64,
    beyond: f64,
    terminal: impl Fn(usize, u32) -> Option<f64>,
) -> Vec<f64> {
    let n = mdp.num_states();
    let top = interval.upper.unwrap_or(interval.lower);
    let layers = top as usize + 1;
    let mut v = vec![start; n * layers];
    for e in 0..=top {
        for s in 0..n {
            if let Some(x) = terminal(s, e) {
                v[e as usize * n + s] = x;
            }
        }
    }
    for _ in 0..2_000_000 {
        let mut delta: f64 = 0.0;
        for e in (0..=top).rev() {
            for s in 0..n {
                if terminal(s, e).is_some() {
                    continue;
                }
                let mut best: Option<f64> = None;
                for m in mdp.moves(s) {
                    let next = if m.is_tick() {
                        match interval.upper {
                            Some(u) if e + 1 > u => None,
                            Some(_) => Some(e + 1),
                            None => Some((e + 1).min(interval.lower)),
                        }
                    } else {
                        Some(e)
                    };
                    let value: f64 = mdp
                        .transitions(m)
                        .map(|(t, p)| p * next.map_or(beyond, |e2| v[e2 as usize * n + t]))
                        .sum();
                    best = Some(match (best, opt) {
                        (None, _) => value,
                        (Some(b), Opt::Min) => b.min(value),
                        (Some(b), Opt::Max) => b.max(value),
                    });
                }
                let slot = &mut v[e as usize * n + s];
                let new = best.expect("every state has a move");
                delta = delta.max((new - *slot).abs());
                *slot = new;
            }
        }
        if delta < 1e-15 {
            break;
        }
    }
    v.truncate(n);
    v
}

/// `Pr_opt(S1 U_I S2)` as a least fixed point from 0.
pub fn oracle_until(mdp: &DigitalMdp, s1: &[bool], s2: &[bool], interval: TimeInterval, opt: Opt) -> Vec<f64> {
    sweep(mdp, interval, opt, 0.0, 0.0, |s, e| {
        if interval.contains(e) && s2[s] {
            Some(1.0)
        } else if !s1[s] {
            Some(0.0)
        } else {
            None
        }
    })
}

/// `Pr_opt(S1 R_I S2)` straight from its definition, as a greatest fixed
/// point from 1: every position inside `I` satisfies `S2` unless an earlier
/// position satisfied `S1`.
pub fn oracle_release(mdp: &DigitalMdp, s1: &[bool], s2: &[bool], interval: TimeInterval, opt: Opt) -> Vec<f64> {
    sweep(mdp, interval, opt, 1.0, 1.0, |s, e| {
        if interval.contains(e) && !s2[s] {
            Some(0.0)
        } else if s1[s] {
            Some(1.0)
        } else {
            None
        }
    })
}
