//! Interval-bounded until and release by layered value iteration.
//!
//! A digital path position carries the number of ticks taken so far. For an
//! interval `[a, b]` the elapsed counter runs over `0..=b`; for `[a, inf)`
//! it saturates at `a`, and that top layer is solved as an unbounded
//! reachability problem. Within a layer the dependency graph of undecided
//! states is split into strongly connected components, processed sinks
//! first; cyclic components are iterated Gauss-Seidel style from 0 so the
//! least fixed point is approached from below.

use std::time::Instant;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::digital::{DigitalMdp, StateId};
use crate::error::{Error, Result};
use crate::model::TimeInterval;
use crate::strategy::InducedModel;

/// Which outcome the residual nondeterminism is resolved towards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Min,
    Max,
}

impl Mode {
    pub fn opposite(self) -> Mode {
        match self {
            Mode::Min => Mode::Max,
            Mode::Max => Mode::Min,
        }
    }

    fn better(self, a: f64, b: f64) -> f64 {
        match self {
            Mode::Min => a.min(b),
            Mode::Max => a.max(b),
        }
    }

    fn worst(self) -> f64 {
        match self {
            Mode::Min => f64::INFINITY,
            Mode::Max => f64::NEG_INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViConfig {
    /// Largest per-sweep change at which a component counts as converged.
    pub tolerance: f64,
    pub max_sweeps: u64,
    /// Abandon the computation with [`Error::Timeout`] after this instant.
    pub deadline: Option<Instant>,
}

impl Default for ViConfig {
    fn default() -> Self {
        ViConfig {
            tolerance: 1e-10,
            max_sweeps: 1_000_000,
            deadline: None,
        }
    }
}

impl ViConfig {
    pub(crate) fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }
}

/// Per-state probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Self {
        ProbVector(values)
    }

    /// Value at `s`, clamped to `[0, 1]`.
    pub fn get(&self, s: StateId) -> f64 {
        self.0[s].clamp(0.0, 1.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn raw(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|v| v.clamp(0.0, 1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Zero,
    One,
    Open,
}

/// Evaluation order of the undecided states of one layer kind.
#[derive(Clone, Debug)]
struct LayerOrder {
    status: Vec<Status>,
    /// Components in dependency order, each with a cyclicity flag.
    components: Vec<(Vec<StateId>, bool)>,
}

impl LayerOrder {
    fn new(mdp: &DigitalMdp, status: Vec<Status>, ticks_stay: bool) -> Self {
        let n = mdp.num_states();
        let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
        for _ in 0..n {
            graph.add_node(());
        }
        let mut self_loop = vec![false; n];
        for s in 0..n {
            if status[s] != Status::Open {
                continue;
            }
            for m in mdp.moves(s) {
                if m.is_tick() && !ticks_stay {
                    continue;
                }
                for (t, _) in mdp.transitions(m) {
                    if status[t] == Status::Open {
                        if t == s {
                            self_loop[s] = true;
                        } else {
                            graph.add_edge(NodeIndex::new(s), NodeIndex::new(t), ());
                        }
                    }
                }
            }
        }
        let components = tarjan_scc(&graph)
            .into_iter()
            .filter_map(|scc| {
                let states: Vec<StateId> = scc
                    .into_iter()
                    .map(|i| i.index())
                    .filter(|&s| status[s] == Status::Open)
                    .collect();
                if states.is_empty() {
                    return None;
                }
                let cyclic = states.len() > 1 || self_loop[states[0]];
                let mut states = states;
                states.sort_unstable();
                Some((states, cyclic))
            })
            .collect();
        LayerOrder { status, components }
    }
}

/// Reusable evaluation schedule for fixed `(S1, S2, I)` on one MDP; only the
/// strategy weights change between solves.
#[derive(Clone, Debug)]
pub struct UntilPlan {
    interval: TimeInterval,
    /// Layers with elapsed time below the lower bound.
    before: LayerOrder,
    /// Layers inside the interval (finite upper bound).
    inside: Option<LayerOrder>,
    /// Saturated top layer for an unbounded interval.
    top: Option<LayerOrder>,
}

impl UntilPlan {
    pub fn new(mdp: &DigitalMdp, s1: &[bool], s2: &[bool], interval: TimeInterval) -> Self {
        let n = mdp.num_states();
        assert_eq!(s1.len(), n);
        assert_eq!(s2.len(), n);
        let open_unless = |hit: bool| -> Vec<Status> {
            (0..n)
                .map(|s| {
                    if hit && s2[s] {
                        Status::One
                    } else if !s1[s] {
                        Status::Zero
                    } else {
                        Status::Open
                    }
                })
                .collect()
        };
        let before = LayerOrder::new(mdp, open_unless(false), false);
        let (inside, top) = match interval.upper {
            Some(_) => (Some(LayerOrder::new(mdp, open_unless(true), false)), None),
            None => (None, Some(LayerOrder::new(mdp, open_unless(true), true))),
        };
        UntilPlan {
            interval,
            before,
            inside,
            top,
        }
    }

    pub fn solve(&self, model: &InducedModel, mode: Mode, vi: &ViConfig) -> Result<ProbVector> {
        let n = model.num_states();
        let a = self.interval.lower;
        let mut next: Option<Vec<f64>> = None;
        let mut cur = vec![0.0; n];
        let layers: Vec<(u32, &LayerOrder, bool)> = match self.interval.upper {
            Some(b) => (0..=b)
                .rev()
                .map(|e| {
                    let order = if e >= a {
                        self.inside.as_ref().expect("finite plan")
                    } else {
                        &self.before
                    };
                    (e, order, false)
                })
                .collect(),
            None => std::iter::once((a, self.top.as_ref().expect("unbounded plan"), true))
                .chain((0..a).rev().map(|e| (e, &self.before, false)))
                .collect(),
        };
        for (_, order, ticks_stay) in layers {
            vi.check_deadline()?;
            solve_layer(model, order, &mut cur, next.as_deref(), ticks_stay, mode, vi)?;
            let done = std::mem::replace(&mut cur, vec![0.0; n]);
            next = Some(done);
        }
        Ok(ProbVector(next.expect("at least one layer")))
    }
}

fn solve_layer(
    model: &InducedModel,
    order: &LayerOrder,
    cur: &mut [f64],
    next: Option<&[f64]>,
    ticks_stay: bool,
    mode: Mode,
    vi: &ViConfig,
) -> Result<()> {
    for (s, st) in order.status.iter().enumerate() {
        cur[s] = match st {
            Status::One => 1.0,
            _ => 0.0,
        };
    }
    for (states, cyclic) in &order.components {
        if !cyclic {
            let s = states[0];
            cur[s] = state_value(model, s, cur, next, ticks_stay, mode);
            continue;
        }
        let mut sweeps = 0u64;
        loop {
            let mut change: f64 = 0.0;
            for &s in states {
                let v = state_value(model, s, cur, next, ticks_stay, mode);
                change = change.max((v - cur[s]).abs());
                cur[s] = v;
            }
            sweeps += 1;
            if change < vi.tolerance {
                break;
            }
            if sweeps.is_multiple_of(4096) {
                vi.check_deadline()?;
            }
            if sweeps >= vi.max_sweeps {
                return Err(Error::NonConvergence {
                    sweeps,
                    residual: change,
                });
            }
        }
    }
    Ok(())
}

#[inline]
fn state_value(
    model: &InducedModel,
    s: StateId,
    cur: &[f64],
    next: Option<&[f64]>,
    ticks_stay: bool,
    mode: Mode,
) -> f64 {
    let mdp = model.mdp();
    let mut best = mode.worst();
    for c in model.choice_range(s) {
        let mut value = 0.0;
        for o in model.option_range(c) {
            let w = model.option_weight(o);
            if w == 0.0 {
                continue;
            }
            let mut opt = mode.worst();
            for &id in model.option_variants(o) {
                let m = mdp.move_by_id(id as usize);
                let source = if m.is_tick() && !ticks_stay { next } else { Some(cur) };
                let v = match source {
                    None => 0.0,
                    Some(vals) => {
                        let (targets, probs) = mdp.transition_slices(m);
                        targets.iter().zip(probs).map(|(&t, p)| p * vals[t]).sum()
                    }
                };
                opt = mode.better(opt, v);
            }
            value += w * opt;
        }
        best = mode.better(best, value);
    }
    best
}

/// Min or max probability of `S1 U_I S2` from every state.
pub fn prob_until(
    model: &InducedModel,
    s1: &[bool],
    s2: &[bool],
    interval: TimeInterval,
    mode: Mode,
    vi: &ViConfig,
) -> Result<ProbVector> {
    UntilPlan::new(model.mdp(), s1, s2, interval).solve(model, mode, vi)
}

/// Min or max probability of `S1 R_I S2`, through
/// `Pr_mode(S1 R S2) = 1 - Pr_opposite(!S1 U !S2)`.
pub fn prob_release(
    model: &InducedModel,
    s1: &[bool],
    s2: &[bool],
    interval: TimeInterval,
    mode: Mode,
    vi: &ViConfig,
) -> Result<ProbVector> {
    let n1: Vec<bool> = s1.iter().map(|b| !b).collect();
    let n2: Vec<bool> = s2.iter().map(|b| !b).collect();
    let dual = prob_until(model, &n1, &n2, interval, mode.opposite(), vi)?;
    Ok(ProbVector(dual.iter().map(|v| 1.0 - v).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digital::{digitize, DEFAULT_STATE_CAP};
    use crate::lang::parse_model;

    const RETRY: &str = "
        agent r {
          clocks x;
          loc s invariant x <= 1 {
            protocol flip;
            on flip when x = 1 goto { 1/2: reset {x} -> goal; 1/2: reset {x} -> s; }
          }
          loc goal { labels goal; }
        }";

    fn goal_sets(mdp: &DigitalMdp) -> (Vec<bool>, Vec<bool>) {
        let g = mdp.proposition_index("goal").unwrap();
        let s2: Vec<bool> = (0..mdp.num_states()).map(|s| mdp.labels(s).contains(&g)).collect();
        (vec![true; mdp.num_states()], s2)
    }

    #[test]
    fn retry_chain_three_quarters() {
        let mdp = digitize(&parse_model(RETRY).unwrap(), DEFAULT_STATE_CAP).unwrap();
        let model = InducedModel::adversarial(&mdp);
        let (s1, s2) = goal_sets(&mdp);
        let vi = ViConfig::default();
        for mode in [Mode::Min, Mode::Max] {
            let p = prob_until(&model, &s1, &s2, TimeInterval::bounded(0, 2), mode, &vi).unwrap();
            assert!((p.get(0) - 0.75).abs() < 1e-10, "{mode:?} {}", p.get(0));
        }
        let p = prob_until(&model, &s1, &s2, TimeInterval::new(0, None).unwrap(), Mode::Min, &vi).unwrap();
        assert!((p.get(0) - 1.0).abs() < 1e-9);
        let not_s2: Vec<bool> = s2.iter().map(|b| !b).collect();
        let r = prob_release(&model, &vec![false; s1.len()], &not_s2, TimeInterval::bounded(0, 2), Mode::Max, &vi)
            .unwrap();
        assert!((r.get(0) - 0.25).abs() < 1e-10);
    }

    #[test]
    fn immediate_and_impossible() {
        let mdp = digitize(&parse_model(RETRY).unwrap(), DEFAULT_STATE_CAP).unwrap();
        let model = InducedModel::adversarial(&mdp);
        let n = mdp.num_states();
        let vi = ViConfig::default();
        let all = vec![true; n];
        let none = vec![false; n];
        let p = prob_until(&model, &none, &all, TimeInterval::bounded(0, 3), Mode::Min, &vi).unwrap();
        assert!(p.iter().all(|v| v == 1.0));
        let p = prob_until(&model, &none, &none, TimeInterval::bounded(0, 3), Mode::Max, &vi).unwrap();
        assert!(p.iter().all(|v| v == 0.0));
        // S2 only counts once the interval has opened
        let p = prob_until(&model, &none, &all, TimeInterval::bounded(1, 3), Mode::Max, &vi).unwrap();
        assert!(p.iter().all(|v| v == 0.0));
    }

    #[test]
    fn adversary_picks_the_worse_branch() {
        let text = "
            agent a { loc s { protocol good, bad; on good goto { 1: -> g; } on bad goto { 1: -> b; } }
                      loc g { labels goal; } loc b { } }";
        let mdp = digitize(&parse_model(text).unwrap(), DEFAULT_STATE_CAP).unwrap();
        let model = InducedModel::adversarial(&mdp);
        let (s1, s2) = goal_sets(&mdp);
        let vi = ViConfig::default();
        let i = TimeInterval::new(0, None).unwrap();
        assert_eq!(prob_until(&model, &s1, &s2, i, Mode::Min, &vi).unwrap().get(0), 0.0);
        assert_eq!(prob_until(&model, &s1, &s2, i, Mode::Max, &vi).unwrap().get(0), 1.0);
    }
}
