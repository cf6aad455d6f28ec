//! Exact reachability probabilities as rational functions of the strategy
//! weights, for fully probabilistic induced models.
//!
//! Each block with `d` actions contributes `d - 1` variables; the last
//! action's weight is `1 - Σ` of the others.

mod poly;
mod ratfn;

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;

pub use poly::{Mono, Poly};
pub use ratfn::RatFn;

use crate::digital::{DigitalMdp, StateId};
use crate::error::{Error, Result};
use crate::model::TimeInterval;
use crate::strategy::{InducePlan, JointStrategyIrP, StrategySpace};

pub const DEFAULT_ORACLE_CAP: usize = 2_000;

/// Symbolic one-step distributions of a fully probabilistic induced model.
#[derive(Clone, Debug)]
pub struct ParametricModel<'a> {
    mdp: &'a DigitalMdp,
    space: &'a StrategySpace,
    nvars: usize,
    /// Per state: `(target, weight, is_tick)`.
    steps: Vec<Vec<(StateId, RatFn, bool)>>,
}

impl<'a> ParametricModel<'a> {
    /// Fails when some state keeps an adversarial choice or the model has
    /// more than `cap` states.
    pub fn new(mdp: &'a DigitalMdp, space: &'a StrategySpace, cap: usize) -> Result<Self> {
        if mdp.num_states() > cap {
            return Err(Error::ResourceCap {
                what: "parametric oracle states",
                count: mdp.num_states() as u128,
                cap: cap as u128,
            });
        }
        let plan = InducePlan::new(mdp, space)?;
        let nvars: usize = space.blocks().iter().map(|b| b.actions.len() - 1).sum();
        let weights = symbolic_weights(space, nvars);
        let mut steps = Vec::with_capacity(mdp.num_states());
        for s in 0..mdp.num_states() {
            let (plain, groups) = plan.structure(s);
            let nondeterministic = || {
                Error::Parametric(format!("residual nondeterminism in state {s}"))
            };
            let mut out: Vec<(StateId, RatFn, bool)> = Vec::new();
            match (plain, groups.as_slice()) {
                ([id], []) => {
                    let m = mdp.move_by_id(*id);
                    for (t, p) in mdp.exact_transitions(m) {
                        out.push((t, RatFn::constant(nvars, p.clone()), m.is_tick()));
                    }
                }
                ([], [group]) => {
                    let raw: Vec<RatFn> = group
                        .iter()
                        .map(|(factors, _)| {
                            factors
                                .iter()
                                .fold(RatFn::one(nvars), |acc, &(b, pos)| acc.mul(&weights[b][pos]))
                        })
                        .collect();
                    let total = raw.iter().fold(RatFn::zero(nvars), |acc, w| acc.add(w));
                    for ((_, variants), w) in group.iter().zip(&raw) {
                        let [id] = variants else {
                            return Err(nondeterministic());
                        };
                        let w = w.div(&total).ok_or_else(|| {
                            Error::Parametric(format!("weights of state {s} sum to zero"))
                        })?;
                        let m = mdp.move_by_id(*id);
                        for (t, p) in mdp.exact_transitions(m) {
                            out.push((t, w.scale(p), m.is_tick()));
                        }
                    }
                }
                _ => return Err(nondeterministic()),
            }
            steps.push(out);
        }
        Ok(ParametricModel {
            mdp,
            space,
            nvars,
            steps,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Variable values for a strategy: all but the last weight of each block.
    pub fn point(&self, theta: &JointStrategyIrP) -> Vec<f64> {
        theta
            .weights
            .iter()
            .flat_map(|w| w[..w.len() - 1].iter().copied())
            .collect()
    }

    pub fn space(&self) -> &StrategySpace {
        self.space
    }

    /// Probability of `S1 U_I S2` from the initial state.
    pub fn until(&self, s1: &[bool], s2: &[bool], interval: TimeInterval) -> Result<RatFn> {
        let a = interval.lower;
        let layer_after_tick = |e: u32| -> Option<u32> {
            match interval.upper {
                Some(b) => (e < b).then_some(e + 1),
                None => Some((e + 1).min(a)),
            }
        };
        // node 0 is the target, node 1 the initial pair
        let mut index: HashMap<(StateId, u32), usize> = HashMap::new();
        let mut order: Vec<(StateId, u32)> = Vec::new();
        let mut edges: Vec<Vec<(usize, RatFn)>> = vec![Vec::new()];
        let classify = |s: StateId, e: u32| -> Option<bool> {
            if e >= a && s2[s] {
                Some(true)
            } else if !s1[s] {
                Some(false)
            } else {
                None
            }
        };
        let init = (self.mdp.initial(), 0);
        match classify(init.0, init.1) {
            Some(true) => return Ok(RatFn::one(self.nvars)),
            Some(false) => return Ok(RatFn::zero(self.nvars)),
            None => {}
        }
        index.insert(init, 1);
        order.push(init);
        edges.push(Vec::new());
        let mut next = 0;
        while next < order.len() {
            let (s, e) = order[next];
            let node = next + 1;
            next += 1;
            let mut out: Vec<(usize, RatFn)> = Vec::new();
            for (t, w, tick) in &self.steps[s] {
                let f = if *tick { layer_after_tick(e) } else { Some(e) };
                let Some(f) = f else { continue };
                let target = match classify(*t, f) {
                    Some(true) => 0,
                    Some(false) => continue,
                    None => *index.entry((*t, f)).or_insert_with(|| {
                        order.push((*t, f));
                        edges.push(Vec::new());
                        order.len()
                    }),
                };
                match out.iter_mut().find(|(v, _)| *v == target) {
                    Some((_, acc)) => *acc = acc.add(w),
                    None => out.push((target, w.clone())),
                }
            }
            edges[node] = out;
        }
        eliminate(edges, self.nvars)
    }

    /// Probability of reaching `target` within `horizon` ticks (unbounded
    /// when `None`).
    pub fn reach(&self, target: &[bool], horizon: Option<u32>) -> Result<RatFn> {
        let all = vec![true; self.mdp.num_states()];
        let interval = TimeInterval::new(0, horizon).expect("lower bound 0");
        self.until(&all, target, interval)
    }
}

/// `θ_{b,j}` as polynomials: a fresh variable for all but the last action.
fn symbolic_weights(space: &StrategySpace, nvars: usize) -> Vec<Vec<RatFn>> {
    let mut next = 0;
    space
        .blocks()
        .iter()
        .map(|b| {
            let d = b.actions.len();
            let mut ws: Vec<Poly> = (0..d - 1)
                .map(|i| Poly::var(nvars, next + i))
                .collect();
            let rest = ws
                .iter()
                .fold(Poly::one(nvars), |acc, v| &acc - v);
            ws.push(rest);
            next += d - 1;
            ws.into_iter().map(RatFn::from_poly).collect()
        })
        .collect()
}

/// State elimination on a graph whose node 0 is an absorbing target and
/// node 1 the start; returns the probability of reaching node 0 from 1.
fn eliminate(mut edges: Vec<Vec<(usize, RatFn)>>, nvars: usize) -> Result<RatFn> {
    let n = edges.len();
    // only nodes that can reach the target matter
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, out) in edges.iter().enumerate() {
        for (v, _) in out {
            preds[*v].push(u);
        }
    }
    let mut useful = vec![false; n];
    useful[0] = true;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for &u in &preds[v] {
            if !useful[u] {
                useful[u] = true;
                stack.push(u);
            }
        }
    }
    if !useful[1] {
        return Ok(RatFn::zero(nvars));
    }
    for out in &mut edges {
        out.retain(|(v, w)| useful[*v] && !w.is_zero());
    }
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, out) in edges.iter().enumerate() {
        if useful[u] {
            for (v, _) in out {
                if *v != u {
                    incoming[*v].push(u);
                }
            }
        }
    }
    let one = RatFn::one(nvars);
    let mut alive: Vec<usize> = (2..n).filter(|&s| useful[s]).collect();
    while !alive.is_empty() {
        // cheapest node first: fewest new edges
        let (i, _) = alive
            .iter()
            .enumerate()
            .min_by_key(|(_, &s)| (incoming[s].len() * edges[s].len(), std::cmp::Reverse(s)))
            .expect("nonempty");
        let s = alive.swap_remove(i);
        let mut out = std::mem::take(&mut edges[s]);
        let self_loop = out
            .iter()
            .position(|(v, _)| *v == s)
            .map(|i| out.swap_remove(i).1);
        let factor = match self_loop {
            Some(l) => Some(one.div(&one.sub(&l)).ok_or_else(|| {
                Error::Parametric("probability-one self-loop during elimination".into())
            })?),
            None => None,
        };
        let preds = std::mem::take(&mut incoming[s]);
        for u in preds {
            let Some(pos) = edges[u].iter().position(|(v, _)| *v == s) else {
                continue;
            };
            let (_, w_us) = edges[u].swap_remove(pos);
            let w_us = match &factor {
                Some(f) => w_us.mul(f),
                None => w_us,
            };
            for (v, w_sv) in &out {
                let add = w_us.mul(w_sv);
                match edges[u].iter_mut().find(|(x, _)| x == v) {
                    Some((_, acc)) => *acc = acc.add(&add),
                    None => {
                        edges[u].push((*v, add));
                        if *v != u && !incoming[*v].contains(&u) {
                            incoming[*v].push(u);
                        }
                    }
                }
            }
        }
        for (v, _) in &out {
            incoming[*v].retain(|&x| x != s);
        }
        out.clear();
    }
    let start = &edges[1];
    let to_target = start
        .iter()
        .find(|(v, _)| *v == 0)
        .map_or_else(|| RatFn::zero(nvars), |(_, w)| w.clone());
    match start.iter().find(|(v, _)| *v == 1) {
        None => Ok(to_target),
        Some((_, l)) => to_target.div(&one.sub(l)).ok_or_else(|| {
            Error::Parametric("probability-one self-loop at the initial state".into())
        }),
    }
}

/// Exact binary values of floating-point variables.
pub fn rational_point(values: &[f64]) -> Vec<BigRational> {
    values
        .iter()
        .map(|&v| BigRational::from_float(v).unwrap_or_else(BigRational::zero))
        .collect()
}
