//! Memoryless imperfect-information coalition strategies.
//!
//! A strategy assigns, to every local location of every coalition agent, a
//! distribution over the protocol actions available there. Each such
//! `(agent, location)` pair is a [`Block`]; the concatenated block vectors
//! are the strategy parameters.

use std::collections::HashMap;
use std::fmt::Write;

use crate::digital::{DigitalMdp, MoveKind, StateId};
use crate::error::{Error, Result};
use crate::model::{parse_probability, to_f64, Network};

/// One `(agent, location)` of the coalition with its available actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub agent: usize,
    pub location: usize,
    pub agent_name: String,
    pub location_name: String,
    pub actions: Vec<String>,
}

impl Block {
    pub fn label(&self) -> String {
        format!("{}.{}", self.agent_name, self.location_name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategySpace {
    coalition: Vec<usize>,
    blocks: Vec<Block>,
    index: HashMap<(usize, usize), usize>,
}

/// Blocks for every location with a nonempty protocol of every coalition
/// agent, in agent order then location order.
pub fn strategy_space(network: &Network, coalition: &[String]) -> Result<StrategySpace> {
    let mut members = Vec::new();
    for name in coalition {
        let i = network
            .agent_index(name)
            .ok_or_else(|| Error::UnknownAgent(name.clone()))?;
        members.push(i);
    }
    members.sort_unstable();
    members.dedup();
    let mut blocks = Vec::new();
    for &a in &members {
        let agent = &network.agents[a];
        for (l, loc) in agent.locations.iter().enumerate() {
            if loc.protocol.is_empty() {
                continue;
            }
            blocks.push(Block {
                agent: a,
                location: l,
                agent_name: agent.name.clone(),
                location_name: loc.name.clone(),
                actions: loc.protocol.clone(),
            });
        }
    }
    Ok(StrategySpace::from_blocks(members, blocks))
}

impl StrategySpace {
    /// Builds a space from explicit blocks (used for synthetic models).
    pub fn from_blocks(coalition: Vec<usize>, blocks: Vec<Block>) -> Self {
        let index = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| ((b.agent, b.location), i))
            .collect();
        StrategySpace {
            coalition,
            blocks,
            index,
        }
    }

    pub fn empty() -> Self {
        StrategySpace::from_blocks(Vec::new(), Vec::new())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn coalition(&self) -> &[usize] {
        &self.coalition
    }

    pub fn in_coalition(&self, agent: usize) -> bool {
        self.coalition.binary_search(&agent).is_ok()
    }

    pub fn block_index(&self, agent: usize, location: usize) -> Option<usize> {
        self.index.get(&(agent, location)).copied()
    }

    /// Sum of block sizes: one parameter per available action.
    pub fn parameter_count(&self) -> usize {
        self.blocks.iter().map(|b| b.actions.len()).sum()
    }

    /// Number of deterministic strategies, saturating.
    pub fn irp_count(&self) -> u128 {
        self.blocks
            .iter()
            .fold(1u128, |acc, b| acc.saturating_mul(b.actions.len() as u128))
    }

    /// Size of the simplex lattice of resolution `k`, saturating.
    pub fn grid_count(&self, k: u32) -> u128 {
        self.blocks.iter().fold(1u128, |acc, b| {
            acc.saturating_mul(binomial(k as u128 + b.actions.len() as u128 - 1, b.actions.len() as u128 - 1))
        })
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Probabilistic memoryless strategy: one distribution per block.
#[derive(Clone, Debug, PartialEq)]
pub struct JointStrategyIrP {
    pub weights: Vec<Vec<f64>>,
}

/// Deterministic memoryless strategy: one action index per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JointStrategyIrp {
    pub choice: Vec<usize>,
}

impl JointStrategyIrp {
    pub fn to_irp_distribution(&self, space: &StrategySpace) -> JointStrategyIrP {
        JointStrategyIrP {
            weights: space
                .blocks
                .iter()
                .zip(&self.choice)
                .map(|(b, &c)| (0..b.actions.len()).map(|i| if i == c { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }
}

impl JointStrategyIrP {
    pub fn uniform(space: &StrategySpace) -> Self {
        JointStrategyIrP {
            weights: space
                .blocks
                .iter()
                .map(|b| vec![1.0 / b.actions.len() as f64; b.actions.len()])
                .collect(),
        }
    }

    /// Checks block shapes and that every vector is a distribution.
    pub fn check(&self, space: &StrategySpace, tolerance: f64) -> Result<()> {
        if self.weights.len() != space.blocks.len() {
            return Err(Error::InvalidStrategy(format!(
                "{} distributions for {} blocks",
                self.weights.len(),
                space.blocks.len()
            )));
        }
        for (w, b) in self.weights.iter().zip(&space.blocks) {
            if w.len() != b.actions.len() {
                return Err(Error::InvalidStrategy(format!(
                    "{}: {} weights for {} actions",
                    b.label(),
                    w.len(),
                    b.actions.len()
                )));
            }
            if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(Error::InvalidStrategy(format!("{}: negative weight", b.label())));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > tolerance {
                return Err(Error::InvalidStrategy(format!(
                    "{}: weights sum to {total}",
                    b.label()
                )));
            }
        }
        Ok(())
    }

    /// `Some` when every block is a point distribution.
    pub fn as_irp(&self) -> Option<JointStrategyIrp> {
        let choice = self
            .weights
            .iter()
            .map(|w| {
                let ones: Vec<usize> = (0..w.len()).filter(|&i| w[i] == 1.0).collect();
                (ones.len() == 1 && w.iter().filter(|&&x| x != 0.0).count() == 1).then(|| ones[0])
            })
            .collect::<Option<Vec<_>>>()?;
        Some(JointStrategyIrp { choice })
    }

    /// Weight of `action` in the block of `(agent, location)`.
    pub fn weight(&self, space: &StrategySpace, agent: usize, location: usize, action: &str) -> Option<f64> {
        let b = space.block_index(agent, location)?;
        let pos = space.blocks[b].actions.iter().position(|a| a == action)?;
        Some(self.weights[b][pos])
    }

    /// `agent.location: action=prob, ...`, one line per block.
    pub fn to_text(&self, space: &StrategySpace) -> String {
        let mut out = String::new();
        for (b, w) in space.blocks.iter().zip(&self.weights) {
            let entries: Vec<String> = b
                .actions
                .iter()
                .zip(w)
                .map(|(a, p)| format!("{a}={p}"))
                .collect();
            writeln!(out, "{}: {}", b.label(), entries.join(", ")).unwrap();
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format. Every block must be
    /// present; omitted actions get weight 0; `#` starts a comment.
    pub fn from_text(space: &StrategySpace, text: &str) -> Result<Self> {
        let mut weights: Vec<Option<Vec<f64>>> = vec![None; space.blocks.len()];
        let labels: HashMap<String, usize> = space
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.label(), i))
            .collect();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::InvalidStrategy(format!("`{line}`: {m}"));
            let (label, body) = line.split_once(':').ok_or_else(|| bad("missing `:`"))?;
            let &b = labels
                .get(label.trim())
                .ok_or_else(|| bad("no such coalition location"))?;
            if weights[b].is_some() {
                return Err(bad("block given twice"));
            }
            let block = &space.blocks[b];
            let mut w = vec![0.0; block.actions.len()];
            for entry in body.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                let (action, p) = entry.split_once('=').ok_or_else(|| bad("expected action=prob"))?;
                let pos = block
                    .actions
                    .iter()
                    .position(|a| a == action.trim())
                    .ok_or_else(|| bad("action not in protocol"))?;
                let p = p.trim();
                w[pos] = match p.parse::<f64>() {
                    Ok(x) => x,
                    Err(_) => to_f64(&parse_probability(p).ok_or_else(|| bad("malformed probability"))?),
                };
            }
            weights[b] = Some(w);
        }
        let weights = weights
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                w.ok_or_else(|| Error::MissingBlock {
                    agent: space.blocks[i].agent_name.clone(),
                    location: space.blocks[i].location_name.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let s = JointStrategyIrP { weights };
        s.check(space, 1e-9)?;
        Ok(s)
    }

    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().flatten().copied()
    }
}

/// All deterministic strategies in lexicographic order (first block most
/// significant). Fails before enumerating when the count exceeds `cap`.
pub fn enumerate_irp(space: &StrategySpace, cap: u128) -> Result<impl Iterator<Item = JointStrategyIrp> + '_> {
    let count = space.irp_count();
    if count > cap {
        return Err(Error::ResourceCap {
            what: "irp strategy count",
            count,
            cap,
        });
    }
    let sizes: Vec<usize> = space.blocks.iter().map(|b| b.actions.len()).collect();
    let mut next = Some(vec![0usize; sizes.len()]);
    Ok(std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < sizes[i] {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(JointStrategyIrp { choice: current })
    }))
}

/// Compositions of `k` into `d` nonnegative parts, lexicographic.
fn compositions(k: u32, d: usize) -> Vec<Vec<u32>> {
    if d == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in compositions(k - first, d - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// The simplex lattice `{0, 1/k, ..., 1}` per block, as a product over
/// blocks in lexicographic order. Contains every deterministic strategy.
pub fn grid(space: &StrategySpace, k: u32, cap: u128) -> Result<impl Iterator<Item = JointStrategyIrP>> {
    assert!(k >= 1, "grid resolution must be positive");
    let count = space.grid_count(k);
    if count > cap {
        return Err(Error::ResourceCap {
            what: "grid candidate count",
            count,
            cap,
        });
    }
    let per_block: Vec<Vec<Vec<f64>>> = space
        .blocks
        .iter()
        .map(|b| {
            compositions(k, b.actions.len())
                .into_iter()
                .map(|c| c.into_iter().map(|x| x as f64 / k as f64).collect())
                .collect()
        })
        .collect();
    let sizes: Vec<usize> = per_block.iter().map(Vec::len).collect();
    let mut next = Some(vec![0usize; sizes.len()]);
    Ok(std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        while i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] < sizes[i] {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(JointStrategyIrP {
            weights: current
                .iter()
                .enumerate()
                .map(|(b, &j)| per_block[b][j].clone())
                .collect(),
        })
    }))
}

#[derive(Clone, Copy, Debug)]
pub struct RefineSchedule {
    pub initial_radius: f64,
    pub min_radius: f64,
    pub min_gain: f64,
    /// Passes over all coordinate pairs per radius.
    pub max_rounds: usize,
}

impl RefineSchedule {
    /// Radius `1/(2k)` halved down to `1e-4`; gains must exceed `1e-9`.
    pub fn for_resolution(k: u32) -> Self {
        RefineSchedule {
            initial_radius: 1.0 / (2.0 * k as f64),
            min_radius: 1e-4,
            min_gain: 1e-9,
            max_rounds: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Refined {
    pub strategy: JointStrategyIrP,
    pub value: f64,
    pub accepted_steps: usize,
    pub evaluations: usize,
}

/// Coordinate ascent on the product of simplices: shift mass `delta` between
/// two actions of one block, keep the move if the objective improves.
pub fn refine<F>(
    space: &StrategySpace,
    start: &JointStrategyIrP,
    mut objective: F,
    schedule: RefineSchedule,
) -> Result<Refined>
where
    F: FnMut(&JointStrategyIrP) -> Result<f64>,
{
    let mut best = start.clone();
    let mut best_value = objective(&best)?;
    let mut evaluations = 1;
    let mut accepted_steps = 0;
    let mut delta = schedule.initial_radius;
    while delta >= schedule.min_radius {
        for _ in 0..schedule.max_rounds {
            let mut improved = false;
            for (b, block) in space.blocks.iter().enumerate() {
                let d = block.actions.len();
                for to in 0..d {
                    for from in 0..d {
                        if to == from {
                            continue;
                        }
                        let amount = delta.min(best.weights[b][from]);
                        if amount <= 0.0 {
                            continue;
                        }
                        let mut candidate = best.clone();
                        candidate.weights[b][from] -= amount;
                        candidate.weights[b][to] += amount;
                        let value = objective(&candidate)?;
                        evaluations += 1;
                        if value > best_value + schedule.min_gain {
                            best = candidate;
                            best_value = value;
                            accepted_steps += 1;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        delta /= 2.0;
    }
    Ok(Refined {
        strategy: best,
        value: best_value,
        accepted_steps,
        evaluations,
    })
}

/// One coalition option inside a merged move: the action's weight factors
/// and the move variants realising it (resolved adversarially).
#[derive(Clone, Debug)]
struct PlannedOption {
    factors: Vec<(usize, usize)>,
    variants: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
struct PlannedState {
    plain: Vec<usize>,
    groups: Vec<Vec<PlannedOption>>,
}

/// Precomputed grouping of coalition moves, reusable across strategies.
#[derive(Clone, Debug)]
pub struct InducePlan<'a> {
    mdp: &'a DigitalMdp,
    space: &'a StrategySpace,
    states: Vec<PlannedState>,
}

impl<'a> InducePlan<'a> {
    /// Groups each state's coalition moves by their lead coalition owner
    /// (first coalition participant in agent order) and by action.
    pub fn new(mdp: &'a DigitalMdp, space: &'a StrategySpace) -> Result<Self> {
        let mut states = Vec::with_capacity(mdp.num_states());
        for s in 0..mdp.num_states() {
            let mut planned = PlannedState::default();
            let mut group_of: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
            for id in mdp.move_range(s) {
                let (action, participants) = match &mdp.move_by_id(id).kind {
                    MoveKind::Act {
                        action,
                        participants,
                    } => (*action, participants),
                    _ => {
                        planned.plain.push(id);
                        continue;
                    }
                };
                let coalition: Vec<_> = participants
                    .iter()
                    .filter(|p| space.in_coalition(p.agent))
                    .collect();
                let Some(lead) = coalition.first().map(|p| p.agent) else {
                    planned.plain.push(id);
                    continue;
                };
                let action_name = &mdp.actions()[action];
                let mut factors = Vec::new();
                for p in &coalition {
                    let b = space.block_index(p.agent, p.location).ok_or_else(|| {
                        let info = &mdp.agents()[p.agent];
                        Error::MissingBlock {
                            agent: info.name.clone(),
                            location: info.locations[p.location].clone(),
                        }
                    })?;
                    let pos = space.blocks[b]
                        .actions
                        .iter()
                        .position(|a| a == action_name)
                        .ok_or_else(|| {
                            Error::InvalidStrategy(format!(
                                "action `{action_name}` enabled outside the protocol of {}",
                                space.blocks[b].label()
                            ))
                        })?;
                    factors.push((b, pos));
                }
                let g = match group_of.iter().position(|(l, _)| *l == lead) {
                    Some(g) => g,
                    None => {
                        group_of.push((lead, Vec::new()));
                        planned.groups.push(Vec::new());
                        group_of.len() - 1
                    }
                };
                match group_of[g].1.iter().position(|&(a, _)| a == action) {
                    Some(o) => planned.groups[g][o].variants.push(id),
                    None => {
                        group_of[g].1.push((action, 0));
                        planned.groups[g].push(PlannedOption {
                            factors,
                            variants: vec![id],
                        });
                    }
                }
            }
            states.push(planned);
        }
        Ok(InducePlan { mdp, space, states })
    }

    pub fn mdp(&self) -> &'a DigitalMdp {
        self.mdp
    }

    pub fn space(&self) -> &'a StrategySpace {
        self.space
    }

    /// Per state: plain move ids and, per merged group, per option the
    /// weight factors `(block, action position)` and variant move ids.
    #[allow(clippy::type_complexity)]
    pub fn structure(&self, s: StateId) -> (&[usize], Vec<Vec<(&[(usize, usize)], &[usize])>>) {
        let st = &self.states[s];
        let groups = st
            .groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|o| (o.factors.as_slice(), o.variants.as_slice()))
                    .collect()
            })
            .collect();
        (&st.plain, groups)
    }

    pub fn induce(&self, theta: &JointStrategyIrP) -> Result<InducedModel<'a>> {
        theta.check(self.space, 1e-9)?;
        let n = self.states.len();
        let mut m = InducedModel {
            mdp: self.mdp,
            choice_offsets: Vec::with_capacity(n + 1),
            option_offsets: Vec::new(),
            option_weights: Vec::new(),
            variant_offsets: Vec::new(),
            variants: Vec::new(),
        };
        m.choice_offsets.push(0);
        m.option_offsets.push(0);
        m.variant_offsets.push(0);
        let mut raw = Vec::new();
        for st in &self.states {
            for &id in &st.plain {
                m.option_weights.push(1.0);
                m.variants.push(id as u32);
                m.variant_offsets.push(m.variants.len() as u32);
                m.option_offsets.push(m.option_weights.len() as u32);
            }
            for group in &st.groups {
                raw.clear();
                raw.extend(group.iter().map(|o| {
                    o.factors
                        .iter()
                        .map(|&(b, pos)| theta.weights[b][pos])
                        .product::<f64>()
                }));
                let total: f64 = raw.iter().sum();
                let k = raw.len() as f64;
                for (o, &w) in group.iter().zip(&raw) {
                    let w = if total > 0.0 { w / total } else { 1.0 / k };
                    m.option_weights.push(w);
                    m.variants.extend(o.variants.iter().map(|&v| v as u32));
                    m.variant_offsets.push(m.variants.len() as u32);
                }
                m.option_offsets.push(m.option_weights.len() as u32);
            }
            m.choice_offsets.push((m.option_offsets.len() - 1) as u32);
        }
        Ok(m)
    }
}

/// The MDP left after the coalition commits to a strategy: coalition moves
/// are merged into weighted choices, everything else stays adversarial.
///
/// A choice is a list of options `(weight, variants)`; its value is
/// `Σ weight · opt_variant value(variant)` where `opt` is the adversary's.
#[derive(Clone, Debug)]
pub struct InducedModel<'a> {
    mdp: &'a DigitalMdp,
    choice_offsets: Vec<u32>,
    option_offsets: Vec<u32>,
    option_weights: Vec<f64>,
    variant_offsets: Vec<u32>,
    variants: Vec<u32>,
}

/// Convenience wrapper building a fresh plan.
pub fn induce<'a>(
    mdp: &'a DigitalMdp,
    space: &'a StrategySpace,
    theta: &JointStrategyIrP,
) -> Result<InducedModel<'a>> {
    InducePlan::new(mdp, space)?.induce(theta)
}

impl<'a> InducedModel<'a> {
    /// The MDP itself with every move left to the adversary.
    pub fn adversarial(mdp: &'a DigitalMdp) -> Self {
        let n = mdp.num_states();
        let mut choice_offsets = Vec::with_capacity(n + 1);
        choice_offsets.push(0);
        for s in 0..n {
            choice_offsets.push(mdp.move_range(s).end as u32);
        }
        let moves = mdp.num_moves();
        InducedModel {
            mdp,
            choice_offsets,
            option_offsets: (0..=moves as u32).collect(),
            option_weights: vec![1.0; moves],
            variant_offsets: (0..=moves as u32).collect(),
            variants: (0..moves as u32).collect(),
        }
    }

    pub fn mdp(&self) -> &'a DigitalMdp {
        self.mdp
    }

    pub fn num_states(&self) -> usize {
        self.choice_offsets.len() - 1
    }

    pub(crate) fn choice_range(&self, s: StateId) -> std::ops::Range<usize> {
        self.choice_offsets[s] as usize..self.choice_offsets[s + 1] as usize
    }

    pub(crate) fn option_range(&self, c: usize) -> std::ops::Range<usize> {
        self.option_offsets[c] as usize..self.option_offsets[c + 1] as usize
    }

    pub(crate) fn option_weight(&self, o: usize) -> f64 {
        self.option_weights[o]
    }

    pub(crate) fn option_variants(&self, o: usize) -> &[u32] {
        &self.variants[self.variant_offsets[o] as usize..self.variant_offsets[o + 1] as usize]
    }

    pub fn num_choices(&self, s: StateId) -> usize {
        self.choice_range(s).len()
    }

    /// Choices of a state as `(weight, variant move ids)` option lists.
    pub fn choices(&self, s: StateId) -> Vec<Vec<(f64, Vec<usize>)>> {
        self.choice_range(s)
            .map(|c| {
                self.option_range(c)
                    .map(|o| {
                        (
                            self.option_weight(o),
                            self.option_variants(o).iter().map(|&v| v as usize).collect(),
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// No adversarial choice left anywhere.
    pub fn is_fully_probabilistic(&self) -> bool {
        (0..self.num_states()).all(|s| {
            self.num_choices(s) == 1
                && self
                    .choice_range(s)
                    .flat_map(|c| self.option_range(c))
                    .all(|o| self.option_variants(o).len() == 1)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digital::{digitize, DEFAULT_STATE_CAP};
    use crate::lang::parse_model;

    fn two_action_model() -> (Network, DigitalMdp) {
        let text = "
            agent C { loc l { protocol a, b; on a goto { 1: -> x; } on b goto { 1: -> y; } } loc x { } loc y { } }";
        let net = parse_model(text).unwrap();
        let mdp = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        (net, mdp)
    }

    fn one_block(d: usize) -> StrategySpace {
        StrategySpace::from_blocks(
            vec![0],
            vec![Block {
                agent: 0,
                location: 0,
                agent_name: "C".into(),
                location_name: "l".into(),
                actions: (0..d).map(|i| format!("a{i}")).collect(),
            }],
        )
    }

    #[test]
    fn space_of_empty_coalition() {
        let (net, _) = two_action_model();
        let space = strategy_space(&net, &[]).unwrap();
        assert!(space.blocks().is_empty());
        assert_eq!(enumerate_irp(&space, 10).unwrap().count(), 1);
        assert!(strategy_space(&net, &["nobody".into()]).is_err());
    }

    #[test]
    fn irp_enumeration_is_lexicographic() {
        let mut space = one_block(2);
        assert_eq!(enumerate_irp(&space, 100).unwrap().count(), 2);
        let mut second = space.blocks[0].clone();
        second.location = 1;
        space = StrategySpace::from_blocks(vec![0], vec![space.blocks[0].clone(), second]);
        let all: Vec<Vec<usize>> = enumerate_irp(&space, 100).unwrap().map(|s| s.choice).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!(matches!(enumerate_irp(&space, 3), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn simplex_lattice() {
        let pts: Vec<Vec<f64>> = grid(&one_block(2), 2, 100).unwrap().map(|s| s.weights[0].clone()).collect();
        assert_eq!(pts, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
        assert_eq!(grid(&one_block(3), 1, 100).unwrap().count(), 3);
        assert_eq!(grid(&one_block(2), 10, 100).unwrap().count(), 11);
        assert_eq!(one_block(3).grid_count(10), 66);
    }

    #[test]
    fn point_distribution_prunes() {
        let (net, mdp) = two_action_model();
        let space = strategy_space(&net, &["C".into()]).unwrap();
        let theta = JointStrategyIrp { choice: vec![0] }.to_irp_distribution(&space);
        let induced = induce(&mdp, &space, &theta).unwrap();
        let choices = induced.choices(0);
        // tick (plain) and the merged coalition move
        assert_eq!(choices.len(), 2);
        let merged = &choices[1];
        assert_eq!(merged.iter().map(|o| o.0).collect::<Vec<_>>(), vec![1.0, 0.0]);
    }

    #[test]
    fn blocked_action_mass_is_renormalised() {
        let text = "
            agent C { loc l { protocol g1, g2; on g1 goto { 1: -> l; } on g2 goto { 1: -> l; } } }
            agent T { loc l { protocol g1; on g1 goto { 1: -> l; } } loc m { protocol g2; on g2 goto { 1: -> l; } } }";
        let net = parse_model(text).unwrap();
        let mdp = digitize(&net, 100).unwrap();
        let space = strategy_space(&net, &["C".into()]).unwrap();
        let half = JointStrategyIrP { weights: vec![vec![0.5, 0.5]] };
        let induced = induce(&mdp, &space, &half).unwrap();
        let merged = induced.choices(0).pop().unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].0, 1.0);

        // zero mass on the enabled subset falls back to uniform
        let blocked = JointStrategyIrP { weights: vec![vec![0.0, 1.0]] };
        let merged = induce(&mdp, &space, &blocked).unwrap().choices(0).pop().unwrap();
        assert_eq!(merged[0].0, 1.0);
    }

    #[test]
    fn empty_coalition_leaves_mdp_unchanged() {
        let (_, mdp) = two_action_model();
        let space = StrategySpace::empty();
        let induced = induce(&mdp, &space, &JointStrategyIrP { weights: vec![] }).unwrap();
        for s in 0..mdp.num_states() {
            assert_eq!(induced.num_choices(s), mdp.moves(s).len());
        }
    }

    #[test]
    fn strategy_text_round_trip() {
        let space = one_block(3);
        let s = JointStrategyIrP { weights: vec![vec![0.25, 0.7, 0.05]] };
        let text = s.to_text(&space);
        assert_eq!(text, "C.l: a0=0.25, a1=0.7, a2=0.05\n");
        assert_eq!(JointStrategyIrP::from_text(&space, &text).unwrap(), s);
        assert!(JointStrategyIrP::from_text(&space, "C.l: a0=0.5").is_err());
        assert!(matches!(
            JointStrategyIrP::from_text(&space, "# nothing"),
            Err(Error::MissingBlock { .. })
        ));
        let rational = JointStrategyIrP::from_text(&space, "C.l: a0=1/2, a2=1/2").unwrap();
        assert_eq!(rational.weights[0], vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn refine_constant_objective_keeps_start() {
        let space = one_block(2);
        let start = JointStrategyIrP { weights: vec![vec![0.3, 0.7]] };
        let r = refine(&space, &start, |_| Ok(1.0), RefineSchedule::for_resolution(10)).unwrap();
        assert_eq!(r.strategy, start);
        assert_eq!(r.accepted_steps, 0);
    }

    #[test]
    fn refine_climbs_monotone_edge() {
        let space = one_block(2);
        let start = JointStrategyIrP { weights: vec![vec![0.5, 0.5]] };
        let r = refine(&space, &start, |t| Ok(t.weights[0][0]), RefineSchedule::for_resolution(10)).unwrap();
        assert!((r.strategy.weights[0][0] - 1.0).abs() < 1e-4);
        assert!(r.value >= 0.5);
    }
}
