//! Asynchronous product of a network and its digital-clocks MDP.
//!
//! Clocks take integer values capped at `max_constant + 1`. A state either
//! lets one time unit pass (`Tick`, allowed only when every current location
//! invariant still holds afterwards) or fires a joint action: a private edge
//! of one agent, or one edge per owner of a shared action. Elapsed time along
//! a path is the number of ticks taken.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write;
use std::ops::Range;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{to_f64, Comparator, Network, Prob};

pub type StateId = usize;

/// Default bound on the number of reachable digital states.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Atom {
    clock: usize,
    cmp: Comparator,
    constant: u32,
}

fn holds(atoms: &[Atom], valuation: &[u32]) -> bool {
    atoms.iter().all(|a| a.cmp.test(valuation[a.clock], a.constant))
}

#[derive(Clone, Debug)]
struct CompiledBranch {
    probability: Prob,
    resets: Vec<usize>,
    target: usize,
}

#[derive(Clone, Debug)]
struct CompiledEdge {
    action: usize,
    guard: Vec<Atom>,
    branches: Vec<CompiledBranch>,
}

#[derive(Clone, Debug)]
struct CompiledLocation {
    invariant: Vec<Atom>,
    protocol: Vec<usize>,
    edges: Vec<CompiledEdge>,
    labels: Vec<usize>,
}

/// Agent and location names carried by a digital MDP for reporting and for
/// mapping strategies onto moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentInfo {
    pub name: String,
    pub locations: Vec<String>,
}

/// One participant of a joint action: the coalition-visible
/// `(agent, local location, action)` triple plus the edge used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Participant {
    pub agent: usize,
    pub location: usize,
    pub edge: usize,
}

/// A joint action of the product at some global location.
#[derive(Clone, Debug)]
pub struct JointAction {
    pub action: usize,
    pub participants: Vec<Participant>,
}

/// Symbolic product: compiled agents plus the joint-action table.
#[derive(Clone, Debug)]
pub struct Product {
    agents: Vec<AgentInfo>,
    clocks: Vec<String>,
    caps: Vec<u32>,
    actions: Vec<String>,
    propositions: Vec<String>,
    /// Owners of each action, ascending agent order.
    owners: Vec<Vec<usize>>,
    locations: Vec<Vec<CompiledLocation>>,
    initial: Vec<usize>,
}

/// Compiles a valid network into its product description.
pub fn build_product(network: &Network) -> Product {
    let mut clocks = Vec::new();
    let mut clock_index = HashMap::new();
    for agent in &network.agents {
        for c in &agent.clocks {
            clock_index.insert(c.clone(), clocks.len());
            clocks.push(c.clone());
        }
    }
    let maxima = network.max_constants();
    let caps = clocks.iter().map(|c| maxima[c] + 1).collect();

    let mut actions: Vec<String> = Vec::new();
    let mut action_index: HashMap<String, usize> = HashMap::new();
    let mut intern = |a: &str| -> usize {
        if let Some(&i) = action_index.get(a) {
            return i;
        }
        action_index.insert(a.to_string(), actions.len());
        actions.push(a.to_string());
        actions.len() - 1
    };
    let propositions: Vec<String> = network.propositions().into_iter().collect();
    let prop_index: HashMap<&str, usize> = propositions
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();

    let compile = |atoms: &[crate::model::ClockAtom]| -> Vec<Atom> {
        atoms
            .iter()
            .map(|a| Atom {
                clock: clock_index[&a.clock],
                cmp: a.cmp,
                constant: a.constant,
            })
            .collect()
    };

    let mut locations = Vec::new();
    let mut infos = Vec::new();
    let mut initial = Vec::new();
    for agent in &network.agents {
        let mut locs = Vec::new();
        for loc in &agent.locations {
            let edges = loc
                .edges
                .iter()
                .map(|e| CompiledEdge {
                    action: intern(&e.action),
                    guard: compile(&e.guard.atoms),
                    branches: e
                        .branches
                        .iter()
                        .map(|b| CompiledBranch {
                            probability: b.probability.clone(),
                            resets: b.resets.iter().map(|r| clock_index[r]).collect(),
                            target: agent.location_index(&b.target).expect("validated target"),
                        })
                        .collect(),
                })
                .collect();
            locs.push(CompiledLocation {
                invariant: compile(&loc.invariant.atoms),
                protocol: loc.protocol.iter().map(|a| intern(a)).collect(),
                edges,
                labels: loc.labels.iter().map(|l| prop_index[l.as_str()]).collect(),
            });
        }
        locations.push(locs);
        infos.push(AgentInfo {
            name: agent.name.clone(),
            locations: agent.locations.iter().map(|l| l.name.clone()).collect(),
        });
        initial.push(agent.initial_index().expect("validated initial location"));
    }

    let mut owners = vec![Vec::new(); actions.len()];
    for (i, locs) in locations.iter().enumerate() {
        for loc in locs {
            for &a in loc.protocol.iter().chain(loc.edges.iter().map(|e| &e.action)) {
                if owners[a].last() != Some(&i) {
                    owners[a].push(i);
                }
            }
        }
    }

    Product {
        agents: infos,
        clocks,
        caps,
        actions,
        propositions,
        owners,
        locations,
        initial,
    }
}

impl Product {
    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    /// Joint actions enabled by the protocols at a global location, ignoring
    /// clocks. Ordered by lead owner, then that owner's protocol order, then
    /// edge-index combinations.
    pub fn joint_actions(&self, global: &[usize]) -> Vec<JointAction> {
        let mut out = Vec::new();
        for (agent, &loc) in global.iter().enumerate() {
            for &action in &self.locations[agent][loc].protocol {
                let owners = &self.owners[action];
                if owners[0] != agent {
                    continue;
                }
                let in_protocol = owners
                    .iter()
                    .all(|&o| self.locations[o][global[o]].protocol.contains(&action));
                if !in_protocol {
                    continue;
                }
                let choices: Vec<Vec<Participant>> = owners
                    .iter()
                    .map(|&o| {
                        self.locations[o][global[o]]
                            .edges
                            .iter()
                            .enumerate()
                            .filter(|(_, e)| e.action == action)
                            .map(|(edge, _)| Participant {
                                agent: o,
                                location: global[o],
                                edge,
                            })
                            .collect()
                    })
                    .collect();
                for participants in cartesian(&choices) {
                    out.push(JointAction {
                        action,
                        participants,
                    });
                }
            }
        }
        out
    }

    fn edge(&self, p: &Participant) -> &CompiledEdge {
        &self.locations[p.agent][p.location].edges[p.edge]
    }

    fn invariants_hold(&self, global: &[usize], valuation: &[u32]) -> bool {
        global
            .iter()
            .enumerate()
            .all(|(a, &l)| holds(&self.locations[a][l].invariant, valuation))
    }
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for o in options {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// A digital state: one location per agent and an integer clock valuation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitalState {
    pub locations: Vec<usize>,
    pub valuation: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Tick,
    Act {
        action: usize,
        participants: Vec<Participant>,
    },
    /// Implicit self-loop added at deadlocks.
    Stall,
}

#[derive(Clone, Debug)]
pub struct Move {
    pub kind: MoveKind,
    transitions: Range<usize>,
}

impl Move {
    pub fn is_tick(&self) -> bool {
        matches!(self.kind, MoveKind::Tick)
    }
}

/// Raw material for [`DigitalMdp::from_parts`], used to build synthetic
/// models directly.
#[derive(Clone, Debug, Default)]
pub struct MdpParts {
    pub agents: Vec<AgentInfo>,
    pub actions: Vec<String>,
    pub propositions: Vec<String>,
    pub states: Vec<DigitalState>,
    pub labels: Vec<Vec<usize>>,
    /// Per state: moves as `(kind, [(probability, target)])`.
    pub moves: Vec<Vec<(MoveKind, Vec<(Prob, StateId)>)>>,
}

/// Finite MDP over digital states. State 0 is the initial state; states are
/// numbered in breadth-first discovery order.
#[derive(Clone, Debug)]
pub struct DigitalMdp {
    agents: Vec<AgentInfo>,
    clocks: Vec<String>,
    actions: Vec<String>,
    propositions: Vec<String>,
    states: Vec<DigitalState>,
    labels: Vec<Vec<usize>>,
    move_offsets: Vec<usize>,
    moves: Vec<Move>,
    targets: Vec<StateId>,
    probs: Vec<f64>,
    exact: Vec<Prob>,
    stalls: Vec<StateId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReachableStats {
    pub states: usize,
    pub moves: usize,
    pub ticks: usize,
}

/// Builds the reachable digital-clocks MDP of a valid network.
pub fn digitize(network: &Network, state_cap: usize) -> Result<DigitalMdp> {
    let product = build_product(network);
    let initial = DigitalState {
        locations: product.initial.clone(),
        valuation: vec![0; product.clocks.len()],
    };
    let mut index: HashMap<DigitalState, StateId> = HashMap::new();
    let mut states = vec![initial.clone()];
    index.insert(initial, 0);
    let mut queue = VecDeque::from([0usize]);

    let mut move_lists: Vec<Vec<(MoveKind, Vec<(Prob, StateId)>)>> = Vec::new();
    let mut intern = |s: DigitalState,
                      states: &mut Vec<DigitalState>,
                      queue: &mut VecDeque<StateId>|
     -> Result<StateId> {
        if let Some(&id) = index.get(&s) {
            return Ok(id);
        }
        if states.len() >= state_cap {
            return Err(Error::StateCap { cap: state_cap });
        }
        let id = states.len();
        index.insert(s.clone(), id);
        states.push(s);
        queue.push_back(id);
        Ok(id)
    };

    while let Some(id) = queue.pop_front() {
        let state = states[id].clone();
        let mut moves = Vec::new();

        let ticked: Vec<u32> = state
            .valuation
            .iter()
            .zip(&product.caps)
            .map(|(&v, &cap)| (v + 1).min(cap))
            .collect();
        if product.invariants_hold(&state.locations, &ticked) {
            let next = DigitalState {
                locations: state.locations.clone(),
                valuation: ticked,
            };
            let target = intern(next, &mut states, &mut queue)?;
            moves.push((MoveKind::Tick, vec![(Prob::one(), target)]));
        }

        'joint: for joint in product.joint_actions(&state.locations) {
            let edges: Vec<&CompiledEdge> =
                joint.participants.iter().map(|p| product.edge(p)).collect();
            if !edges.iter().all(|e| holds(&e.guard, &state.valuation)) {
                continue;
            }
            let branch_sets: Vec<Vec<&CompiledBranch>> =
                edges.iter().map(|e| e.branches.iter().collect()).collect();
            let mut outcomes: BTreeMap<StateId, Prob> = BTreeMap::new();
            let mut successors = Vec::new();
            for combo in cartesian(&branch_sets) {
                let mut locations = state.locations.clone();
                let mut valuation = state.valuation.clone();
                let mut probability = Prob::one();
                for (p, b) in joint.participants.iter().zip(&combo) {
                    locations[p.agent] = b.target;
                    for &c in &b.resets {
                        valuation[c] = 0;
                    }
                    probability *= &b.probability;
                }
                if !product.invariants_hold(&locations, &valuation) {
                    continue 'joint;
                }
                successors.push((
                    DigitalState {
                        locations,
                        valuation,
                    },
                    probability,
                ));
            }
            let mut order = Vec::new();
            for (succ, p) in successors {
                let target = intern(succ, &mut states, &mut queue)?;
                if !outcomes.contains_key(&target) {
                    order.push(target);
                }
                *outcomes.entry(target).or_insert_with(Prob::zero) += p;
            }
            let transitions = order
                .into_iter()
                .map(|t| (outcomes.remove(&t).expect("recorded"), t))
                .collect();
            moves.push((
                MoveKind::Act {
                    action: joint.action,
                    participants: joint.participants,
                },
                transitions,
            ));
        }

        if moves.is_empty() {
            moves.push((MoveKind::Stall, vec![(Prob::one(), id)]));
        }
        if move_lists.len() <= id {
            move_lists.resize(id + 1, Vec::new());
        }
        move_lists[id] = moves;
    }

    let labels = states
        .iter()
        .map(|s| {
            let mut l: Vec<usize> = s
                .locations
                .iter()
                .enumerate()
                .flat_map(|(a, &loc)| product.locations[a][loc].labels.iter().copied())
                .collect();
            l.sort_unstable();
            l.dedup();
            l
        })
        .collect();

    let parts = MdpParts {
        agents: product.agents,
        actions: product.actions,
        propositions: product.propositions,
        states,
        labels,
        moves: move_lists,
    };
    let mut mdp = DigitalMdp::from_parts(parts)?;
    mdp.clocks = product.clocks;
    Ok(mdp)
}

impl DigitalMdp {
    /// Assembles an MDP from explicit parts, checking that every move is a
    /// distribution over existing states.
    pub fn from_parts(parts: MdpParts) -> Result<Self> {
        let n = parts.states.len();
        let bad = |m: String| Err(Error::InvalidModel(crate::error::Diagnostics(vec![
            crate::model::Diagnostic {
                severity: crate::model::Severity::Error,
                subject: "digital mdp".into(),
                message: m,
            },
        ])));
        if n == 0 || parts.moves.len() != n || parts.labels.len() != n {
            return bad(format!(
                "{} states, {} move lists, {} label sets",
                n,
                parts.moves.len(),
                parts.labels.len()
            ));
        }
        let mut move_offsets = vec![0];
        let mut moves = Vec::new();
        let (mut targets, mut probs, mut exact) = (Vec::new(), Vec::new(), Vec::new());
        let mut stalls = Vec::new();
        for (s, list) in parts.moves.into_iter().enumerate() {
            if list.is_empty() {
                return bad(format!("state {s} has no moves"));
            }
            for (kind, transitions) in list {
                let total: Prob = transitions.iter().map(|(p, _)| p.clone()).sum();
                if !total.is_one() {
                    return bad(format!("state {s}: move probabilities sum to {total}"));
                }
                if kind == MoveKind::Stall {
                    stalls.push(s);
                }
                let start = targets.len();
                for (p, t) in transitions {
                    if t >= n {
                        return bad(format!("state {s}: target {t} out of range"));
                    }
                    targets.push(t);
                    probs.push(to_f64(&p));
                    exact.push(p);
                }
                moves.push(Move {
                    kind,
                    transitions: start..targets.len(),
                });
            }
            move_offsets.push(moves.len());
        }
        Ok(DigitalMdp {
            agents: parts.agents,
            clocks: Vec::new(),
            actions: parts.actions,
            propositions: parts.propositions,
            states: parts.states,
            labels: parts.labels,
            move_offsets,
            moves,
            targets,
            probs,
            exact,
            stalls,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn state(&self, id: StateId) -> &DigitalState {
        &self.states[id]
    }

    pub fn agents(&self) -> &[AgentInfo] {
        &self.agents
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    pub fn proposition_index(&self, name: &str) -> Option<usize> {
        self.propositions.iter().position(|p| p == name)
    }

    pub fn labels(&self, s: StateId) -> &[usize] {
        &self.labels[s]
    }

    /// Moves of state `s`; global move ids are `move_range(s)`.
    pub fn moves(&self, s: StateId) -> &[Move] {
        &self.moves[self.move_offsets[s]..self.move_offsets[s + 1]]
    }

    pub fn move_range(&self, s: StateId) -> Range<usize> {
        self.move_offsets[s]..self.move_offsets[s + 1]
    }

    pub fn move_by_id(&self, id: usize) -> &Move {
        &self.moves[id]
    }

    pub fn num_moves(&self) -> usize {
        self.moves.len()
    }

    /// `(target, probability)` pairs of a move.
    pub fn transitions<'a>(&'a self, m: &Move) -> impl Iterator<Item = (StateId, f64)> + 'a {
        let r = m.transitions.clone();
        self.targets[r.clone()].iter().copied().zip(self.probs[r].iter().copied())
    }

    pub fn exact_transitions<'a>(&'a self, m: &Move) -> impl Iterator<Item = (StateId, &'a Prob)> + 'a {
        let r = m.transitions.clone();
        self.targets[r.clone()].iter().copied().zip(self.exact[r].iter())
    }

    /// Raw transition slices of a move, for tight loops.
    pub(crate) fn transition_slices(&self, m: &Move) -> (&[StateId], &[f64]) {
        (&self.targets[m.transitions.clone()], &self.probs[m.transitions.clone()])
    }

    /// States that received an implicit stall self-loop.
    pub fn stall_states(&self) -> &[StateId] {
        &self.stalls
    }

    pub fn stats(&self) -> ReachableStats {
        ReachableStats {
            states: self.states.len(),
            moves: self.moves.len(),
            ticks: self.moves.iter().filter(|m| m.is_tick()).count(),
        }
    }

    fn location_vector(&self, s: &DigitalState) -> String {
        let names: Vec<&str> = s
            .locations
            .iter()
            .enumerate()
            .map(|(a, &l)| {
                self.agents
                    .get(a)
                    .and_then(|info| info.locations.get(l))
                    .map(String::as_str)
                    .unwrap_or("?")
            })
            .collect();
        format!("({})", names.join(","))
    }

    /// Deterministic text dump: `state id loc-vector valuation labels` lines
    /// followed by `move src kind action probs targets` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, s) in self.states.iter().enumerate() {
            let valuation: Vec<String> = s
                .valuation
                .iter()
                .enumerate()
                .map(|(c, v)| match self.clocks.get(c) {
                    Some(name) => format!("{name}={v}"),
                    None => v.to_string(),
                })
                .collect();
            let labels: Vec<&str> = self.labels[id]
                .iter()
                .map(|&p| self.propositions[p].as_str())
                .collect();
            writeln!(
                out,
                "state {id} {} [{}] {{{}}}",
                self.location_vector(s),
                valuation.join(","),
                labels.join(",")
            )
            .unwrap();
        }
        for s in 0..self.states.len() {
            for m in self.moves(s) {
                let (kind, action) = match &m.kind {
                    MoveKind::Tick => ("tick", "-"),
                    MoveKind::Act { action, .. } => ("act", self.actions[*action].as_str()),
                    MoveKind::Stall => ("stall", "-"),
                };
                let (probs, targets): (Vec<String>, Vec<String>) = self
                    .exact_transitions(m)
                    .map(|(t, p)| (p.to_string(), t.to_string()))
                    .unzip();
                writeln!(
                    out,
                    "move {s} {kind} {action} {} {}",
                    probs.join(","),
                    targets.join(",")
                )
                .unwrap();
            }
        }
        out
    }
}
