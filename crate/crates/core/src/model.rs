//! Networks of probabilistic timed automata: one automaton per agent,
//! interleaving private actions and synchronising on shared ones.
//!
//! Model data is exact. Probabilities are [`BigRational`], clock constants
//! are natural numbers, and only closed, diagonal-free clock constraints are
//! accepted by validation so that the digital-clocks construction applies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact probability used in model data.
pub type Prob = BigRational;

/// Comparison operator of a clock atom. Strict variants are representable so
/// that they can be reported, but a valid network never contains them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Le,
    Ge,
    Eq,
    Lt,
    Gt,
}

impl Comparator {
    pub fn is_strict(self) -> bool {
        matches!(self, Comparator::Lt | Comparator::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
            Comparator::Lt => "<",
            Comparator::Gt => ">",
        }
    }

    pub fn test(self, value: u32, constant: u32) -> bool {
        match self {
            Comparator::Le => value <= constant,
            Comparator::Ge => value >= constant,
            Comparator::Eq => value == constant,
            Comparator::Lt => value < constant,
            Comparator::Gt => value > constant,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClockAtom {
    pub clock: String,
    pub cmp: Comparator,
    pub constant: u32,
}

impl ClockAtom {
    pub fn new(clock: impl Into<String>, cmp: Comparator, constant: u32) -> Self {
        ClockAtom {
            clock: clock.into(),
            cmp,
            constant,
        }
    }
}

impl fmt::Display for ClockAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.clock, self.cmp.symbol(), self.constant)
    }
}

/// Conjunction of clock atoms. The empty conjunction is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ClockConstraint {
    pub atoms: Vec<ClockAtom>,
}

impl ClockConstraint {
    pub fn truth() -> Self {
        ClockConstraint::default()
    }

    pub fn new(atoms: Vec<ClockAtom>) -> Self {
        ClockConstraint { atoms }
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Evaluates the constraint, looking clock values up through `value`.
    pub fn holds(&self, mut value: impl FnMut(&str) -> u32) -> bool {
        self.atoms
            .iter()
            .all(|a| a.cmp.test(value(&a.clock), a.constant))
    }

    /// Per-clock feasible interval `[lo, hi]` (`hi = None` for unbounded).
    /// Returns `None` when some clock has an empty interval.
    fn bounds(&self) -> Option<BTreeMap<&str, (u32, Option<u32>)>> {
        let mut out: BTreeMap<&str, (u32, Option<u32>)> = BTreeMap::new();
        for atom in &self.atoms {
            let entry = out.entry(atom.clock.as_str()).or_insert((0, None));
            let (lo, hi) = match atom.cmp {
                Comparator::Le => (0, Some(atom.constant)),
                Comparator::Lt => (0, atom.constant.checked_sub(1)),
                Comparator::Ge => (atom.constant, None),
                Comparator::Gt => (atom.constant.saturating_add(1), None),
                Comparator::Eq => (atom.constant, Some(atom.constant)),
            };
            if atom.cmp == Comparator::Lt && atom.constant == 0 {
                return None;
            }
            entry.0 = entry.0.max(lo);
            entry.1 = match (entry.1, hi) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, None) => a,
                (None, b) => b,
            };
            if let Some(h) = entry.1 {
                if entry.0 > h {
                    return None;
                }
            }
        }
        Some(out)
    }

    /// `true` when some integer valuation satisfies both constraints.
    pub fn jointly_satisfiable(&self, other: &ClockConstraint) -> bool {
        let mut all = self.atoms.clone();
        all.extend(other.atoms.iter().cloned());
        ClockConstraint::new(all).bounds().is_some()
    }
}

impl fmt::Display for ClockConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

/// One probabilistic outcome of an edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub probability: Prob,
    pub resets: Vec<String>,
    pub target: String,
}

/// An edge leaving the location that owns it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub action: String,
    pub guard: ClockConstraint,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: ClockConstraint,
    pub labels: Vec<String>,
    /// Actions available to the agent here, in declaration order.
    pub protocol: Vec<String>,
    pub edges: Vec<Edge>,
}

impl Location {
    pub fn new(name: impl Into<String>) -> Self {
        Location {
            name: name.into(),
            invariant: ClockConstraint::truth(),
            labels: Vec::new(),
            protocol: Vec::new(),
            edges: Vec::new(),
        }
    }
}

/// A probabilistic timed automaton with a protocol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    pub clocks: Vec<String>,
    pub initial: String,
    pub locations: Vec<Location>,
}

impl Agent {
    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn initial_index(&self) -> Option<usize> {
        self.location_index(&self.initial)
    }

    /// Every action mentioned by a protocol or an edge of this agent.
    pub fn alphabet(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for loc in &self.locations {
            out.extend(loc.protocol.iter().map(String::as_str));
            out.extend(loc.edges.iter().map(|e| e.action.as_str()));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

/// A single validation finding. `subject` names the offending element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    fn error(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            subject: subject.into(),
            message: message.into(),
        }
    }

    fn warning(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.subject, self.message)
    }
}

pub const RESERVED_PROPOSITIONS: [&str; 2] = ["true", "false"];

/// Checks the per-agent well-formedness conditions.
///
/// Errors make the agent unusable. Warnings flag protocol actions that can
/// never fire because their guards are unsatisfiable.
pub fn validate_agent(agent: &Agent) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let who = format!("agent `{}`", agent.name);
    let clocks: BTreeSet<&str> = agent.clocks.iter().map(String::as_str).collect();

    let mut seen = BTreeSet::new();
    for c in &agent.clocks {
        if !seen.insert(c.as_str()) {
            out.push(Diagnostic::error(&who, format!("clock `{c}` declared twice")));
        }
    }
    let mut seen = BTreeSet::new();
    for loc in &agent.locations {
        if !seen.insert(loc.name.as_str()) {
            out.push(Diagnostic::error(
                &who,
                format!("location `{}` declared twice", loc.name),
            ));
        }
    }
    if agent.location_index(&agent.initial).is_none() {
        out.push(Diagnostic::error(
            &who,
            format!("initial location `{}` is not declared", agent.initial),
        ));
    }

    let check_constraint = |out: &mut Vec<Diagnostic>, subject: &str, cc: &ClockConstraint| {
        for atom in &cc.atoms {
            if atom.cmp.is_strict() {
                out.push(Diagnostic::error(
                    subject,
                    format!("`{atom}`: strict comparator violates digital-clocks restriction"),
                ));
            }
            if !clocks.contains(atom.clock.as_str()) {
                out.push(Diagnostic::error(
                    subject,
                    format!("`{atom}` references clock `{}` not owned by this agent", atom.clock),
                ));
            }
        }
    };

    for loc in &agent.locations {
        let at = format!("{who}, location `{}`", loc.name);
        check_constraint(&mut out, &at, &loc.invariant);
        for label in &loc.labels {
            if RESERVED_PROPOSITIONS.contains(&label.as_str()) {
                out.push(Diagnostic::error(
                    &at,
                    format!("`{label}` is a built-in proposition and cannot be a label"),
                ));
            }
        }
        let mut protocol_seen = BTreeSet::new();
        for action in &loc.protocol {
            if !protocol_seen.insert(action.as_str()) {
                out.push(Diagnostic::error(
                    &at,
                    format!("action `{action}` listed twice in protocol"),
                ));
            }
            let edges: Vec<&Edge> = loc.edges.iter().filter(|e| &e.action == action).collect();
            if edges.is_empty() {
                out.push(Diagnostic::error(
                    &at,
                    format!("protocol action `{action}` labels no edge"),
                ));
            } else if edges
                .iter()
                .all(|e| !e.guard.jointly_satisfiable(&loc.invariant))
            {
                out.push(Diagnostic::warning(
                    &at,
                    format!("protocol action `{action}` has no satisfiable guard and is never enabled"),
                ));
            }
        }
        for edge in &loc.edges {
            let on = format!("{at}, edge `{}`", edge.action);
            if !loc.protocol.contains(&edge.action) {
                out.push(Diagnostic::error(
                    &on,
                    format!("action `{}` is not in the protocol of `{}`", edge.action, loc.name),
                ));
            }
            check_constraint(&mut out, &on, &edge.guard);
            if edge.branches.is_empty() {
                out.push(Diagnostic::error(&on, "edge has no branches"));
            }
            let mut total = Prob::zero();
            for branch in &edge.branches {
                if !branch.probability.is_positive() || branch.probability > Prob::one() {
                    out.push(Diagnostic::error(
                        &on,
                        format!("branch probability {} outside (0, 1]", branch.probability),
                    ));
                }
                total += &branch.probability;
                for r in &branch.resets {
                    if !clocks.contains(r.as_str()) {
                        out.push(Diagnostic::error(
                            &on,
                            format!("reset of clock `{r}` not owned by this agent"),
                        ));
                    }
                }
                if agent.location_index(&branch.target).is_none() {
                    out.push(Diagnostic::error(
                        &on,
                        format!("target location `{}` is not declared", branch.target),
                    ));
                }
            }
            if !edge.branches.is_empty() && !total.is_one() {
                out.push(Diagnostic::error(
                    &on,
                    format!("branch probabilities sum to {total} ≠ 1"),
                ));
            }
        }
    }
    out
}

/// A PCAMAS: agents composed by interleaving and shared-action
/// synchronisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    pub agents: Vec<Agent>,
}

impl Network {
    pub fn new(agents: Vec<Agent>) -> Self {
        Network { agents }
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }

    /// Indices of the agents whose alphabet contains `action`, in agent order.
    pub fn owners(&self, action: &str) -> Vec<usize> {
        self.agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.alphabet().contains(action))
            .map(|(i, _)| i)
            .collect()
    }

    /// Actions owned by two or more agents, mapped to their owners' names.
    pub fn shared_actions(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut owners: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for agent in &self.agents {
            for action in agent.alphabet() {
                owners
                    .entry(action.to_string())
                    .or_default()
                    .insert(agent.name.clone());
            }
        }
        owners.retain(|_, o| o.len() >= 2);
        owners
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        self.agents
            .iter()
            .flat_map(|a| a.locations.iter())
            .flat_map(|l| l.labels.iter().cloned())
            .collect()
    }

    /// All agent-level and network-level diagnostics, agents first.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> = self.agents.iter().flat_map(validate_agent).collect();
        out.extend(validate_network(self));
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().iter().all(|d| !d.is_error())
    }

    /// Largest constant each clock is compared against (0 if never).
    pub fn max_constants(&self) -> BTreeMap<String, u32> {
        let mut out = BTreeMap::new();
        for agent in &self.agents {
            for c in &agent.clocks {
                out.insert(c.clone(), 0u32);
            }
            for loc in &agent.locations {
                let guards = loc.edges.iter().map(|e| &e.guard);
                for cc in std::iter::once(&loc.invariant).chain(guards) {
                    for atom in &cc.atoms {
                        let e = out.entry(atom.clock.clone()).or_insert(0);
                        *e = (*e).max(atom.constant);
                    }
                }
            }
        }
        out
    }
}

/// Network-level invariants: unique agent names, disjoint clocks, single
/// ownership of propositions and consistent shared actions.
pub fn validate_network(network: &Network) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if network.agents.is_empty() {
        out.push(Diagnostic::error("network", "network has no agents"));
    }
    let mut names = BTreeSet::new();
    for a in &network.agents {
        if !names.insert(a.name.as_str()) {
            out.push(Diagnostic::error(
                "network",
                format!("agent name `{}` used twice", a.name),
            ));
        }
    }
    let mut clock_owner: BTreeMap<&str, &str> = BTreeMap::new();
    for a in &network.agents {
        for c in &a.clocks {
            if let Some(prev) = clock_owner.insert(c.as_str(), a.name.as_str()) {
                if prev != a.name {
                    out.push(Diagnostic::error(
                        "network",
                        format!("clock name collision: `{c}` declared by `{prev}` and `{}`", a.name),
                    ));
                }
            }
        }
    }
    let mut prop_owner: BTreeMap<&str, &str> = BTreeMap::new();
    for a in &network.agents {
        for l in &a.locations {
            for p in &l.labels {
                if let Some(prev) = prop_owner.insert(p.as_str(), a.name.as_str()) {
                    if prev != a.name {
                        out.push(Diagnostic::error(
                            "network",
                            format!("proposition `{p}` owned by both `{prev}` and `{}`", a.name),
                        ));
                    }
                }
            }
        }
    }
    for (action, owners) in network.shared_actions() {
        for owner in owners {
            let agent = &network.agents[network.agent_index(&owner).expect("owner exists")];
            if !agent.locations.iter().any(|l| l.protocol.contains(&action)) {
                out.push(Diagnostic::error(
                    "network",
                    format!("shared action `{action}` is in no protocol of owner `{owner}`"),
                ));
            }
        }
    }
    out
}

/// Closed time interval with natural bounds; `upper = None` is `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeInterval {
    pub lower: u32,
    pub upper: Option<u32>,
}

impl TimeInterval {
    pub fn new(lower: u32, upper: Option<u32>) -> Option<Self> {
        match upper {
            Some(u) if u < lower => None,
            _ => Some(TimeInterval { lower, upper }),
        }
    }

    pub fn bounded(lower: u32, upper: u32) -> Self {
        TimeInterval::new(lower, Some(upper)).expect("lower <= upper")
    }

    pub fn contains(&self, t: u32) -> bool {
        t >= self.lower && self.upper.is_none_or(|u| t <= u)
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Some(u) => write!(f, "[{},{}]", self.lower, u),
            None => write!(f, "[{},inf]", self.lower),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Lt,
    Le,
    Ge,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    /// Lower-bound relations are decided on the minimum outcome probability.
    pub fn is_lower_bound(self) -> bool {
        matches!(self, Relation::Ge | Relation::Gt)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProbBound {
    pub relation: Relation,
    pub threshold: Prob,
}

impl ProbBound {
    pub fn new(relation: Relation, threshold: Prob) -> Self {
        ProbBound {
            relation,
            threshold,
        }
    }

    pub fn threshold_f64(&self) -> f64 {
        to_f64(&self.threshold)
    }
}

impl fmt::Display for ProbBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.relation.symbol(), self.threshold)
    }
}

pub fn to_f64(p: &Prob) -> f64 {
    use num_traits::ToPrimitive;
    p.to_f64().unwrap_or(f64::NAN)
}

/// Parses `1`, `0.25`, `.5` or `3/8` into an exact non-negative rational.
pub fn parse_probability(text: &str) -> Option<Prob> {
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() || n.is_negative() || d.is_negative() {
            return None;
        }
        return Some(Prob::new(n, d));
    }
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if (int.is_empty() && frac.is_empty())
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(Prob::new(numer, denom))
}
