use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde_json::json;

use super::until::{Mode, UntilPlan, ViConfig};
use crate::digital::{DigitalMdp, StateId};
use crate::error::{Error, Result};
use crate::lang::{Formula, Gamma};
use crate::model::{Network, ProbBound, Relation, TimeInterval};
use crate::par::{self, Parallelism};
use crate::strategy::{
    enumerate_irp, grid, refine, strategy_space, InducePlan, InducedModel, JointStrategyIrP,
    RefineSchedule,
};

/// Comparison tolerance for probability thresholds.
pub const EPSILON: f64 = 1e-9;

const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum StrategyMode {
    /// Deterministic strategies, enumerated exhaustively.
    Irp,
    /// Probabilistic strategies, searched on a grid.
    #[default]
    IrP,
}

impl fmt::Display for StrategyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyMode::Irp => "irp",
            StrategyMode::IrP => "irP",
        })
    }
}

impl FromStr for StrategyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "irp" => Ok(StrategyMode::Irp),
            "irP" => Ok(StrategyMode::IrP),
            other => Err(format!("unknown strategy mode `{other}` (expected irp or irP)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Soundness {
    Exact,
    /// A negative answer only means no grid or refined point worked.
    GridIncomplete,
}

impl Soundness {
    pub fn as_str(self) -> &'static str {
        match self {
            Soundness::Exact => "exact",
            Soundness::GridIncomplete => "grid-incomplete",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub mode: StrategyMode,
    pub grid: u32,
    pub refine: bool,
    pub refine_top: usize,
    /// Largest number of candidates a single synthesis may enumerate.
    pub strategy_cap: u128,
    pub vi: ViConfig,
    /// Strategy text to check instead of searching; applies to every coalition.
    pub strategy: Option<String>,
    pub parallelism: Parallelism,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            mode: StrategyMode::IrP,
            grid: 10,
            refine: true,
            refine_top: 5,
            strategy_cap: 1_000_000,
            vi: ViConfig::default(),
            strategy: None,
            parallelism: Parallelism::available(),
        }
    }
}

/// `⋈ z` against the universal outcome bounds: lower bounds use `p_min`,
/// upper bounds `p_max`.
pub fn check_pbound(p_min: f64, p_max: f64, bound: &ProbBound) -> bool {
    let z = bound.threshold_f64();
    match bound.relation {
        Relation::Ge => p_min >= z - EPSILON,
        Relation::Gt => p_min > z + EPSILON,
        Relation::Le => p_max <= z + EPSILON,
        Relation::Lt => p_max < z - EPSILON,
    }
}

fn decides(value: f64, bound: &ProbBound) -> bool {
    check_pbound(value, value, bound)
}

fn needed_mode(bound: &ProbBound) -> Mode {
    if bound.relation.is_lower_bound() {
        Mode::Min
    } else {
        Mode::Max
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PBoundReport {
    pub formula: String,
    pub p_min: f64,
    pub p_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchInfo {
    pub mode: StrategyMode,
    pub grid: Option<u32>,
    pub candidates: usize,
    pub refinement_steps: usize,
}

/// Outcome of one coalition synthesis at the initial state.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub formula: String,
    pub holds: bool,
    /// Best strategy found, whether or not it satisfies the formula.
    pub best: JointStrategyIrP,
    pub best_text: String,
    /// Signed margin of the best strategy: positive when all bounds hold.
    pub slack: f64,
    /// Outcome bounds of every probabilistic operator under `best`.
    pub bounds: Vec<PBoundReport>,
    pub search: SearchInfo,
    pub soundness: Soundness,
}

impl Verdict {
    pub fn witness(&self) -> Option<&str> {
        self.holds.then_some(self.best_text.as_str())
    }

    pub fn p_min(&self) -> Option<f64> {
        self.bounds.first().map(|b| b.p_min)
    }

    pub fn p_max(&self) -> Option<f64> {
        self.bounds.first().map(|b| b.p_max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "formula": self.formula,
            "holds": self.holds,
            "p_min": self.p_min(),
            "p_max": self.p_max(),
            "slack": self.slack,
            "witness": self.witness(),
            "soundness": self.soundness.as_str(),
            "candidates": self.search.candidates,
            "mode": self.search.mode.to_string(),
            "grid": self.search.grid,
            "refinement_steps": self.search.refinement_steps,
            "bounds": self.bounds.iter().map(|b| json!({
                "formula": b.formula,
                "p_min": b.p_min,
                "p_max": b.p_max,
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.formula, if self.holds { "holds" } else { "does not hold" })?;
        writeln!(f, "  soundness: {}", self.soundness.as_str())?;
        for b in &self.bounds {
            writeln!(f, "  {}: p_min={} p_max={}", b.formula, b.p_min, b.p_max)?;
        }
        write!(f, "  candidates: {} ({}", self.search.candidates, self.search.mode)?;
        if let Some(k) = self.search.grid {
            write!(f, ", grid k={k}")?;
        }
        writeln!(f, "), refinement steps: {}", self.search.refinement_steps)?;
        writeln!(f, "  {}:", if self.holds { "witness" } else { "best strategy" })?;
        for line in self.best_text.lines() {
            writeln!(f, "    {line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    /// Satisfaction of the formula in every digital state.
    pub sat: Vec<bool>,
    pub holds: bool,
    /// One verdict per coalition operator, innermost first.
    pub verdicts: Vec<Verdict>,
}

impl CheckResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "holds": self.holds,
            "verdicts": self.verdicts.iter().map(Verdict::to_json).collect::<Vec<_>>(),
        })
    }

    /// Soundness of the overall answer: exact unless some coalition verdict
    /// is grid-incomplete.
    pub fn soundness(&self) -> Soundness {
        if self.verdicts.iter().any(|v| v.soundness == Soundness::GridIncomplete) {
            Soundness::GridIncomplete
        } else {
            Soundness::Exact
        }
    }
}

/// Evaluates a formula over all digital states.
pub fn check(network: &Network, mdp: &DigitalMdp, formula: &Formula, config: &CheckConfig) -> Result<CheckResult> {
    let mut ev = Evaluator::new(network, mdp, config);
    let sat = ev.state(&formula.desugar())?;
    Ok(CheckResult {
        holds: sat[mdp.initial()],
        sat,
        verdicts: ev.verdicts,
    })
}

/// Searches a strategy for `coalition` satisfying `gamma` at the initial
/// state. Returns the coalition's satisfaction set and the verdict.
pub fn synthesize(
    network: &Network,
    mdp: &DigitalMdp,
    coalition: &[String],
    gamma: &Gamma,
    config: &CheckConfig,
) -> Result<(Vec<bool>, Verdict)> {
    let mut ev = Evaluator::new(network, mdp, config);
    let sat = ev.coalition(coalition, gamma)?;
    let verdict = ev.verdicts.pop().expect("coalition verdict");
    Ok((sat, verdict))
}

/// γ with state subformulas already turned into satisfaction sets.
enum Node {
    Sat(Vec<bool>),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Path {
        bound: ProbBound,
        release: bool,
        lhs: Box<Node>,
        rhs: Box<Node>,
        interval: TimeInterval,
        /// Schedule for the until (or, for release, the dual until) when
        /// both operands are strategy independent.
        plan: Option<UntilPlan>,
        text: String,
    },
}

impl Node {
    fn is_static(&self) -> bool {
        match self {
            Node::Sat(_) => true,
            Node::Not(a) => a.is_static(),
            Node::And(a, b) => a.is_static() && b.is_static(),
            Node::Path { .. } => false,
        }
    }

    /// Satisfaction set and slack at `init` under the induced model.
    fn eval(
        &self,
        model: &InducedModel,
        vi: &ViConfig,
        init: StateId,
        mut reports: Option<&mut Vec<PBoundReport>>,
    ) -> Result<(Vec<bool>, f64)> {
        match self {
            Node::Sat(s) => Ok((s.clone(), if s[init] { 1.0 } else { -1.0 })),
            Node::Not(a) => {
                let (s, slack) = a.eval(model, vi, init, reports)?;
                Ok((s.into_iter().map(|b| !b).collect(), -slack))
            }
            Node::And(a, b) => {
                let (sa, xa) = a.eval(model, vi, init, reports.as_deref_mut())?;
                let (sb, xb) = b.eval(model, vi, init, reports)?;
                Ok((sa.iter().zip(&sb).map(|(x, y)| *x && *y).collect(), xa.min(xb)))
            }
            Node::Path {
                bound,
                release,
                lhs,
                rhs,
                interval,
                plan,
                text,
            } => {
                let built;
                let plan = match plan {
                    Some(p) => p,
                    None => {
                        let (s1, _) = lhs.eval(model, vi, init, reports.as_deref_mut())?;
                        let (s2, _) = rhs.eval(model, vi, init, reports.as_deref_mut())?;
                        built = if *release {
                            let n1: Vec<bool> = s1.iter().map(|b| !b).collect();
                            let n2: Vec<bool> = s2.iter().map(|b| !b).collect();
                            UntilPlan::new(model.mdp(), &n1, &n2, *interval)
                        } else {
                            UntilPlan::new(model.mdp(), &s1, &s2, *interval)
                        };
                        &built
                    }
                };
                let value = |mode: Mode| -> Result<Vec<f64>> {
                    Ok(if *release {
                        plan.solve(model, mode.opposite(), vi)?.iter().map(|v| 1.0 - v).collect()
                    } else {
                        plan.solve(model, mode, vi)?.iter().collect()
                    })
                };
                let mode = needed_mode(bound);
                let values = value(mode)?;
                let sat = values.iter().map(|&v| decides(v, bound)).collect();
                let z = bound.threshold_f64();
                let slack = match mode {
                    Mode::Min => values[init] - z,
                    Mode::Max => z - values[init],
                };
                if let Some(reports) = reports {
                    let other = value(mode.opposite())?[init];
                    let (p_min, p_max) = match mode {
                        Mode::Min => (values[init], other),
                        Mode::Max => (other, values[init]),
                    };
                    reports.push(PBoundReport {
                        formula: text.clone(),
                        p_min,
                        p_max,
                    });
                }
                Ok((sat, slack))
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Scored {
    holds: bool,
    slack: f64,
    theta: JointStrategyIrP,
}

fn lex_cmp(a: &JointStrategyIrP, b: &JointStrategyIrP) -> Ordering {
    a.flat()
        .zip(b.flat())
        .map(|(x, y)| x.total_cmp(&y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Ranking: satisfying first, then larger slack, then lexicographically
/// smaller strategy.
fn rank(a: &Scored, b: &Scored) -> Ordering {
    b.holds
        .cmp(&a.holds)
        .then(b.slack.total_cmp(&a.slack))
        .then_with(|| lex_cmp(&a.theta, &b.theta))
}

struct Evaluator<'a> {
    network: &'a Network,
    mdp: &'a DigitalMdp,
    config: &'a CheckConfig,
    memo: HashMap<Formula, Vec<bool>>,
    verdicts: Vec<Verdict>,
}

impl<'a> Evaluator<'a> {
    fn new(network: &'a Network, mdp: &'a DigitalMdp, config: &'a CheckConfig) -> Self {
        Evaluator {
            network,
            mdp,
            config,
            memo: HashMap::new(),
            verdicts: Vec::new(),
        }
    }

    fn state(&mut self, f: &Formula) -> Result<Vec<bool>> {
        let n = self.mdp.num_states();
        Ok(match f {
            Formula::Atom(p) if p == "true" => vec![true; n],
            Formula::Atom(p) if p == "false" => vec![false; n],
            Formula::Atom(p) => {
                let i = self
                    .mdp
                    .proposition_index(p)
                    .ok_or_else(|| Error::UnknownProposition(p.clone()))?;
                (0..n).map(|s| self.mdp.labels(s).contains(&i)).collect()
            }
            Formula::Not(a) => self.state(a)?.into_iter().map(|b| !b).collect(),
            Formula::And(a, b) => {
                let sa = self.state(a)?;
                let sb = self.state(b)?;
                sa.iter().zip(&sb).map(|(x, y)| *x && *y).collect()
            }
            Formula::Or(..) | Formula::Implies(..) => self.state(&f.desugar())?,
            Formula::Coalition(agents, g) => {
                if let Some(s) = self.memo.get(f) {
                    return Ok(s.clone());
                }
                let s = self.coalition(agents, g)?;
                self.memo.insert(f.clone(), s.clone());
                s
            }
        })
    }

    fn compile(&mut self, g: &Gamma) -> Result<Node> {
        Ok(match g {
            Gamma::State(f) => Node::Sat(self.state(f)?),
            Gamma::Not(a) => Node::Not(Box::new(self.compile(a)?)),
            Gamma::And(a, b) => Node::And(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Gamma::Until(bound, a, i, b) | Gamma::Release(bound, a, i, b) => {
                let release = matches!(g, Gamma::Release(..));
                let lhs = self.compile(a)?;
                let rhs = self.compile(b)?;
                let plan = match (&lhs, &rhs) {
                    (l, r) if l.is_static() && r.is_static() => {
                        let s1 = static_sat(l);
                        let s2 = static_sat(r);
                        Some(if release {
                            let n1: Vec<bool> = s1.iter().map(|b| !b).collect();
                            let n2: Vec<bool> = s2.iter().map(|b| !b).collect();
                            UntilPlan::new(self.mdp, &n1, &n2, *i)
                        } else {
                            UntilPlan::new(self.mdp, &s1, &s2, *i)
                        })
                    }
                    _ => None,
                };
                Node::Path {
                    bound: bound.clone(),
                    release,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                    interval: *i,
                    plan,
                    text: g.to_string(),
                }
            }
            Gamma::Or(..) | Gamma::Implies(..) | Gamma::Finally(..) | Gamma::Globally(..) => {
                self.compile(&g.desugar())?
            }
        })
    }

    fn coalition(&mut self, agents: &[String], gamma: &Gamma) -> Result<Vec<bool>> {
        let formula = Formula::coalition(agents.to_vec(), gamma.clone()).to_string();
        let space = strategy_space(self.network, agents)?;
        let node = self.compile(&gamma.desugar())?;
        let plan = InducePlan::new(self.mdp, &space)?;
        let init = self.mdp.initial();
        let config = self.config;
        let evaluate = |theta: &JointStrategyIrP| -> Result<(Vec<bool>, f64)> {
            let model = plan.induce(theta)?;
            node.eval(&model, &config.vi, init, None)
        };

        let fixed = match &config.strategy {
            Some(text) => Some(JointStrategyIrP::from_text(&space, text)?),
            None => None,
        };
        let candidates: Box<dyn Iterator<Item = JointStrategyIrP>> = match (&fixed, config.mode) {
            (Some(theta), _) => Box::new(std::iter::once(theta.clone())),
            (None, StrategyMode::Irp) => Box::new(
                enumerate_irp(&space, config.strategy_cap)?.map(|s| s.to_irp_distribution(&space)),
            ),
            (None, StrategyMode::IrP) => Box::new(grid(&space, config.grid, config.strategy_cap)?),
        };

        let n = self.mdp.num_states();
        let mut union = vec![false; n];
        let keep = config.refine_top.max(1);
        let mut top: Vec<Scored> = Vec::new();
        let mut count = 0usize;
        let mut absorb = |theta: JointStrategyIrP, sat: &[bool], slack: f64, top: &mut Vec<Scored>| {
            for (u, &b) in union.iter_mut().zip(sat) {
                *u |= b;
            }
            let scored = Scored {
                holds: sat[init],
                slack,
                theta,
            };
            let at = top.partition_point(|t| rank(t, &scored) == Ordering::Less);
            if at < keep {
                top.insert(at, scored);
                top.truncate(keep);
            }
        };
        let mut candidates = candidates.peekable();
        while candidates.peek().is_some() {
            config.vi.check_deadline()?;
            let chunk: Vec<JointStrategyIrP> = candidates.by_ref().take(CHUNK).collect();
            let results = par::map(&chunk, config.parallelism, |theta| evaluate(theta));
            for (theta, r) in chunk.into_iter().zip(results) {
                let (sat, slack) = r?;
                count += 1;
                absorb(theta, &sat, slack, &mut top);
            }
        }

        let mut refinement_steps = 0;
        let searching = fixed.is_none() && config.mode == StrategyMode::IrP;
        if searching && config.refine && space.blocks().iter().any(|b| b.actions.len() > 1) {
            let starts: Vec<JointStrategyIrP> = top.iter().map(|s| s.theta.clone()).collect();
            let schedule = RefineSchedule::for_resolution(config.grid);
            let refined = par::map(&starts, config.parallelism, |start| {
                refine(&space, start, |t| evaluate(t).map(|(_, slack)| slack), schedule)
            });
            for r in refined {
                let r = r?;
                refinement_steps += r.accepted_steps;
                count += r.evaluations;
                let (sat, slack) = evaluate(&r.strategy)?;
                absorb(r.strategy, &sat, slack, &mut top);
            }
        }

        let best = top.into_iter().next().expect("at least one candidate");
        let mut bounds = Vec::new();
        let model = plan.induce(&best.theta)?;
        node.eval(&model, &config.vi, init, Some(&mut bounds))?;
        let exhaustive = fixed.is_none()
            && (config.mode == StrategyMode::Irp
                || space.blocks().iter().all(|b| b.actions.len() == 1));
        let soundness = if best.holds || exhaustive {
            Soundness::Exact
        } else {
            Soundness::GridIncomplete
        };
        self.verdicts.push(Verdict {
            formula,
            holds: best.holds,
            best_text: best.theta.to_text(&space),
            best: best.theta,
            slack: best.slack,
            bounds,
            search: SearchInfo {
                mode: config.mode,
                grid: (searching).then_some(config.grid),
                candidates: count,
                refinement_steps,
            },
            soundness,
        });
        Ok(union)
    }
}

fn static_sat(node: &Node) -> Vec<bool> {
    match node {
        Node::Sat(s) => s.clone(),
        Node::Not(a) => static_sat(a).into_iter().map(|b| !b).collect(),
        Node::And(a, b) => static_sat(a)
            .iter()
            .zip(static_sat(b))
            .map(|(x, y)| *x && y)
            .collect(),
        Node::Path { .. } => unreachable!("static nodes contain no path operator"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digital::{digitize, DEFAULT_STATE_CAP};
    use crate::lang::{parse_formula, parse_model};

    #[test]
    fn pbound_examples() {
        let b = |rel, z: f64| ProbBound::new(rel, crate::model::parse_probability(&z.to_string()).unwrap());
        assert!(check_pbound(0.9, 0.9, &b(Relation::Ge, 0.8)));
        assert!(!check_pbound(0.7, 0.95, &b(Relation::Ge, 0.8)));
        assert!(check_pbound(0.1, 0.3, &b(Relation::Le, 0.5)));
        assert!(!check_pbound(0.5, 0.5, &b(Relation::Gt, 0.5)));
        assert!(check_pbound(0.5 - 1e-12, 0.5, &b(Relation::Ge, 0.5)));
    }

    const CHOOSE: &str = "
        agent C { loc s { protocol left, right; on left goto { 1: -> l; } on right goto { 1: -> r; } }
                  loc l { labels left; } loc r { labels right; } }";

    #[test]
    fn single_agent_choice() {
        let net = parse_model(CHOOSE).unwrap();
        let mdp = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        let config = CheckConfig::default();
        let f = parse_formula("<<C>> P>=1 F[0,0] right").unwrap();
        let r = check(&net, &mdp, &f, &config).unwrap();
        // nothing forces the move before the first tick
        assert!(!r.holds);
        let f = parse_formula("<<>> P>=1 F[0,0] right").unwrap();
        let r = check(&net, &mdp, &f, &config).unwrap();
        assert!(!r.holds);
        assert_eq!(r.verdicts[0].soundness, Soundness::Exact);
    }

    #[test]
    fn urgent_choice_and_witness() {
        let text = "
            agent C { clocks c; loc s invariant c <= 0 { protocol left, right;
                        on left goto { 1: -> l; } on right goto { 1: -> r; } }
                      loc l { labels left; } loc r { labels right; } }";
        let net = parse_model(text).unwrap();
        let mdp = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        for mode in [StrategyMode::Irp, StrategyMode::IrP] {
            let config = CheckConfig { mode, ..CheckConfig::default() };
            let f = parse_formula("<<C>> P>=1 F[0,0] right").unwrap();
            let r = check(&net, &mdp, &f, &config).unwrap();
            assert!(r.holds);
            let v = &r.verdicts[0];
            assert_eq!(v.witness(), Some("C.s: left=0, right=1\n"));
            assert_eq!(v.p_min(), Some(1.0));

            // both outcomes at least 0.4: only a mixed strategy
            let f = parse_formula("<<C>> (P>=0.4 F[0,0] left & P>=0.4 F[0,0] right)").unwrap();
            let r = check(&net, &mdp, &f, &config).unwrap();
            assert_eq!(r.holds, mode == StrategyMode::IrP);
            assert_eq!(r.verdicts[0].soundness, Soundness::Exact);
            assert_eq!(r.verdicts[0].bounds.len(), 2);
        }
        let config = CheckConfig {
            strategy: Some("C.s: left=1".into()),
            ..CheckConfig::default()
        };
        let f = parse_formula("<<C>> P>=1 F[0,0] right").unwrap();
        let r = check(&net, &mdp, &f, &config).unwrap();
        assert!(!r.holds);
        assert_eq!(r.verdicts[0].soundness, Soundness::GridIncomplete);
    }

    #[test]
    fn unknown_names_are_errors() {
        let net = parse_model(CHOOSE).unwrap();
        let mdp = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        let config = CheckConfig::default();
        let f = parse_formula("<<C>> P>=1 F[0,3] nowhere").unwrap();
        assert!(matches!(check(&net, &mdp, &f, &config), Err(Error::UnknownProposition(_))));
        let f = parse_formula("<<D>> P>=1 F[0,3] left").unwrap();
        assert!(matches!(check(&net, &mdp, &f, &config), Err(Error::UnknownAgent(_))));
    }

    #[test]
    fn schedules_agree() {
        let text = "
            agent C { clocks c; loc s invariant c <= 0 { protocol a, b, d;
                        on a goto { 1/3: -> l; 2/3: -> s; } on b goto { 1: -> r; } on d goto { 1/2: -> l; 1/2: -> r; } }
                      loc l { labels left; } loc r { labels right; } }";
        let net = parse_model(text).unwrap();
        let mdp = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        let f = parse_formula("<<C>> (P>=0.3 F[0,0] left & P>=0.3 F[0,0] right)").unwrap();
        let run = |p| {
            let config = CheckConfig { parallelism: p, ..CheckConfig::default() };
            let r = check(&net, &mdp, &f, &config).unwrap();
            (r.holds, r.verdicts[0].best.clone(), r.verdicts[0].slack)
        };
        assert_eq!(run(Parallelism::Sequential), run(Parallelism::available()));
    }
}
