//! Two-layer formula syntax: state formulas and strategy-scoped formulas.
//!
//! ```text
//! phi   := ident | "!" phi | phi "&" phi | phi "|" phi | phi "->" phi | "<<" idents ">>" gamma
//! gamma := phi | "!" gamma | gamma "&" gamma | "P" rel num pathop
//! pathop:= gamma "U" interval gamma | gamma "R" interval gamma
//!        | "F" interval gamma | "G" interval gamma
//! ```
//!
//! `<<A>>`, `!` and `P` bind tighter than any binary connective, so
//! `<<C>> (P>=0.5 F[0,3] a & P>=0.5 F[0,3] b)` needs its parentheses.
//! Until and release take parenthesised operands or a single unary operand
//! on each side: `P<0.5 (a U[2,7] b)`.

use std::fmt;

use super::lexer::{Cursor, Tok};
use crate::error::Result;
use crate::model::{ProbBound, Relation, TimeInterval};

/// State formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Coalition(Vec<String>, Box<Gamma>),
}

/// Formula evaluated under a fixed coalition strategy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gamma {
    State(Box<Formula>),
    Not(Box<Gamma>),
    And(Box<Gamma>, Box<Gamma>),
    Or(Box<Gamma>, Box<Gamma>),
    Implies(Box<Gamma>, Box<Gamma>),
    Until(ProbBound, Box<Gamma>, TimeInterval, Box<Gamma>),
    Release(ProbBound, Box<Gamma>, TimeInterval, Box<Gamma>),
    Finally(ProbBound, TimeInterval, Box<Gamma>),
    Globally(ProbBound, TimeInterval, Box<Gamma>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn coalition(agents: Vec<String>, body: Gamma) -> Self {
        Formula::Coalition(agents, Box::new(body))
    }

    /// Only core connectives remain.
    pub fn is_core(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(a) => a.is_core(),
            Formula::And(a, b) => a.is_core() && b.is_core(),
            Formula::Or(..) | Formula::Implies(..) => false,
            Formula::Coalition(_, g) => g.is_core(),
        }
    }

    /// Replaces derived connectives by their core definitions.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::Atom(p) => Formula::Atom(p.clone()),
            Formula::Not(a) => Formula::not(a.desugar()),
            Formula::And(a, b) => Formula::and(a.desugar(), b.desugar()),
            Formula::Or(a, b) => Formula::not(Formula::and(
                Formula::not(a.desugar()),
                Formula::not(b.desugar()),
            )),
            Formula::Implies(a, b) => {
                Formula::not(Formula::and(a.desugar(), Formula::not(b.desugar())))
            }
            Formula::Coalition(agents, g) => Formula::coalition(agents.clone(), g.desugar()),
        }
    }
}

impl Gamma {
    pub fn state(f: Formula) -> Self {
        Gamma::State(Box::new(f))
    }

    pub fn is_core(&self) -> bool {
        match self {
            Gamma::State(f) => f.is_core(),
            Gamma::Not(a) => a.is_core(),
            Gamma::And(a, b) => a.is_core() && b.is_core(),
            Gamma::Until(_, a, _, b) | Gamma::Release(_, a, _, b) => a.is_core() && b.is_core(),
            Gamma::Or(..) | Gamma::Implies(..) | Gamma::Finally(..) | Gamma::Globally(..) => false,
        }
    }

    pub fn desugar(&self) -> Gamma {
        let bx = Box::new;
        let not = |g: Gamma| Gamma::Not(bx(g));
        match self {
            Gamma::State(f) => Gamma::state(f.desugar()),
            Gamma::Not(a) => not(a.desugar()),
            Gamma::And(a, b) => Gamma::And(bx(a.desugar()), bx(b.desugar())),
            Gamma::Or(a, b) => not(Gamma::And(bx(not(a.desugar())), bx(not(b.desugar())))),
            Gamma::Implies(a, b) => not(Gamma::And(bx(a.desugar()), bx(not(b.desugar())))),
            Gamma::Until(p, a, i, b) => Gamma::Until(p.clone(), bx(a.desugar()), *i, bx(b.desugar())),
            Gamma::Release(p, a, i, b) => {
                Gamma::Release(p.clone(), bx(a.desugar()), *i, bx(b.desugar()))
            }
            Gamma::Finally(p, i, b) => Gamma::Until(
                p.clone(),
                bx(Gamma::state(Formula::atom("true"))),
                *i,
                bx(b.desugar()),
            ),
            Gamma::Globally(p, i, b) => Gamma::Release(
                p.clone(),
                bx(Gamma::state(Formula::atom("false"))),
                *i,
                bx(b.desugar()),
            ),
        }
    }

    /// Whether a probabilistic operator occurs outside nested coalitions.
    pub fn has_probability(&self) -> bool {
        match self {
            Gamma::State(_) => false,
            Gamma::Not(a) => a.has_probability(),
            Gamma::And(a, b) | Gamma::Or(a, b) | Gamma::Implies(a, b) => {
                a.has_probability() || b.has_probability()
            }
            Gamma::Until(..) | Gamma::Release(..) | Gamma::Finally(..) | Gamma::Globally(..) => {
                true
            }
        }
    }
}

/// Raw parse tree before the two layers are told apart.
#[derive(Debug)]
enum Raw {
    Atom(String),
    Not(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Implies(Box<Raw>, Box<Raw>),
    Coalition(Vec<String>, Box<Raw>),
    Prob(ProbBound, PathOp),
}

#[derive(Debug)]
enum PathOp {
    Until(Box<Raw>, TimeInterval, Box<Raw>),
    Release(Box<Raw>, TimeInterval, Box<Raw>),
    Finally(TimeInterval, Box<Raw>),
    Globally(TimeInterval, Box<Raw>),
}

impl Raw {
    fn has_probability(&self) -> bool {
        match self {
            Raw::Atom(_) | Raw::Coalition(..) => false,
            Raw::Not(a) => a.has_probability(),
            Raw::And(a, b) | Raw::Or(a, b) | Raw::Implies(a, b) => {
                a.has_probability() || b.has_probability()
            }
            Raw::Prob(..) => true,
        }
    }
}

/// Parses the surface syntax; derived operators are kept (see [`Formula::desugar`]).
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut cur = Cursor::new(text)?;
    let raw = implication(&mut cur)?;
    if !cur.at_end() {
        return cur.error(format!("unexpected {}", cur.peek().describe()));
    }
    to_state(&cur, raw)
}

fn to_state(cur: &Cursor, raw: Raw) -> Result<Formula> {
    let b = Box::new;
    Ok(match raw {
        Raw::Atom(p) => Formula::Atom(p),
        Raw::Not(a) => Formula::Not(b(to_state(cur, *a)?)),
        Raw::And(x, y) => Formula::And(b(to_state(cur, *x)?), b(to_state(cur, *y)?)),
        Raw::Or(x, y) => Formula::Or(b(to_state(cur, *x)?), b(to_state(cur, *y)?)),
        Raw::Implies(x, y) => Formula::Implies(b(to_state(cur, *x)?), b(to_state(cur, *y)?)),
        Raw::Coalition(agents, body) => Formula::Coalition(agents, Box::new(to_gamma(cur, *body)?)),
        Raw::Prob(..) => {
            return cur.error("probabilistic operator outside a coalition modality (use <<>> for none)")
        }
    })
}

fn to_gamma(cur: &Cursor, raw: Raw) -> Result<Gamma> {
    if !raw.has_probability() {
        return Ok(Gamma::state(to_state(cur, raw)?));
    }
    let b = Box::new;
    Ok(match raw {
        Raw::Not(a) => Gamma::Not(b(to_gamma(cur, *a)?)),
        Raw::And(x, y) => Gamma::And(b(to_gamma(cur, *x)?), b(to_gamma(cur, *y)?)),
        Raw::Or(x, y) => Gamma::Or(b(to_gamma(cur, *x)?), b(to_gamma(cur, *y)?)),
        Raw::Implies(x, y) => Gamma::Implies(b(to_gamma(cur, *x)?), b(to_gamma(cur, *y)?)),
        Raw::Prob(bound, op) => match op {
            PathOp::Until(x, i, y) => {
                Gamma::Until(bound, b(to_gamma(cur, *x)?), i, b(to_gamma(cur, *y)?))
            }
            PathOp::Release(x, i, y) => {
                Gamma::Release(bound, b(to_gamma(cur, *x)?), i, b(to_gamma(cur, *y)?))
            }
            PathOp::Finally(i, y) => Gamma::Finally(bound, i, b(to_gamma(cur, *y)?)),
            PathOp::Globally(i, y) => Gamma::Globally(bound, i, b(to_gamma(cur, *y)?)),
        },
        Raw::Atom(_) | Raw::Coalition(..) => unreachable!("no probability operator"),
    })
}

fn implication(cur: &mut Cursor) -> Result<Raw> {
    let lhs = disjunction(cur)?;
    if cur.eat(&Tok::Arrow) {
        let rhs = implication(cur)?;
        return Ok(Raw::Implies(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn disjunction(cur: &mut Cursor) -> Result<Raw> {
    let mut lhs = conjunction(cur)?;
    while cur.eat(&Tok::Bar) {
        let rhs = conjunction(cur)?;
        lhs = Raw::Or(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn conjunction(cur: &mut Cursor) -> Result<Raw> {
    let mut lhs = unary(cur)?;
    while cur.eat(&Tok::Amp) {
        let rhs = unary(cur)?;
        lhs = Raw::And(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn relation(tok: &Tok) -> Option<Relation> {
    match tok {
        Tok::Lt => Some(Relation::Lt),
        Tok::Le => Some(Relation::Le),
        Tok::Ge => Some(Relation::Ge),
        Tok::Gt => Some(Relation::Gt),
        _ => None,
    }
}

fn unary(cur: &mut Cursor) -> Result<Raw> {
    match cur.peek().clone() {
        Tok::Bang => {
            cur.bump();
            Ok(Raw::Not(Box::new(unary(cur)?)))
        }
        Tok::CoalitionOpen => {
            cur.bump();
            let mut agents = Vec::new();
            if !cur.eat(&Tok::CoalitionClose) {
                agents.push(cur.ident()?);
                while cur.eat(&Tok::Comma) {
                    agents.push(cur.ident()?);
                }
                cur.expect(Tok::CoalitionClose)?;
            }
            Ok(Raw::Coalition(agents, Box::new(unary(cur)?)))
        }
        Tok::LParen => {
            cur.bump();
            let inner = implication(cur)?;
            cur.expect(Tok::RParen)?;
            Ok(inner)
        }
        Tok::Ident(w) if w == "P" && (relation(cur.peek_at(1)).is_some() || *cur.peek_at(1) == Tok::Eq) => {
            cur.bump();
            let rel = match relation(cur.peek()) {
                Some(r) => r,
                None => return cur.error("`=` is not a supported probability relation"),
            };
            cur.bump();
            let threshold = cur.probability()?;
            if threshold > crate::model::Prob::from_integer(1.into()) {
                return cur.error(format!("probability threshold {threshold} exceeds 1"));
            }
            let bound = ProbBound::new(rel, threshold);
            Ok(Raw::Prob(bound, path_op(cur)?))
        }
        Tok::Ident(w) => {
            cur.bump();
            Ok(Raw::Atom(w))
        }
        other => cur.error(format!("expected formula, found {}", other.describe())),
    }
}

fn is_temporal(cur: &Cursor, word: &str) -> bool {
    cur.is_keyword(word) && *cur.peek_at(1) == Tok::LBracket
}

fn path_op(cur: &mut Cursor) -> Result<PathOp> {
    let b = Box::new;
    if is_temporal(cur, "F") {
        cur.bump();
        let i = interval(cur)?;
        return Ok(PathOp::Finally(i, b(unary(cur)?)));
    }
    if is_temporal(cur, "G") {
        cur.bump();
        let i = interval(cur)?;
        return Ok(PathOp::Globally(i, b(unary(cur)?)));
    }
    // `( lhs U[..] rhs )` with full operands, or `lhs U[..] rhs` with unary ones.
    let parenthesised = *cur.peek() == Tok::LParen;
    let lhs = if parenthesised {
        cur.bump();
        implication(cur)?
    } else {
        unary(cur)?
    };
    let until = if is_temporal(cur, "U") {
        true
    } else if is_temporal(cur, "R") {
        false
    } else {
        return cur.error(format!(
            "expected `U[..]` or `R[..]` after path operand, found {}",
            cur.peek().describe()
        ));
    };
    cur.bump();
    let i = interval(cur)?;
    let rhs = if parenthesised {
        let r = implication(cur)?;
        cur.expect(Tok::RParen)?;
        r
    } else {
        unary(cur)?
    };
    Ok(if until {
        PathOp::Until(b(lhs), i, b(rhs))
    } else {
        PathOp::Release(b(lhs), i, b(rhs))
    })
}

fn interval(cur: &mut Cursor) -> Result<TimeInterval> {
    cur.expect(Tok::LBracket)?;
    let lower = cur.natural()?;
    cur.expect(Tok::Comma)?;
    let upper = if cur.eat_keyword("inf") {
        None
    } else {
        Some(cur.natural()?)
    };
    cur.expect(Tok::RBracket)?;
    match TimeInterval::new(lower, upper) {
        Some(i) => Ok(i),
        None => cur.error(format!("empty interval [{lower},{}]", upper.unwrap_or(0))),
    }
}

fn write_unary_state(f: &mut fmt::Formatter<'_>, x: &Formula) -> fmt::Result {
    match x {
        Formula::Atom(_) | Formula::Not(_) | Formula::Coalition(..) => write!(f, "{x}"),
        _ => write!(f, "({x})"),
    }
}

fn write_unary_gamma(f: &mut fmt::Formatter<'_>, g: &Gamma) -> fmt::Result {
    match g {
        Gamma::State(s) => write_unary_state(f, s),
        Gamma::Not(_) | Gamma::Until(..) | Gamma::Release(..) | Gamma::Finally(..) | Gamma::Globally(..) => {
            write!(f, "{g}")
        }
        _ => write!(f, "({g})"),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Not(a) => {
                write!(f, "!")?;
                write_unary_state(f, a)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let op = match self {
                    Formula::And(..) => "&",
                    Formula::Or(..) => "|",
                    _ => "->",
                };
                write_unary_state(f, a)?;
                write!(f, " {op} ")?;
                write_unary_state(f, b)
            }
            Formula::Coalition(agents, g) => {
                write!(f, "<<{}>> ", agents.join(","))?;
                write_unary_gamma(f, g)
            }
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::State(s) => write!(f, "{s}"),
            Gamma::Not(a) => {
                write!(f, "!")?;
                write_unary_gamma(f, a)
            }
            Gamma::And(a, b) | Gamma::Or(a, b) | Gamma::Implies(a, b) => {
                let op = match self {
                    Gamma::And(..) => "&",
                    Gamma::Or(..) => "|",
                    _ => "->",
                };
                write_unary_gamma(f, a)?;
                write!(f, " {op} ")?;
                write_unary_gamma(f, b)
            }
            Gamma::Until(p, a, i, b) | Gamma::Release(p, a, i, b) => {
                let op = if matches!(self, Gamma::Until(..)) { "U" } else { "R" };
                write!(f, "P{p} (")?;
                write_unary_gamma(f, a)?;
                write!(f, " {op}{i} ")?;
                write_unary_gamma(f, b)?;
                write!(f, ")")
            }
            Gamma::Finally(p, i, b) | Gamma::Globally(p, i, b) => {
                let op = if matches!(self, Gamma::Finally(..)) { "F" } else { "G" };
                write!(f, "P{p} {op}{i} ")?;
                write_unary_gamma(f, b)
            }
        }
    }
}
