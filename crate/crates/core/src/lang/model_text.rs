//! Block-structured model syntax.
//!
//! ```text
//! agent train_1 {
//!   clocks x_1;
//!   init wait;
//!   loc tunnel invariant x_1 <= 2 {
//!     labels inside_1;
//!     protocol done_1;
//!     on done_1 when x_1 = 2 goto { 1: -> passed; }
//!   }
//! }
//! ```

use std::fmt::Write;

use super::lexer::{Cursor, Tok};
use crate::error::{Diagnostics, Error, Result};
use crate::model::{
    Agent, Branch, ClockAtom, ClockConstraint, Comparator, Edge, Location, Network,
};

/// Parses and validates a model. Validation errors (not warnings) fail.
pub fn parse_model(text: &str) -> Result<Network> {
    let network = parse_model_unchecked(text)?;
    let errors: Vec<_> = network
        .validate()
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if errors.is_empty() {
        Ok(network)
    } else {
        Err(Error::InvalidModel(Diagnostics(errors)))
    }
}

/// Parses a model without running validation.
pub fn parse_model_unchecked(text: &str) -> Result<Network> {
    let mut cur = Cursor::new(text)?;
    let mut agents = Vec::new();
    while !cur.at_end() {
        agents.push(agent(&mut cur)?);
    }
    Ok(Network::new(agents))
}

fn ident_list(cur: &mut Cursor) -> Result<Vec<String>> {
    let mut out = Vec::new();
    if matches!(cur.peek(), Tok::Ident(_)) {
        out.push(cur.ident()?);
        while cur.eat(&Tok::Comma) {
            out.push(cur.ident()?);
        }
    }
    Ok(out)
}

fn agent(cur: &mut Cursor) -> Result<Agent> {
    cur.expect_keyword("agent")?;
    let name = cur.ident()?;
    cur.expect(Tok::LBrace)?;
    let mut clocks = Vec::new();
    let mut initial = None;
    let mut locations = Vec::new();
    loop {
        if cur.eat(&Tok::RBrace) {
            break;
        } else if cur.eat_keyword("clocks") {
            clocks.extend(ident_list(cur)?);
            cur.expect(Tok::Semi)?;
        } else if cur.eat_keyword("init") {
            if initial.is_some() {
                return cur.error("initial location declared twice");
            }
            initial = Some(cur.ident()?);
            cur.expect(Tok::Semi)?;
        } else if cur.is_keyword("loc") {
            locations.push(location(cur)?);
        } else {
            return cur.error(format!(
                "expected `clocks`, `init`, `loc` or `}}`, found {}",
                cur.peek().describe()
            ));
        }
    }
    let initial = match initial {
        Some(i) => i,
        None => match locations.first() {
            Some(l) => l.name.clone(),
            None => return cur.error(format!("agent `{name}` has no locations")),
        },
    };
    Ok(Agent {
        name,
        clocks,
        initial,
        locations,
    })
}

fn location(cur: &mut Cursor) -> Result<Location> {
    cur.expect_keyword("loc")?;
    let mut loc = Location::new(cur.ident()?);
    if cur.eat_keyword("invariant") {
        loc.invariant = constraint(cur)?;
    }
    cur.expect(Tok::LBrace)?;
    loop {
        if cur.eat(&Tok::RBrace) {
            break;
        } else if cur.eat_keyword("labels") {
            loc.labels.extend(ident_list(cur)?);
            cur.expect(Tok::Semi)?;
        } else if cur.eat_keyword("protocol") {
            loc.protocol.extend(ident_list(cur)?);
            cur.expect(Tok::Semi)?;
        } else if cur.is_keyword("on") {
            loc.edges.push(edge(cur)?);
        } else {
            return cur.error(format!(
                "expected `labels`, `protocol`, `on` or `}}`, found {}",
                cur.peek().describe()
            ));
        }
    }
    Ok(loc)
}

fn edge(cur: &mut Cursor) -> Result<Edge> {
    cur.expect_keyword("on")?;
    let action = cur.ident()?;
    let guard = if cur.eat_keyword("when") {
        constraint(cur)?
    } else {
        ClockConstraint::truth()
    };
    cur.expect_keyword("goto")?;
    cur.expect(Tok::LBrace)?;
    let mut branches = Vec::new();
    while !cur.eat(&Tok::RBrace) {
        let probability = cur.probability()?;
        cur.expect(Tok::Colon)?;
        let mut resets = Vec::new();
        if cur.eat_keyword("reset") {
            cur.expect(Tok::LBrace)?;
            resets = ident_list(cur)?;
            cur.expect(Tok::RBrace)?;
        }
        cur.expect(Tok::Arrow)?;
        let target = cur.ident()?;
        cur.expect(Tok::Semi)?;
        branches.push(Branch {
            probability,
            resets,
            target,
        });
    }
    if branches.is_empty() {
        return cur.error(format!("edge `{action}` has no branches"));
    }
    Ok(Edge {
        action,
        guard,
        branches,
    })
}

fn constraint(cur: &mut Cursor) -> Result<ClockConstraint> {
    if cur.eat_keyword("true") {
        return Ok(ClockConstraint::truth());
    }
    let mut atoms = vec![atom(cur)?];
    while cur.eat(&Tok::Amp) {
        atoms.push(atom(cur)?);
    }
    Ok(ClockConstraint::new(atoms))
}

fn atom(cur: &mut Cursor) -> Result<ClockAtom> {
    let clock = cur.ident()?;
    let cmp = match cur.peek() {
        Tok::Le => Comparator::Le,
        Tok::Ge => Comparator::Ge,
        Tok::Eq => Comparator::Eq,
        Tok::Lt => Comparator::Lt,
        Tok::Gt => Comparator::Gt,
        Tok::Minus => return cur.error("diagonal clock constraints are not supported"),
        other => {
            return cur.error(format!("expected comparator, found {}", other.describe()))
        }
    };
    cur.bump();
    let constant = cur.natural()?;
    Ok(ClockAtom::new(clock, cmp, constant))
}

/// Canonical text of a network; `parse_model(&print_model(n)) == n`.
pub fn print_model(network: &Network) -> String {
    let mut out = String::new();
    for (i, agent) in network.agents.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "agent {} {{", agent.name).unwrap();
        if !agent.clocks.is_empty() {
            writeln!(out, "  clocks {};", agent.clocks.join(", ")).unwrap();
        }
        writeln!(out, "  init {};", agent.initial).unwrap();
        for loc in &agent.locations {
            write!(out, "  loc {}", loc.name).unwrap();
            if !loc.invariant.is_true() {
                write!(out, " invariant {}", loc.invariant).unwrap();
            }
            out.push_str(" {\n");
            if !loc.labels.is_empty() {
                writeln!(out, "    labels {};", loc.labels.join(", ")).unwrap();
            }
            if !loc.protocol.is_empty() {
                writeln!(out, "    protocol {};", loc.protocol.join(", ")).unwrap();
            }
            for edge in &loc.edges {
                write!(out, "    on {}", edge.action).unwrap();
                if !edge.guard.is_true() {
                    write!(out, " when {}", edge.guard).unwrap();
                }
                out.push_str(" goto {");
                for b in &edge.branches {
                    write!(out, " {}:", b.probability).unwrap();
                    if !b.resets.is_empty() {
                        write!(out, " reset {{{}}}", b.resets.join(", ")).unwrap();
                    }
                    write!(out, " -> {};", b.target).unwrap();
                }
                out.push_str(" }\n");
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }
    out
}
