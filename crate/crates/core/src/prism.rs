//! Export to the PRISM modelling language for cross-checking.
//!
//! Each agent becomes a module with an integer location variable and one
//! bounded integer per clock. Time is a `[time]` action shared by every
//! module; a module takes part only if its invariant still holds after the
//! increment. A coalition location with several actions first draws one
//! with a probabilistic internal step weighted by the constants
//! `p_<agent>_<loc>_<action>`, then takes the drawn action. Locations with
//! a single action need no constant.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{Agent, ClockAtom, ClockConstraint, Comparator, Network};
use crate::strategy::{strategy_space, JointStrategyIrP};

#[derive(Clone, Debug, Default)]
pub struct ExportOptions {
    /// Replace the strategy constants by the given values.
    pub point: Option<JointStrategyIrP>,
}

pub fn parameter_name(agent: &str, location: &str, action: &str) -> String {
    format!("p_{agent}_{location}_{action}")
}

pub fn export_prism(network: &Network, coalition: &[String], options: &ExportOptions) -> Result<String> {
    if !network.is_valid() {
        return Err(Error::InvalidModel(crate::error::Diagnostics(
            network.validate().into_iter().filter(|d| d.is_error()).collect(),
        )));
    }
    let space = strategy_space(network, coalition)?;
    if let Some(p) = &options.point {
        p.check(&space, 1e-9)?;
    }
    let caps: BTreeMap<String, u32> = network
        .max_constants()
        .into_iter()
        .map(|(c, m)| (c, m + 1))
        .collect();
    let mut out = String::new();
    out.push_str("mdp\n\n");

    // weight expression per (agent, location, action)
    let mut weight: BTreeMap<(usize, usize, String), String> = BTreeMap::new();
    for (b, block) in space.blocks().iter().enumerate() {
        if block.actions.len() < 2 {
            continue;
        }
        for (j, action) in block.actions.iter().enumerate() {
            let name = parameter_name(&block.agent_name, &block.location_name, action);
            let expr = match &options.point {
                Some(p) => format!("{}", p.weights[b][j]),
                None => {
                    writeln!(out, "const double {name};").unwrap();
                    name
                }
            };
            weight.insert((block.agent, block.location, action.clone()), expr);
        }
    }
    if options.point.is_none() && !weight.is_empty() {
        out.push('\n');
    }

    for (a, agent) in network.agents.iter().enumerate() {
        let controlled = space.blocks().iter().any(|b| b.agent == a && b.actions.len() > 1);
        module(&mut out, a, agent, controlled, &weight, &caps);
    }

    let mut labels: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for agent in &network.agents {
        for (l, loc) in agent.locations.iter().enumerate() {
            for p in &loc.labels {
                labels.entry(p).or_default().push(format!("{}_loc={l}", agent.name));
            }
        }
    }
    for (p, places) in labels {
        writeln!(out, "label \"{p}\" = {};", places.join(" | ")).unwrap();
    }
    Ok(out)
}

fn module(
    out: &mut String,
    a: usize,
    agent: &Agent,
    controlled: bool,
    weight: &BTreeMap<(usize, usize, String), String>,
    caps: &BTreeMap<String, u32>,
) {
    let loc_var = format!("{}_loc", agent.name);
    let choice_var = format!("{}_choice", agent.name);
    let init = agent.initial_index().unwrap_or(0);
    writeln!(out, "module {}", agent.name).unwrap();
    writeln!(out, "  {loc_var} : [0..{}] init {init};", agent.locations.len().saturating_sub(1)).unwrap();
    for c in &agent.clocks {
        writeln!(out, "  {c} : [0..{}] init 0;", caps[c]).unwrap();
    }
    let widest = agent.locations.iter().map(|l| l.protocol.len()).max().unwrap_or(0);
    if controlled {
        writeln!(out, "  {choice_var} : [0..{widest}] init 0;").unwrap();
    }
    out.push('\n');

    for (l, loc) in agent.locations.iter().enumerate() {
        let here = format!("{loc_var}={l}");
        let drawn = controlled && loc.protocol.len() > 1;
        if drawn {
            let branches: Vec<String> = loc
                .protocol
                .iter()
                .enumerate()
                .map(|(j, act)| format!("{}:({choice_var}'={})", weight[&(a, l, act.clone())], j + 1))
                .collect();
            writeln!(out, "  [] {here} & {choice_var}=0 -> {};", branches.join(" + ")).unwrap();
        }
        for edge in &loc.edges {
            let mut guard = vec![here.clone()];
            if drawn {
                let j = loc.protocol.iter().position(|p| *p == edge.action).unwrap_or(0);
                guard.push(format!("{choice_var}={}", j + 1));
            }
            if !edge.guard.is_true() {
                guard.push(constraint(&edge.guard, |c| c.to_string()));
            }
            for b in &edge.branches {
                let target = agent.location_index(&b.target).unwrap_or(0);
                let inv = &agent.locations[target].invariant;
                if !inv.is_true() {
                    guard.push(constraint(inv, |c| {
                        if b.resets.iter().any(|r| r == c) {
                            "0".into()
                        } else {
                            c.to_string()
                        }
                    }));
                }
            }
            let updates: Vec<String> = edge
                .branches
                .iter()
                .map(|b| {
                    let target = agent.location_index(&b.target).unwrap_or(0);
                    let mut u = vec![format!("({loc_var}'={target})")];
                    u.extend(b.resets.iter().map(|c| format!("({c}'=0)")));
                    if drawn {
                        u.push(format!("({choice_var}'=0)"));
                    }
                    format!("{}:{}", b.probability, u.join("&"))
                })
                .collect();
            writeln!(out, "  [{}] {} -> {};", edge.action, guard.join(" & "), updates.join(" + ")).unwrap();
        }
    }

    // time
    let mut ticked: Vec<String> = agent
        .clocks
        .iter()
        .map(|c| format!("({c}'=min({c}+1,{}))", caps[c]))
        .collect();
    if controlled {
        ticked.push(format!("({choice_var}'=0)"));
    }
    let update = if ticked.is_empty() { "true".to_string() } else { ticked.join("&") };
    for (l, loc) in agent.locations.iter().enumerate() {
        let mut guard = format!("{loc_var}={l}");
        if !loc.invariant.is_true() {
            let after = constraint(&loc.invariant, |c| format!("min({c}+1,{})", caps[c]));
            write!(guard, " & {after}").unwrap();
        }
        writeln!(out, "  [time] {guard} -> {update};").unwrap();
    }
    out.push_str("endmodule\n\n");
}

fn constraint(cc: &ClockConstraint, clock: impl Fn(&str) -> String) -> String {
    let atoms: Vec<String> = cc.atoms.iter().map(|a| atom(a, &clock)).collect();
    if atoms.len() == 1 {
        atoms[0].clone()
    } else {
        format!("({})", atoms.join(" & "))
    }
}

fn atom(a: &ClockAtom, clock: &impl Fn(&str) -> String) -> String {
    let op = match a.cmp {
        Comparator::Le => "<=",
        Comparator::Ge => ">=",
        Comparator::Eq => "=",
        Comparator::Lt => "<",
        Comparator::Gt => ">",
    };
    format!("{}{op}{}", clock(&a.clock), a.constant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_model;
    use crate::tgc::gen_tgc_model;

    #[test]
    fn four_train_parameters() {
        let net = parse_model(&gen_tgc_model(4)).unwrap();
        let text = export_prism(&net, &["C".into()], &ExportOptions::default()).unwrap();
        let consts: Vec<&str> = text.lines().filter(|l| l.starts_with("const double")).collect();
        assert_eq!(
            consts,
            (1..=4)
                .map(|i| format!("const double p_C_idle_grant_{i};"))
                .collect::<Vec<_>>()
        );
        assert!(text.contains("[time] train_1_loc=1 & min(x_1+1,5)<=4 -> (x_1'=min(x_1+1,5));"));
        assert!(text.contains("label \"passed_1\" = train_1_loc=2 | train_1_loc=3;"));
    }

    #[test]
    fn empty_coalition_and_point() {
        let net = parse_model(&gen_tgc_model(2)).unwrap();
        let text = export_prism(&net, &[], &ExportOptions::default()).unwrap();
        assert!(!text.contains("const double"));
        let point = JointStrategyIrP { weights: vec![vec![1.0, 0.0], vec![1.0], vec![1.0]] };
        let text = export_prism(&net, &["C".into()], &ExportOptions { point: Some(point) }).unwrap();
        assert!(!text.contains("const double"));
        assert!(text.contains("[] C_loc=0 & C_choice=0 -> 1:(C_choice'=1) + 0:(C_choice'=2);"));
    }
}
