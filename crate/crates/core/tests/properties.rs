mod support;

use std::collections::BTreeSet;

use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pstctl::check::{prob_until, Mode, ViConfig};
use pstctl::digital::{digitize, DigitalMdp, MoveKind, DEFAULT_STATE_CAP};
use pstctl::lang::{parse_formula, parse_model, print_model, Formula, Gamma};
use pstctl::model::{Branch, ClockAtom, ClockConstraint, Comparator, Edge, Location, Network, ProbBound, Relation, TimeInterval};
use pstctl::strategy::{enumerate_irp, grid, strategy_space, InducePlan, JointStrategyIrP, StrategySpace};
use pstctl::tgc::gen_tgc_model;

use support::Shape;

fn interval() -> impl Strategy<Value = TimeInterval> {
    (0u32..5, prop::option::of(0u32..6)).prop_map(|(a, w)| TimeInterval::new(a, w.map(|w| a + w)).unwrap())
}

fn bound() -> impl Strategy<Value = ProbBound> {
    let relation = prop_oneof![Just(Relation::Lt), Just(Relation::Le), Just(Relation::Ge), Just(Relation::Gt)];
    let threshold = prop_oneof![Just((0, 1)), Just((1, 4)), Just((1, 3)), Just((1, 2)), Just((4, 5)), Just((1, 1))];
    (relation, threshold).prop_map(|(r, (n, d))| ProbBound::new(r, BigRational::new(n.into(), d.into())))
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just("a"), Just("b"), Just("goal")].prop_map(Formula::atom);
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
            (prop::sample::subsequence(vec!["A", "B"], 0..=2), gamma(inner))
                .prop_map(|(agents, g)| Formula::coalition(agents.into_iter().map(String::from).collect(), g)),
        ]
    })
}

fn gamma(state: BoxedStrategy<Formula>) -> impl Strategy<Value = Gamma> {
    let leaf = state.prop_map(Gamma::state);
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|g| Gamma::Not(Box::new(g))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Gamma::And(Box::new(a), Box::new(b))),
            (bound(), inner.clone(), interval(), inner.clone())
                .prop_map(|(p, a, i, b)| Gamma::Until(p, Box::new(a), i, Box::new(b))),
            (bound(), inner.clone(), interval(), inner.clone())
                .prop_map(|(p, a, i, b)| Gamma::Release(p, Box::new(a), i, Box::new(b))),
            (bound(), interval(), inner.clone()).prop_map(|(p, i, g)| Gamma::Finally(p, i, Box::new(g))),
            (bound(), interval(), inner).prop_map(|(p, i, g)| Gamma::Globally(p, i, Box::new(g))),
        ]
    })
}

fn intervals_ok(g: &Gamma) -> bool {
    let ok = |i: &TimeInterval| i.upper.is_none_or(|u| u >= i.lower);
    match g {
        Gamma::State(f) => formula_intervals_ok(f),
        Gamma::Not(a) => intervals_ok(a),
        Gamma::And(a, b) | Gamma::Or(a, b) | Gamma::Implies(a, b) => intervals_ok(a) && intervals_ok(b),
        Gamma::Until(_, a, i, b) | Gamma::Release(_, a, i, b) => ok(i) && intervals_ok(a) && intervals_ok(b),
        Gamma::Finally(_, i, a) | Gamma::Globally(_, i, a) => ok(i) && intervals_ok(a),
    }
}

fn formula_intervals_ok(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => true,
        Formula::Not(a) => formula_intervals_ok(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            formula_intervals_ok(a) && formula_intervals_ok(b)
        }
        Formula::Coalition(_, g) => intervals_ok(g),
    }
}

fn tgc_net(n: usize) -> Network {
    parse_model(&gen_tgc_model(n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn formula_print_parse_is_stable(f in formula()) {
        let first = parse_formula(&f.to_string()).unwrap();
        let second = parse_formula(&first.to_string()).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert!(formula_intervals_ok(&first));
        let d = first.desugar();
        prop_assert_eq!(d.desugar(), d.clone());
        prop_assert!(d.is_core());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn induced_distributions_sum_to_one(seed in any::<u64>(), states in 3usize..40, cfg in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes: [&[usize]; 3] = [&[2], &[3], &[2, 2]];
        let (mdp, space) = support::random_parametric(&mut rng, Shape { states, coalition: 0.5, jump: 0.2 }, sizes[cfg]);
        let before = mdp.dump();
        let plan = InducePlan::new(&mdp, &space).unwrap();
        let theta = support::random_theta(&mut rng, &space);
        let model = plan.induce(&theta).unwrap();
        for s in 0..mdp.num_states() {
            for choice in model.choices(s) {
                let total: f64 = choice.iter().map(|(w, _)| w).sum();
                prop_assert!((total - 1.0).abs() <= 1e-12, "state {} sums to {}", s, total);
            }
        }
        prop_assert_eq!(mdp.dump(), before);
    }

    #[test]
    fn horizon_monotone_and_modes_ordered(seed in any::<u64>(), n in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mdp = support::random_mdp(&mut rng, n);
        let model = pstctl::strategy::InducedModel::adversarial(&mdp);
        let s1 = support::random_set(&mut rng, n, 0.8);
        let s2 = support::random_set(&mut rng, n, 0.2);
        let vi = ViConfig::default();
        let mut prev = vec![0.0; n];
        for t in 0..6 {
            let i = TimeInterval::bounded(0, t);
            let lo = prob_until(&model, &s1, &s2, i, Mode::Min, &vi).unwrap();
            let hi = prob_until(&model, &s1, &s2, i, Mode::Max, &vi).unwrap();
            for s in 0..n {
                prop_assert!(lo.get(s) <= hi.get(s) + 1e-9);
                prop_assert!(hi.get(s) >= prev[s] - 1e-9);
            }
            prev = hi.raw().to_vec();
        }
    }

    #[test]
    fn grid_contains_every_corner(sizes in prop::collection::vec(1usize..4, 1..4), k in 1u32..6) {
        let blocks = sizes
            .iter()
            .enumerate()
            .map(|(l, &d)| pstctl::strategy::Block {
                agent: 0,
                location: l,
                agent_name: "C".into(),
                location_name: format!("l{l}"),
                actions: (0..d).map(|j| format!("a{j}")).collect(),
            })
            .collect();
        let space = StrategySpace::from_blocks(vec![0], blocks);
        let lattice: Vec<JointStrategyIrP> = grid(&space, k, 1_000_000).unwrap().collect();
        prop_assert_eq!(lattice.len() as u128, space.grid_count(k));
        let corners: Vec<_> = lattice.iter().filter_map(|t| t.as_irp()).collect();
        let irp: Vec<_> = enumerate_irp(&space, 1_000_000).unwrap().collect();
        prop_assert_eq!(corners.len(), irp.len());
        for s in &irp {
            prop_assert!(lattice.contains(&s.to_irp_distribution(&space)));
        }
    }

    #[test]
    fn argmax_ignores_positive_scaling(c in 0.01f64..100.0, t in 1u32..12) {
        let net = tgc_net(2);
        let mdp = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        let space = strategy_space(&net, &["C".to_string()]).unwrap();
        let plan = InducePlan::new(&mdp, &space).unwrap();
        let goal = labelled(&mdp, "passed_1", "passed_2");
        let all = vec![true; mdp.num_states()];
        let values: Vec<f64> = grid(&space, 10, 1_000).unwrap().map(|theta| {
            let model = plan.induce(&theta).unwrap();
            prob_until(&model, &all, &goal, TimeInterval::bounded(0, t), Mode::Min, &ViConfig::default()).unwrap().get(0) - 0.8
        }).collect();
        let argmax = |xs: &[f64]| -> Vec<usize> {
            let best = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..xs.len()).filter(|&i| xs[i] == best).collect()
        };
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        prop_assert_eq!(argmax(&values), argmax(&scaled));
    }
}

fn labelled(mdp: &DigitalMdp, a: &str, b: &str) -> Vec<bool> {
    let (a, b) = (mdp.proposition_index(a).unwrap(), mdp.proposition_index(b).unwrap());
    (0..mdp.num_states()).map(|s| mdp.labels(s).contains(&a) && mdp.labels(s).contains(&b)).collect()
}

#[test]
fn tgc_generates_valid_models() {
    for n in 1..=32 {
        let text = gen_tgc_model(n);
        assert_eq!(text, gen_tgc_model(n));
        let net = parse_model(&text).unwrap();
        assert!(net.validate().is_empty(), "n={n}: {:?}", net.validate());
        let durations: Vec<u32> = (1..=n).map(|i| net.max_constants()[&format!("x_{i}")]).collect();
        assert_eq!(durations, (1..=n as u32).rev().collect::<Vec<_>>());
    }
}

#[test]
fn validation_is_deterministic_and_constants_total() {
    for (name, text) in support::corpus() {
        let net = parse_model(&text).unwrap();
        assert_eq!(net.validate(), net.validate(), "{name}");
        let caps = net.max_constants();
        for agent in &net.agents {
            for c in &agent.clocks {
                assert!(caps.contains_key(c), "{name}: clock {c} has no constant");
            }
            for loc in &agent.locations {
                for e in &loc.edges {
                    let total: BigRational = e.branches.iter().map(|b| b.probability.clone()).sum();
                    assert_eq!(total, BigRational::from_integer(1.into()), "{name}");
                }
            }
        }
    }
}

#[test]
fn digitize_is_deterministic() {
    for (name, text) in support::corpus() {
        let net = parse_model(&text).unwrap();
        let a = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        let b = digitize(&parse_model(&print_model(&net)).unwrap(), DEFAULT_STATE_CAP).unwrap();
        assert_eq!(a.dump(), b.dump(), "{name}");
    }
}

#[test]
fn ticks_advance_every_clock_by_one() {
    for (name, text) in support::corpus() {
        let net = parse_model(&text).unwrap();
        let caps = net.max_constants();
        let clocks: Vec<&String> = net.agents.iter().flat_map(|a| &a.clocks).collect();
        let mdp = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        for s in 0..mdp.num_states() {
            for m in mdp.moves(s) {
                if !m.is_tick() {
                    continue;
                }
                for (t, p) in mdp.transitions(m) {
                    assert_eq!(p, 1.0, "{name}");
                    assert_eq!(mdp.state(t).locations, mdp.state(s).locations);
                    for (c, name_c) in clocks.iter().enumerate() {
                        let v = mdp.state(s).valuation[c];
                        assert_eq!(mdp.state(t).valuation[c], (v + 1).min(caps[*name_c] + 1), "{name}");
                    }
                }
            }
        }
    }
}

/// Adds an unreachable location whose guard raises the cap of `clock` by 5.
fn with_raised_cap(net: &Network, agent: usize, clock: &str) -> Network {
    let mut out = net.clone();
    let k = net.max_constants()[clock] + 5;
    let mut probe = Location::new("cap_probe");
    probe.protocol.push("cap_probe".into());
    probe.edges.push(Edge {
        action: "cap_probe".into(),
        guard: ClockConstraint::new(vec![ClockAtom::new(clock, Comparator::Ge, k)]),
        branches: vec![Branch {
            probability: BigRational::from_integer(1.into()),
            resets: vec![],
            target: "cap_probe".into(),
        }],
    });
    out.agents[agent].locations.push(probe);
    out
}

/// Moves of a state as `(kind, sorted (quotient target, probability))`.
fn signature(mdp: &DigitalMdp, s: usize, quotient: &impl Fn(usize) -> (Vec<usize>, Vec<u32>)) -> BTreeSet<String> {
    mdp.moves(s)
        .iter()
        .map(|m| {
            let kind = match &m.kind {
                MoveKind::Tick => "tick".to_string(),
                MoveKind::Act { action, .. } => mdp.actions()[*action].clone(),
                MoveKind::Stall => "stall".to_string(),
            };
            let mut targets: Vec<String> = mdp
                .exact_transitions(m)
                .map(|(t, p)| format!("{:?}@{p}", quotient(t)))
                .collect();
            targets.sort();
            format!("{kind} {}", targets.join(" "))
        })
        .collect()
}

#[test]
fn raising_the_cap_is_a_bisimulation() {
    for (name, text) in support::corpus() {
        let net = parse_model(&text).unwrap();
        let caps = net.max_constants();
        let clocks: Vec<String> = net.agents.iter().flat_map(|a| a.clocks.clone()).collect();
        let Some((agent, clock)) = net
            .agents
            .iter()
            .enumerate()
            .find_map(|(i, a)| a.clocks.first().map(|c| (i, c.clone())))
        else {
            continue;
        };
        let small = digitize(&net, DEFAULT_STATE_CAP).unwrap();
        let big = digitize(&with_raised_cap(&net, agent, &clock), DEFAULT_STATE_CAP).unwrap();
        let project_big = |s: usize| {
            let st = big.state(s);
            let v = st
                .valuation
                .iter()
                .zip(&clocks)
                .map(|(v, c)| (*v).min(caps[c] + 1))
                .collect();
            (st.locations.clone(), v)
        };
        let project_small = |s: usize| (small.state(s).locations.clone(), small.state(s).valuation.clone());
        let index: std::collections::HashMap<_, _> = (0..small.num_states()).map(|s| (project_small(s), s)).collect();
        for s in 0..big.num_states() {
            let t = index[&project_big(s)];
            assert_eq!(
                signature(&big, s, &project_big),
                signature(&small, t, &project_small),
                "{name}: state {s}"
            );
        }
        assert!(big.num_states() >= small.num_states(), "{name}");
    }
}

#[test]
fn point_strategy_induces_the_pruned_model() {
    let net = tgc_net(3);
    let mdp = digitize(&net, DEFAULT_STATE_CAP).unwrap();
    let space = strategy_space(&net, &["C".to_string()]).unwrap();
    let plan = InducePlan::new(&mdp, &space).unwrap();
    for irp in enumerate_irp(&space, 1_000).unwrap() {
        let model = plan.induce(&irp.to_irp_distribution(&space)).unwrap();
        for s in 0..mdp.num_states() {
            let kept: BTreeSet<usize> = model
                .choices(s)
                .into_iter()
                .flatten()
                .filter(|(w, _)| *w > 0.0)
                .flat_map(|(_, v)| v)
                .collect();
            let pruned: BTreeSet<usize> = mdp
                .move_range(s)
                .filter(|&id| match &mdp.move_by_id(id).kind {
                    MoveKind::Act { action, participants } => participants.iter().all(|p| {
                        match space.block_index(p.agent, p.location) {
                            Some(b) => space.blocks()[b].actions[irp.choice[b]] == mdp.actions()[*action],
                            None => true,
                        }
                    }),
                    _ => true,
                })
                .collect();
            assert_eq!(kept, pruned, "state {s} under {:?}", irp.choice);
        }
    }
}
