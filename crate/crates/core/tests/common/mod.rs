//! Shared test fixtures: small random STRIPS tasks and a brute-force solver
//! that only uses the lifted interpreter.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vgdl2pddl::pddl::{apply_lifted, eval_formula, read_domain, read_problem, Binding, Domain, LiftedState, Problem};

const PREDICATES: [(&str, usize); 5] = [("p0", 1), ("p1", 1), ("r0", 2), ("f0", 0), ("f1", 0)];
const OBJECTS: [&str; 2] = ["o0", "o1"];

fn atom(rng: &mut ChaCha8Rng, params: &[&str]) -> String {
    let (p, arity) = PREDICATES[rng.gen_range(0..PREDICATES.len())];
    let args: Vec<&str> = (0..arity).map(|_| params[rng.gen_range(0..params.len())]).collect();
    if args.is_empty() {
        format!("({p})")
    } else {
        format!("({p} {})", args.join(" "))
    }
}

fn literal(rng: &mut ChaCha8Rng, params: &[&str]) -> String {
    let a = atom(rng, params);
    if rng.gen_bool(0.3) {
        format!("(not {a})")
    } else {
        a
    }
}

/// A random domain/problem pair with at most 2^10 reachable states.
pub fn random_task_text(seed: u64) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = String::from(
        "(define (domain rnd)\n  (:requirements :strips :typing :negative-preconditions)\n  (:types obj)\n  (:predicates (p0 ?a - obj) (p1 ?a - obj) (r0 ?a ?b - obj) (f0) (f1))\n",
    );
    for i in 0..rng.gen_range(3..7) {
        let params: &[&str] = if rng.gen_bool(0.5) { &["?a"] } else { &["?a", "?b"] };
        let pre: Vec<String> = (0..rng.gen_range(0..3)).map(|_| literal(&mut rng, params)).collect();
        let eff: Vec<String> = (0..rng.gen_range(1..3))
            .map(|_| {
                let a = atom(&mut rng, params);
                if rng.gen_bool(0.3) {
                    format!("(not {a})")
                } else {
                    a
                }
            })
            .collect();
        d.push_str(&format!(
            "  (:action act{i}\n    :parameters ({} - obj)\n    :precondition (and {})\n    :effect (and {}))\n",
            params.join(" "),
            pre.join(" "),
            eff.join(" ")
        ));
    }
    d.push_str(")\n");

    let mut init = Vec::new();
    for (p, arity) in PREDICATES {
        let tuples: Vec<Vec<&str>> = match arity {
            0 => vec![vec![]],
            1 => OBJECTS.iter().map(|o| vec![*o]).collect(),
            _ => OBJECTS.iter().flat_map(|a| OBJECTS.iter().map(move |b| vec![*a, *b])).collect(),
        };
        for t in tuples {
            if rng.gen_bool(0.2) {
                init.push(if t.is_empty() {
                    format!("({p})")
                } else {
                    format!("({p} {})", t.join(" "))
                });
            }
        }
    }
    let problem = |goal: &[String]| {
        format!(
            "(define (problem rnd-{seed})\n  (:domain rnd)\n  (:objects o0 o1 - obj)\n  (:init {})\n  (:goal (and {})))\n",
            init.join(" "),
            goal.join(" ")
        )
    };
    // Mostly aim for facts a random walk reaches; sometimes pick blindly so
    // that unreachable goals occur too.
    let mut goal: Vec<String> = (0..rng.gen_range(1..3)).map(|_| atom(&mut rng, &OBJECTS)).collect();
    if rng.gen_bool(0.85) {
        let domain = read_domain(&d).unwrap();
        let start = LiftedState::new(&domain, &read_problem(&problem(&goal)).unwrap());
        let mut st = start.clone();
        for _ in 0..rng.gen_range(3..12) {
            let moves = naive_applicable(&domain, &st);
            if moves.is_empty() {
                break;
            }
            let (name, args) = &moves[rng.gen_range(0..moves.len())];
            st = apply_lifted(&domain, &st, domain.action(name).unwrap(), args).unwrap();
        }
        let new: Vec<String> = st.facts.difference(&start.facts).map(|a| a.to_string()).collect();
        if !new.is_empty() {
            goal = new.into_iter().take(3).collect();
        }
    }
    let p = problem(&goal);
    (d, p)
}

pub fn random_task(seed: u64) -> (Domain, Problem) {
    let (d, p) = random_task_text(seed);
    (read_domain(&d).unwrap(), read_problem(&p).unwrap())
}

/// Every (action, args) applicable in `st`, by brute force over typed tuples.
pub fn naive_applicable(domain: &Domain, st: &LiftedState) -> Vec<(String, Vec<String>)> {
    let mut out = Vec::new();
    for a in &domain.actions {
        let pools: Vec<Vec<String>> = a
            .params
            .iter()
            .map(|p| st.objects_of(domain, &p.ty).map(str::to_string).collect())
            .collect();
        let mut tuples: Vec<Vec<String>> = vec![vec![]];
        for pool in &pools {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    pool.iter().map(move |o| {
                        let mut t = t.clone();
                        t.push(o.clone());
                        t
                    })
                })
                .collect();
        }
        for args in tuples {
            let b: Binding = a.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
            if eval_formula(domain, st, &a.precondition, &b).unwrap() {
                out.push((a.name.clone(), args));
            }
        }
    }
    out
}

/// Length of a shortest plan, found by breadth-first search over the lifted
/// interpreter. None when the goal is unreachable.
pub fn naive_shortest(domain: &Domain, problem: &Problem) -> Option<usize> {
    let start = LiftedState::new(domain, problem);
    let goal = |st: &LiftedState| eval_formula(domain, st, &problem.goal, &HashMap::new()).unwrap();
    let mut seen: BTreeSet<BTreeSet<_>> = BTreeSet::new();
    seen.insert(start.facts.clone());
    let mut queue = VecDeque::from([(start, 0)]);
    while let Some((st, depth)) = queue.pop_front() {
        if goal(&st) {
            return Some(depth);
        }
        for (name, args) in naive_applicable(domain, &st) {
            let a = domain.action(&name).unwrap();
            let next = apply_lifted(domain, &st, a, &args).unwrap();
            if seen.insert(next.facts.clone()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    None
}

use vgdl2pddl::agent::{fluent_init, is_avatar_action, project_state};
use vgdl2pddl::compiler::projectile_object;
use vgdl2pddl::engine::{AvatarAction, Engine, Status};
use vgdl2pddl::games::Game;
use vgdl2pddl::pddl::GroundedTask;
use vgdl2pddl::planner::{solve, validate, SearchConfig, SearchMode};
use vgdl2pddl::vgdl::LevelGrid;

/// Plays the planner's plan for a level in the engine and checks, turn by
/// turn, that the engine's events are applicable ground actions and that the
/// planning state matches the problem regenerated from the engine. Returns
/// the number of turns played.
pub fn bisimulate(g: &Game, level: usize, mode: SearchMode) -> Result<usize, String> {
    let tag = format!("{} level{level} {mode}", g.name);
    let grid = g.level(level).map_err(|e| format!("{tag}: {e}"))?;
    let problem = g.level_problem(&grid).map_err(|e| format!("{tag}: {e}"))?;
    let task = g.task(&problem).map_err(|e| format!("{tag}: {e}"))?;
    let cfg = SearchConfig {
        mode,
        ..SearchConfig::default()
    };
    let plan = solve(&task, &cfg).plan.ok_or(format!("{tag}: no plan"))?;
    let reserve: Vec<String> = g.config.projectile.iter().map(|p| projectile_object(p)).collect();

    let mut engine = Engine::new(&g.model, 0);
    let mut state = engine.load(&grid).map_err(|e| format!("{tag}: {e}"))?;
    let mut trace = Vec::new();
    let mut planning = task.init.clone();
    for step in plan.iter().filter(|s| is_avatar_action(s)) {
        if state.status != Status::Ongoing {
            return Err(format!("{tag}: game ended before the plan did"));
        }
        let a = AvatarAction::from_pddl(&step.name).ok_or(format!("{tag}: {step} is not an avatar action"))?;
        let events = engine.step(&mut state, a).map_err(|e| format!("{tag}: {e}"))?;
        for e in &events {
            if !e.modelled {
                return Err(format!("{tag}: unmodelled event {e}"));
            }
            let i = task
                .find_action(&e.step.name, &e.step.args)
                .ok_or(format!("{tag}: {e} is not a ground action"))?;
            if !task.actions[i].applicable(&planning) {
                return Err(format!("{tag}: {e} not applicable"));
            }
            planning = task.actions[i].successor(&planning);
        }
        if events.last().map(|e| e.step.name.as_str()) != Some("END-TURN-SPRITES") {
            return Err(format!("{tag}: turn {} did not end with END-TURN-SPRITES", state.turn()));
        }
        trace.extend(events);

        let regenerated = g.problem(&state.snapshot).map_err(|e| format!("{tag}: {e}"))?;
        if let Some(atom) = regenerated
            .init
            .iter()
            .find(|a| task.fact_id(a).is_none() && !task.static_facts.contains(a))
        {
            return Err(format!("{tag}: {atom} is unknown to the task"));
        }
        let ours = project_state(&task, &planning, &reserve);
        let theirs = fluent_init(&task, &regenerated.init);
        if ours != theirs {
            let extra: Vec<String> = ours.difference(&theirs).map(|a| a.to_string()).collect();
            let missing: Vec<String> = theirs.difference(&ours).map(|a| a.to_string()).collect();
            return Err(format!(
                "{tag}: turn {}: planner has {extra:?}, engine has {missing:?}",
                state.turn()
            ));
        }
    }
    if state.status != Status::Win {
        return Err(format!("{tag}: plan played out without a win"));
    }
    let steps: Vec<_> = trace.iter().map(|e| e.step.clone()).collect();
    let v = validate(&task, &steps);
    if !v.valid {
        return Err(format!("{tag}: engine trace fails as a plan at step {:?}", v.failure));
    }
    Ok(state.turn())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    Avatar,
    Interactions,
    /// Moving the k-th missile type; k = number of types means all stopped.
    Sprites(usize),
}

/// Explores every state reachable in the grounded task for `grid` and checks
/// that each applicable action fits the turn order: one avatar action, then
/// interactions, END-TURN-INTERACTIONS, each missile type's moves closed by
/// its STOP action, and END-TURN-SPRITES. Returns the number of
/// (state, phase) pairs visited.
pub fn check_turn_structure(g: &Game, grid: &LevelGrid) -> Result<usize, String> {
    let problem = g.level_problem(grid).map_err(|e| e.to_string())?;
    let task: GroundedTask = g.task(&problem).map_err(|e| e.to_string())?;
    let stops: Vec<String> = g
        .domain
        .actions
        .iter()
        .filter_map(|a| a.name.strip_prefix("STOP_")?.strip_suffix("_MOVE").map(str::to_string))
        .collect();
    let sprite_type = |name: &str| {
        stops
            .iter()
            .position(|t| name.starts_with(&format!("{t}_MOVE_")) || name.starts_with(&format!("{t}_LEAVE_")))
    };
    let next = |phase: Phase, name: &str| -> Option<Phase> {
        let avatar = name.starts_with("AVATAR_ACTION_");
        match phase {
            Phase::Avatar => avatar.then_some(Phase::Interactions),
            _ if avatar => None,
            Phase::Interactions if name == "END-TURN-INTERACTIONS" => Some(Phase::Sprites(0)),
            Phase::Interactions => {
                let phase_action = name.starts_with("END-TURN-") || name.starts_with("STOP_") || sprite_type(name).is_some();
                (!phase_action).then_some(Phase::Interactions)
            }
            Phase::Sprites(k) if k == stops.len() => (name == "END-TURN-SPRITES").then_some(Phase::Avatar),
            Phase::Sprites(k) if name == format!("STOP_{}_MOVE", stops[k]) => Some(Phase::Sprites(k + 1)),
            Phase::Sprites(k) => (sprite_type(name) == Some(k)).then_some(Phase::Sprites(k)),
        }
    };
    let start = (task.init.clone(), Phase::Avatar);
    let mut seen = std::collections::HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, Vec::<String>::new())]);
    while let Some(((s, phase), prefix)) = queue.pop_front() {
        for a in task.actions.iter().filter(|a| a.applicable(&s)) {
            let Some(p) = next(phase, &a.name) else {
                return Err(format!("{a} applicable in phase {phase:?} after {prefix:?}"));
            };
            let key = (a.successor(&s), p);
            if seen.insert(key.clone()) {
                let mut longer = prefix.clone();
                if longer.len() < 12 {
                    longer.push(a.to_string());
                }
                queue.push_back((key, longer));
            }
        }
    }
    Ok(seen.len())
}
