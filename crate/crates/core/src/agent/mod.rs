//! Plan, act, monitor, replan.
//!
//! The agent turns the current game state into a problem, plans, and sends
//! the plan's avatar actions to the engine one by one. Before each one it
//! re-checks the action's preconditions against a problem regenerated from
//! the live state; on a violation the rest of the plan is dropped and a new
//! one is computed from where the game actually is.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use log::info;

use crate::engine::{AvatarAction, Engine, Event, GameState, Status};
use crate::games::Game;
use crate::pddl::{apply_lifted, print_domain, print_problem, violated_conjuncts, Atom, LiftedState, PlanStep, State};
use crate::pddl::GroundedTask;
use crate::planner::{external_solve, solve, PlanResult, SearchConfig};
use crate::problem::Snapshot;
use crate::vgdl::LevelGrid;

pub const DEFAULT_TURN_BUDGET: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlannerChoice {
    Builtin(SearchConfig),
    /// Command template with `{domain}`, `{problem}` and optionally `{plan}`.
    External { command: String, time_limit: Duration },
}

impl Default for PlannerChoice {
    fn default() -> Self {
        PlannerChoice::Builtin(SearchConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub planner: PlannerChoice,
    pub seed: u64,
    pub turn_budget: usize,
    pub bomber_probability: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            planner: PlannerChoice::default(),
            seed: 0,
            turn_budget: DEFAULT_TURN_BUDGET,
            bomber_probability: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Win,
    Lose,
    PlannerFailed,
    TurnBudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorFailure {
    pub turn: usize,
    /// The state the turn was about to be played in.
    pub snapshot: Snapshot,
    /// The rejected turn, avatar action first.
    pub planned: Vec<PlanStep>,
    /// Index into `planned` of the step that no longer applies.
    pub step: usize,
    pub violated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub outcome: Outcome,
    pub turns: usize,
    pub replans: usize,
    pub plan_lengths: Vec<usize>,
    pub wall_times: Vec<Duration>,
    /// Turns played, avatar action first, with the state they started in.
    pub issued: Vec<(Snapshot, Vec<PlanStep>)>,
    pub failures: Vec<MonitorFailure>,
    pub trace: Vec<Event>,
    /// Where the game stood when the episode ended.
    pub final_snapshot: Option<Snapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonitorResult {
    Ok,
    /// Index of the failing step and its false preconditions.
    Violated(usize, Vec<String>),
}

/// True for actions the avatar itself performs.
pub fn is_avatar_action(step: &PlanStep) -> bool {
    step.name.to_ascii_uppercase().starts_with("AVATAR_ACTION_")
}

/// Replays one planned turn — an avatar action and the interaction and
/// sprite steps the plan expects to follow it — in the problem generated
/// from `snap`. Reports the first step whose preconditions no longer hold.
pub fn monitor(game: &Game, snap: &Snapshot, turn: &[PlanStep]) -> MonitorResult {
    let problem = match game.problem(snap) {
        Ok(p) => p,
        Err(e) => return MonitorResult::Violated(0, vec![e.to_string()]),
    };
    let mut st = LiftedState::new(&game.domain, &problem);
    for (i, step) in turn.iter().enumerate() {
        let Some(action) = game.domain.action(&step.name) else {
            return MonitorResult::Violated(i, vec![format!("unknown action {}", step.name)]);
        };
        let violated = match violated_conjuncts(&game.domain, &st, action, &step.args) {
            Ok(v) => v,
            Err(e) => vec![e.to_string()],
        };
        if !violated.is_empty() {
            return MonitorResult::Violated(i, violated);
        }
        match apply_lifted(&game.domain, &st, action, &step.args) {
            Ok(next) => st = next,
            Err(e) => return MonitorResult::Violated(i, vec![e.to_string()]),
        }
    }
    MonitorResult::Ok
}

/// Splits a plan into turns, each starting at an avatar action. Steps before
/// the first avatar action (there are none in plans from a turn start) are
/// dropped.
pub fn split_turns(plan: &[PlanStep]) -> Vec<&[PlanStep]> {
    let starts: Vec<usize> = (0..plan.len()).filter(|&i| is_avatar_action(&plan[i])).collect();
    starts
        .iter()
        .enumerate()
        .map(|(k, &s)| &plan[s..starts.get(k + 1).copied().unwrap_or(plan.len())])
        .collect()
}

fn scratch_dir() -> PathBuf {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static N: AtomicUsize = AtomicUsize::new(0);
    std::env::temp_dir().join(format!(
        "vgdl2pddl-agent-{}-{}",
        std::process::id(),
        N.fetch_add(1, Ordering::Relaxed)
    ))
}

/// Runs the chosen planner on a problem for `game`.
pub fn plan_for(game: &Game, snap: &Snapshot, planner: &PlannerChoice) -> Option<PlanResult> {
    let problem = game.problem(snap).ok()?;
    let task = game.task(&problem).ok()?;
    match planner {
        PlannerChoice::Builtin(cfg) => Some(solve(&task, cfg)),
        PlannerChoice::External { command, time_limit } => {
            let dir = scratch_dir();
            std::fs::create_dir_all(&dir).ok()?;
            let (d, p) = (dir.join("domain.pddl"), dir.join("problem.pddl"));
            std::fs::write(&d, print_domain(&game.domain)).ok()?;
            std::fs::write(&p, print_problem(&problem)).ok()?;
            let r = external_solve(&d, &p, command, *time_limit, &task);
            let _ = std::fs::remove_dir_all(&dir);
            match r {
                Ok(r) => Some(r),
                Err(e) => {
                    info!("external planner failed: {e}");
                    None
                }
            }
        }
    }
}

/// Plays one level to the end (or the turn budget).
pub fn run_episode(game: &Game, grid: &LevelGrid, cfg: &EpisodeConfig) -> EpisodeResult {
    let mut engine = Engine::new(&game.model, cfg.seed);
    engine.bomber_probability = cfg.bomber_probability;
    let mut res = EpisodeResult {
        outcome: Outcome::PlannerFailed,
        turns: 0,
        replans: 0,
        plan_lengths: Vec::new(),
        wall_times: Vec::new(),
        issued: Vec::new(),
        failures: Vec::new(),
        trace: Vec::new(),
        final_snapshot: None,
    };
    let mut state = match engine.load(grid) {
        Ok(s) => s,
        Err(_) => return res,
    };
    let finish = |mut res: EpisodeResult, state: &GameState, outcome| {
        res.turns = state.turn();
        res.final_snapshot = Some(state.snapshot.clone());
        res.outcome = match state.status {
            Status::Win => Outcome::Win,
            Status::Lose => Outcome::Lose,
            Status::Ongoing => outcome,
        };
        res
    };
    loop {
        if state.status != Status::Ongoing {
            return finish(res, &state, Outcome::Win);
        }
        let start = Instant::now();
        let planned = plan_for(game, &state.snapshot, &cfg.planner);
        res.wall_times.push(start.elapsed());
        let Some(plan) = planned.filter(|r| r.solved()).and_then(|r| r.plan) else {
            return finish(res, &state, Outcome::PlannerFailed);
        };
        if !res.plan_lengths.is_empty() {
            res.replans += 1;
        }
        res.plan_lengths.push(plan.len());
        let turns = split_turns(&plan);
        if turns.is_empty() {
            // The model says the goal already holds but the game goes on.
            return finish(res, &state, Outcome::PlannerFailed);
        }
        for turn in turns {
            if state.turn() >= cfg.turn_budget {
                return finish(res, &state, Outcome::TurnBudgetExhausted);
            }
            if let MonitorResult::Violated(i, v) = monitor(game, &state.snapshot, turn) {
                info!("turn {}: {} no longer applicable: {v:?}", state.turn(), turn[i]);
                res.failures.push(MonitorFailure {
                    turn: state.turn(),
                    snapshot: state.snapshot.clone(),
                    planned: turn.to_vec(),
                    step: i,
                    violated: v,
                });
                break;
            }
            let Some(a) = AvatarAction::from_pddl(&turn[0].name) else {
                return finish(res, &state, Outcome::PlannerFailed);
            };
            res.issued.push((state.snapshot.clone(), turn.to_vec()));
            match engine.step(&mut state, a) {
                Ok(ev) => res.trace.extend(ev),
                Err(_) => return finish(res, &state, Outcome::PlannerFailed),
            }
            if state.status != Status::Ongoing {
                return finish(res, &state, Outcome::Win);
            }
        }
    }
}

/// Facts of a planning state at a turn boundary, dropping everything about
/// dead objects except the `dead` mark of reserve projectiles, and keeping
/// only facts the problem generator would also produce.
pub fn project_state(task: &GroundedTask, s: &State, reserve: &[String]) -> BTreeSet<Atom> {
    let atoms = task.state_atoms(s);
    let dead: BTreeSet<String> = atoms
        .iter()
        .filter(|a| a.predicate == "dead")
        .map(|a| a.args[0].to_string())
        .collect();
    atoms
        .into_iter()
        .filter(|a| {
            if a.predicate == "dead" {
                return reserve.contains(&a.args[0].to_string());
            }
            !a.args.iter().any(|t| dead.contains(t.as_str()))
        })
        .collect()
}

/// The fluent part of a generated problem's init, as seen by `task`.
pub fn fluent_init(task: &GroundedTask, init: &[Atom]) -> BTreeSet<Atom> {
    init.iter().filter(|a| task.fact_id(a).is_some()).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::builtin_games_dir;
    use crate::pddl::Formula;
    use crate::vgdl::parse_ldf;

    fn game(name: &str) -> Game {
        Game::load(&builtin_games_dir().join(name)).unwrap()
    }

    #[test]
    fn sokoban_is_won_without_replanning() {
        let g = game("sokoban");
        let r = run_episode(&g, &g.level(0).unwrap(), &EpisodeConfig::default());
        assert_eq!(r.outcome, Outcome::Win);
        assert_eq!(r.replans, 0);
        assert!(r.failures.is_empty());
        assert_eq!(r.plan_lengths.len(), 1);
        assert_eq!(r.turns, r.issued.len());
    }

    #[test]
    fn walled_off_avatar_gives_up() {
        let g = game("sokoban");
        let grid = parse_ldf("wwwwww\nwAwbhw\nwwwwww\n", &g.model).unwrap();
        let r = run_episode(&g, &grid, &EpisodeConfig::default());
        assert_eq!(r.outcome, Outcome::PlannerFailed);
        assert!(r.issued.is_empty());
        assert_eq!(r.turns, 0);
    }

    #[test]
    fn turn_budget_stops_the_episode() {
        let g = game("sokoban");
        let cfg = EpisodeConfig {
            turn_budget: 3,
            ..EpisodeConfig::default()
        };
        let r = run_episode(&g, &g.level(0).unwrap(), &cfg);
        assert_eq!(r.outcome, Outcome::TurnBudgetExhausted);
        assert_eq!(r.turns, 3);
    }

    #[test]
    fn monitor_accepts_the_first_planned_turn() {
        let g = game("sokoban");
        let snap = Snapshot::from_grid(&g.level(0).unwrap(), &g.model).unwrap();
        let plan = plan_for(&g, &snap, &PlannerChoice::default()).unwrap().plan.unwrap();
        let turns = split_turns(&plan);
        assert_eq!(turns.iter().map(|t| t.len()).sum::<usize>(), plan.len());
        assert!(turns.iter().all(|t| is_avatar_action(&t[0])));
        assert_eq!(monitor(&g, &snap, turns[0]), MonitorResult::Ok);
        // The second turn starts from somewhere else.
        assert!(matches!(monitor(&g, &snap, turns[1]), MonitorResult::Violated(0, _)));
        let bogus = PlanStep::new("NO_SUCH_ACTION", vec![]);
        let mut broken = turns[0].to_vec();
        broken.insert(1, bogus);
        assert!(matches!(monitor(&g, &snap, &broken), MonitorResult::Violated(1, _)));
    }

    #[test]
    fn flipping_one_fact_is_reported_as_that_conjunct() {
        // For every applicable action in the first state, falsify each
        // atomic precondition in turn; the violation list must name it.
        let g = game("sokoban");
        let snap = Snapshot::from_grid(&g.level(0).unwrap(), &g.model).unwrap();
        let problem = g.problem(&snap).unwrap();
        let task = g.task(&problem).unwrap();
        let base = LiftedState::new(&g.domain, &problem);
        let mut checked = 0;
        for a in task.actions.iter().filter(|a| a.applicable(&task.init)) {
            let def = g.domain.action(&a.name).unwrap();
            assert!(violated_conjuncts(&g.domain, &base, def, &a.args).unwrap().is_empty());
            let b = base.bind(&g.domain, def, &a.args).unwrap();
            for c in def.precondition.conjuncts() {
                let mut st = base.clone();
                let (atom, positive) = match c {
                    Formula::Atom(at) => (at, true),
                    Formula::Not(inner) => match inner.as_ref() {
                        Formula::Atom(at) => (at, false),
                        _ => continue,
                    },
                    _ => continue,
                };
                let ground = crate::pddl::ground_atom(atom, &b).unwrap();
                if positive {
                    st.facts.remove(&ground);
                } else {
                    st.facts.insert(ground.clone());
                }
                let v = violated_conjuncts(&g.domain, &st, def, &a.args).unwrap();
                let expect = crate::pddl::substitute(c, &b).to_string();
                assert!(v.contains(&expect), "{} {:?}: {v:?}", a.name, a.args);
                let shown = ground.to_string();
                assert!(v.iter().all(|s| s.contains(&shown)), "{v:?} vs {shown}");
                checked += 1;
            }
        }
        assert!(checked > 5);
    }

    #[test]
    fn stochastic_failures_trigger_replanning() {
        let g = game("invaders");
        let grid = g.level(0).unwrap();
        let mut saw_failure = false;
        for seed in 0..6 {
            let cfg = EpisodeConfig {
                seed,
                bomber_probability: 0.8,
                turn_budget: 300,
                ..EpisodeConfig::default()
            };
            let r = run_episode(&g, &grid, &cfg);
            assert_eq!(r.plan_lengths.len(), r.replans + 1, "seed {seed}");
            assert_eq!(r.turns, r.issued.len(), "seed {seed}");
            for f in &r.failures {
                saw_failure = true;
                for (_, t) in r.issued.iter().filter(|(s, _)| s == &f.snapshot) {
                    assert_ne!(t, &f.planned, "seed {seed}: rejected turn was played anyway");
                    if f.step == 0 {
                        assert_ne!(t[0], f.planned[0], "seed {seed}: rejected action issued again");
                    }
                }
            }
            // Each replan answers exactly one monitor failure.
            assert_eq!(r.replans, r.failures.len(), "seed {seed}");
        }
        assert!(saw_failure, "no seed exercised the monitor");
    }

    #[test]
    fn projection_matches_the_generated_initial_state() {
        for name in ["sokoban", "shooter", "survive", "treasure"] {
            let g = game(name);
            let problem = g.level_problem(&g.level(0).unwrap()).unwrap();
            let task = g.task(&problem).unwrap();
            let reserve: Vec<String> = g.config.projectile.iter().map(|p| crate::compiler::projectile_object(p)).collect();
            assert_eq!(
                project_state(&task, &task.init, &reserve),
                fluent_init(&task, &problem.init),
                "{name}"
            );
        }
    }
}
