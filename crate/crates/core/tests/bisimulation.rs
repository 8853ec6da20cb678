//! The engine and the compiled domain must agree: playing a plan's avatar
//! actions in the engine produces a trace that is itself a valid plan, and
//! after every turn the planner's state matches the problem regenerated from
//! the engine's snapshot.

mod common;

use vgdl2pddl::engine::Engine;
use vgdl2pddl::games::{builtin_games_dir, Game};
use vgdl2pddl::planner::SearchMode;

const DETERMINISTIC: [&str; 5] = ["sokoban", "zenpuzzle", "treasure", "shooter", "survive"];

#[test]
fn engine_traces_are_valid_plans() {
    for name in DETERMINISTIC {
        let g = Game::load(&builtin_games_dir().join(name)).unwrap();
        for level in 0..g.level_paths().len() {
            for mode in [SearchMode::BlindBfs, SearchMode::GbfsHadd] {
                common::bisimulate(&g, level, mode).unwrap();
            }
        }
    }
}

#[test]
fn loading_a_level_is_the_generated_initial_state() {
    for name in DETERMINISTIC {
        let g = Game::load(&builtin_games_dir().join(name)).unwrap();
        for level in 0..g.level_paths().len() {
            let grid = g.level(level).unwrap();
            let state = Engine::new(&g.model, 0).load(&grid).unwrap();
            assert_eq!(
                g.problem(&state.snapshot).unwrap(),
                g.level_problem(&grid).unwrap(),
                "{name} level{level}"
            );
        }
    }
}

#[test]
fn turn_order_holds_in_every_reachable_state() {
    for (name, level) in [("bombers", "a r\n b \n p \n"), ("survive", "r r\n w \nA  \n"), ("treasure", "Ag\n e\n")] {
        let g = Game::load(&builtin_games_dir().join(name)).unwrap();
        let grid = vgdl2pddl::vgdl::parse_ldf(level, &g.model).unwrap();
        let n = common::check_turn_structure(&g, &grid).unwrap();
        assert!(n > 10, "{name}: only {n} states");
    }
}
