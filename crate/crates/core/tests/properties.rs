mod common;

use std::collections::{BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{naive_applicable, naive_shortest, random_task, random_task_text};
use vgdl2pddl::games::{builtin_games_dir, Game};
use vgdl2pddl::pddl::{apply_lifted, ground, print_domain, print_problem, read_domain, read_problem, GroundOptions, LiftedState};
use vgdl2pddl::planner::{solve, PlanStatus, SearchConfig, SearchMode};
use vgdl2pddl::vgdl::{parse_gdf, parse_ldf, print_gdf};

fn config(mode: SearchMode) -> SearchConfig {
    SearchConfig {
        mode,
        ..SearchConfig::default()
    }
}

/// A random but well-formed game description.
fn random_gdf(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let avatar = ["MovingAvatar", "FlakAvatar stype=shot", "ShootAvatar stype=shot"][rng.gen_range(0..3)];
    let classes = ["Immovable", "Passive", "Missile orientation=DOWN", "Missile orientation=LEFT", "Immovable color=RED"];
    let mut sprites = vec!["avatar".to_string(), "shot".to_string()];
    let mut set = format!("        avatar > {avatar}\n        shot > Missile orientation=UP\n");
    for i in 0..rng.gen_range(1..4) {
        let name = format!("thing{i}");
        set.push_str(&format!("        {name} > {}\n", classes[rng.gen_range(0..classes.len())]));
        sprites.push(name);
    }
    if rng.gen_bool(0.5) {
        set.push_str("        group > Missile\n            left > orientation=LEFT\n            right > orientation=RIGHT\n");
        sprites.extend(["left".to_string(), "right".to_string()]);
    }
    let mut mapping = String::new();
    for (i, s) in sprites.iter().enumerate() {
        let ch = if s == "avatar" { 'A' } else { (b'a' + i as u8) as char };
        mapping.push_str(&format!("        {ch} > {s}\n"));
    }
    let kinds = ["killSprite", "stepBack", "killBoth", "bounceForward", "killIfFromAbove"];
    let mut inter = String::new();
    for _ in 0..rng.gen_range(1..5) {
        let a = rng.gen_range(0..sprites.len());
        let b = (a + rng.gen_range(1..sprites.len())) % sprites.len();
        inter.push_str(&format!(
            "        {} {} > {}\n",
            sprites[a],
            sprites[b],
            kinds[rng.gen_range(0..kinds.len())]
        ));
    }
    let target = &sprites[rng.gen_range(2..sprites.len())];
    let mut term = format!("        SpriteCounter stype={target} limit=0 win=True\n");
    if rng.gen_bool(0.5) {
        term.push_str(&format!("        Timeout limit={} win=False\n", rng.gen_range(5..50)));
    }
    format!(
        "BasicGame\n    SpriteSet\n{set}    LevelMapping\n{mapping}    InteractionSet\n{inter}    TerminationSet\n{term}"
    )
}

/// A bordered Sokoban level with random inner walls; returns the text and
/// the number of avatar moves the grounder should keep.
fn random_sokoban(seed: u64) -> (String, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (rng.gen_range(4..8), rng.gen_range(4..8));
    let mut g = vec![vec!['w'; w]; h];
    let mut open = Vec::new();
    for (y, row) in g.iter_mut().enumerate().take(h - 1).skip(1) {
        for (x, c) in row.iter_mut().enumerate().take(w - 1).skip(1) {
            if rng.gen_bool(0.75) {
                *c = ' ';
                open.push((x, y));
            }
        }
    }
    while open.len() < 3 {
        let (x, y) = (rng.gen_range(1..w - 1), rng.gen_range(1..h - 1));
        if g[y][x] == 'w' {
            g[y][x] = ' ';
            open.push((x, y));
        }
    }
    let mut pick = |c: char| {
        let i = rng.gen_range(0..open.len());
        let (x, y) = open.swap_remove(i);
        g[y][x] = c;
        (x, y)
    };
    let start = pick('A');
    pick('b');
    pick('h');

    // Flood fill over non-wall cells: the relaxed reach of the avatar.
    let wall = |x: usize, y: usize| g[y][x] == 'w';
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut moves = 0;
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in [(0i32, -1i32), (0, 1), (-1, 0), (1, 0)] {
            let (nx, ny) = (x as i32 + dx, y as i32 + dy);
            if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 || wall(nx as usize, ny as usize) {
                continue;
            }
            moves += 1;
            let n = (nx as usize, ny as usize);
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    let text: String = g.iter().map(|r| r.iter().collect::<String>() + "\n").collect();
    (text, moves)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pddl_print_parse_round_trip(seed in any::<u64>()) {
        let (d, p) = random_task(seed);
        prop_assert_eq!(&read_domain(&print_domain(&d)).unwrap(), &d);
        prop_assert_eq!(&read_problem(&print_problem(&p)).unwrap(), &p);
        prop_assert_eq!(print_domain(&read_domain(&print_domain(&d)).unwrap()), print_domain(&d));
    }

    #[test]
    fn grounding_agrees_with_the_lifted_interpreter(seed in any::<u64>(), walk in any::<u64>()) {
        let (d, p) = random_task(seed);
        let task = ground(&d, &p, GroundOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(walk);
        let mut lifted = LiftedState::new(&d, &p);
        let mut s = task.init.clone();
        for _ in 0..10 {
            let mut expect: BTreeSet<String> = task.state_atoms(&s).iter().map(|a| a.to_string()).collect();
            expect.extend(task.static_facts.iter().map(|a| a.to_string()));
            let got: BTreeSet<String> = lifted.facts.iter().map(|a| a.to_string()).collect();
            prop_assert_eq!(got, expect);

            let naive: BTreeSet<(String, Vec<String>)> = naive_applicable(&d, &lifted).into_iter().collect();
            let grounded: BTreeSet<(String, Vec<String>)> = task
                .actions
                .iter()
                .filter(|a| a.applicable(&s))
                .map(|a| (a.name.clone(), a.args.clone()))
                .collect();
            prop_assert_eq!(&grounded, &naive);
            if naive.is_empty() {
                break;
            }
            let (name, args) = naive.iter().nth(rng.gen_range(0..naive.len())).unwrap().clone();
            lifted = apply_lifted(&d, &lifted, d.action(&name).unwrap(), &args).unwrap();
            let i = task.find_action(&name, &args).unwrap();
            s = task.actions[i].successor(&s);
        }
    }

    #[test]
    fn blind_search_is_optimal(seed in any::<u64>()) {
        let (d, p) = random_task(seed);
        let task = ground(&d, &p, GroundOptions::default()).unwrap();
        let best = naive_shortest(&d, &p);
        let bfs = solve(&task, &config(SearchMode::BlindBfs));
        prop_assert_eq!(bfs.plan.as_ref().map(|p| p.len()), best, "{}", random_task_text(seed).0);
        for mode in [SearchMode::GbfsHadd, SearchMode::AStarHadd, SearchMode::GoalCount] {
            let r = solve(&task, &config(mode));
            match best {
                Some(n) => prop_assert!(r.plan.unwrap().len() >= n),
                None => prop_assert_eq!(r.status, PlanStatus::Unsolvable),
            }
        }
    }

    #[test]
    fn game_description_round_trip(seed in any::<u64>()) {
        let text = random_gdf(seed);
        let m = parse_gdf(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let printed = print_gdf(&m);
        prop_assert_eq!(&parse_gdf(&printed).unwrap(), &m);
        prop_assert_eq!(print_gdf(&parse_gdf(&printed).unwrap()), printed);
    }

    #[test]
    fn sokoban_moves_follow_open_adjacency(seed in any::<u64>()) {
        let g = Game::load(&builtin_games_dir().join("sokoban")).unwrap();
        let (level, moves) = random_sokoban(seed);
        let grid = parse_ldf(&level, &g.model).unwrap();
        let task = g.task(&g.level_problem(&grid).unwrap()).unwrap();
        let grounded = task.actions.iter().filter(|a| a.name.starts_with("AVATAR_ACTION_MOVE_")).count();
        prop_assert_eq!(grounded, moves, "{}", level);
    }
}

#[test]
fn shipped_games_round_trip() {
    for e in std::fs::read_dir(builtin_games_dir()).unwrap() {
        let text = std::fs::read_to_string(e.unwrap().path().join("game.gdf")).unwrap();
        let m = parse_gdf(&text).unwrap();
        assert_eq!(parse_gdf(&print_gdf(&m)).unwrap(), m);
    }
}
