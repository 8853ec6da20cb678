//! Problem generation: a board situation plus a [`ConfigFile`] → PDDL problem.
//!
//! Objects are named `<sprite>_<x>_<y>` after the cell they start in; the
//! avatar is always `avatar`. Coordinates are `x` = column, `y` = row, with
//! the origin in the top-left corner. Dead instances are left out, except
//! for the avatar's reserve projectile, which is present and marked dead.

mod config;
mod snapshot;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::compiler::{num, CompileError};
use crate::kb::KnowledgeBase;
use crate::pddl::{Atom, Problem, Term, TypedName};
use crate::vgdl::{GameModel, LevelGrid};

pub use config::{emit_config, ConfigFile, GoalEntry};
pub use snapshot::{initial_orientation, object_name, Instance, Snapshot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("unmapped character `{ch}` at column {x}, row {y}")]
    UnmappedCharacter { ch: char, x: usize, y: usize },
    #[error("the level has no avatar")]
    NoAvatar,
    #[error("the level has {0} avatars, expected one")]
    MultipleAvatars(usize),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("sprite `{0}` has no entry in the configuration")]
    UnknownSprite(String),
}

pub type Result<T> = std::result::Result<T, ProblemError>;

/// Size of the `n0 … n(N-1)` range for a situation: enough for every
/// coordinate, every number the domain mentions and every resource count.
pub fn number_range(snap: &Snapshot, cfg: &ConfigFile) -> usize {
    let res_instances = cfg
        .resource_counters
        .iter()
        .map(|r| snap.instances.iter().filter(|i| &i.sprite == r).count())
        .sum::<usize>();
    let collected = snap.resources.values().sum::<usize>();
    let mut n = snap
        .width
        .max(snap.height)
        .max(cfg.min_numbers)
        .max(res_instances.max(collected) + 1);
    if cfg.turn_counter {
        n = n.max(snap.turn + 1);
    }
    n
}

fn instantiate(schema: &Atom, inst: &Instance) -> Atom {
    let var = format!("?{}", inst.sprite);
    Atom {
        predicate: schema.predicate.clone(),
        args: schema
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) if v == "?x" => Term::Const(num(inst.x)),
                Term::Var(v) if v == "?y" => Term::Const(num(inst.y)),
                Term::Var(v) if *v == var => Term::Const(inst.name.clone()),
                other => other.clone(),
            })
            .collect(),
    }
}

/// Translates a situation into a problem. Pure: equal inputs give equal
/// output.
pub fn generate_problem(snap: &Snapshot, cfg: &ConfigFile, model: &GameModel) -> Result<Problem> {
    let avatars = snap
        .live()
        .filter(|i| model.sprite(&i.sprite).is_some_and(|s| s.vgdl_type.is_avatar()))
        .count();
    match avatars {
        0 => return Err(ProblemError::NoAvatar),
        1 => {}
        k => return Err(ProblemError::MultipleAvatars(k)),
    }
    for i in &snap.instances {
        if cfg.schemata(&i.sprite).is_none() {
            return Err(ProblemError::UnknownSprite(i.sprite.clone()));
        }
    }

    // Row-major, creation order within a cell.
    let mut live: Vec<&Instance> = snap.live().collect();
    live.sort_by_key(|i| (i.y, i.x));
    let (cells, objects): (Vec<&Instance>, Vec<&Instance>) =
        live.into_iter().partition(|i| cfg.is_cell_sprite(&i.sprite));
    let reserve: Vec<&Instance> = snap
        .instances
        .iter()
        .filter(|i| !i.alive && cfg.projectile.as_deref() == Some(i.sprite.as_str()))
        .collect();

    let n = number_range(snap, cfg);
    let mut init = Vec::new();
    for i in objects.iter().chain(cells.iter()) {
        for schema in cfg.schemata(&i.sprite).unwrap_or_default() {
            init.push(instantiate(schema, i));
        }
    }
    for i in &reserve {
        init.push(Atom::new("dead", &[&i.name]));
    }
    for i in &objects {
        if let Some(d) = i.orientation {
            init.push(Atom::new(format!("oriented-{}", d.lower()), &[&i.name]));
        }
    }
    for r in &cfg.resource_counters {
        let have = snap.resources.get(r).copied().unwrap_or(0).min(n - 1);
        init.push(Atom::new(format!("got-resource-{r}"), &[&num(have)]));
    }
    if cfg.turn_counter {
        init.push(Atom::new("turn", &[&num(snap.turn)]));
    }
    init.extend(cfg.initial_facts.iter().cloned());
    for k in 0..snap.width {
        init.push(Atom::new("col", &[&num(k)]));
    }
    for k in 0..snap.height {
        init.push(Atom::new("row", &[&num(k)]));
    }
    if cfg.order_predicates.iter().any(|p| p == "next") {
        for k in 1..n {
            init.push(Atom::new("next", &[&num(k - 1), &num(k)]));
        }
    }
    if cfg.order_predicates.iter().any(|p| p == "geq") {
        for a in 0..n {
            for b in 0..=a {
                init.push(Atom::new("geq", &[&num(a), &num(b)]));
            }
        }
    }

    let mut objs: Vec<TypedName> = objects
        .iter()
        .chain(reserve.iter())
        .map(|i| {
            let ty = cfg
                .variable_type(&format!("?{}", i.sprite))
                .unwrap_or(&i.sprite)
                .to_string();
            TypedName::new(i.name.clone(), ty)
        })
        .collect();
    objs.sort_by(|a, b| a.name.cmp(&b.name));
    objs.extend(
        (0..n)
            .map(num)
            .filter(|k| !cfg.constants.contains(k))
            .map(|k| TypedName::new(k, "num")),
    );

    let goal = cfg
        .goal()
        .cloned()
        .ok_or_else(|| ProblemError::Config {
            line: 0,
            msg: "no goal".into(),
        })?;
    Ok(Problem {
        name: cfg.problem.clone(),
        domain: cfg.domain.clone(),
        objects: objs,
        init,
        goal,
    })
}

/// Problem for a level's starting position.
pub fn problem_from_grid(
    grid: &LevelGrid,
    cfg: &ConfigFile,
    model: &GameModel,
) -> Result<Problem> {
    generate_problem(&Snapshot::from_grid(grid, model)?, cfg, model)
}

/// Convenience: config with the built-in knowledge base.
pub fn default_config(model: &GameModel, game: &str) -> Result<ConfigFile> {
    emit_config(model, game, &KnowledgeBase::builtin())
}

/// Positional facts vs. cell facts in a generated problem, keyed by
/// predicate family (`at` or `is-<T>`).
pub fn fact_breakdown(p: &Problem) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for a in &p.init {
        if a.predicate == "at" || a.predicate.starts_with("is-") {
            *out.entry(a.predicate.clone()).or_insert(0) += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::print_problem;
    use crate::vgdl::{parse_gdf, parse_ldf};

    fn load(game: &str, level: usize) -> (GameModel, LevelGrid) {
        let dir = format!("{}/games/{game}", env!("CARGO_MANIFEST_DIR"));
        let model = parse_gdf(&std::fs::read_to_string(format!("{dir}/game.gdf")).unwrap()).unwrap();
        let grid = parse_ldf(
            &std::fs::read_to_string(format!("{dir}/level{level}.ldf")).unwrap(),
            &model,
        )
        .unwrap();
        (model, grid)
    }

    #[test]
    fn sokoban_config_matches_reference_layout() {
        let (model, _) = load("sokoban", 0);
        let cfg = default_config(&model, "sokoban").unwrap();
        let text = cfg.to_text();
        let expected = "gameElementsCorrespondence:
  avatar:
  - (at ?x ?y ?avatar)
  hole:
  - (at ?x ?y ?hole)
  box:
  - (at ?x ?y ?box)
  wall:
  - (is-wall ?x yy)
variablesTypes:
  ?hole: hole
  ?avatar: avatar
  ?box: box
  ?x: num
  ?y: num
goals:
  - goalPredicate: (forall (?o - box) (dead ?o))
    priority: 1
"
        .replace("yy", "?y");
        assert!(text.contains(&expected), "{text}");
        assert_eq!(ConfigFile::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn multi_line_goal_predicate() {
        let text = "domain: SokobanDomain
problem: SokobanProblem
gameElementsCorrespondence:
  box:
  - (at ?x ?y ?box)
variablesTypes:
  ?box: box
  ?x: num
  ?y: num
goals:
  - goalPredicate:
      (forall (?o - box)
      (dead ?o)
      )
    priority: 1
";
        let cfg = ConfigFile::parse(text).unwrap();
        assert_eq!(cfg.goals.len(), 1);
        assert_eq!(cfg.goals[0].predicate.to_string(), "(forall (?o - box) (dead ?o))");
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let bad = "domain: D\ngameElementsCorrespondence:\n  - (at ?x ?y ?box)\n";
        assert!(matches!(ConfigFile::parse(bad), Err(ProblemError::Config { line: 3, .. })));
        let untyped = "domain: D\ngameElementsCorrespondence:\n  box:\n  - (at ?x ?y ?box)\n";
        assert!(matches!(ConfigFile::parse(untyped), Err(ProblemError::Config { .. })));
    }

    #[test]
    fn sokoban_reference_problem() {
        let (model, grid) = load("sokoban", 0);
        let cfg = default_config(&model, "sokoban").unwrap();
        let p = problem_from_grid(&grid, &cfg, &model).unwrap();
        let init: Vec<String> = p.init.iter().map(|a| a.to_string()).collect();
        for f in ["(at n2 n2 box_2_2)", "(at n2 n3 avatar)", "(at n1 n1 hole_1_1)", "(is-wall n0 n0)"] {
            assert!(init.contains(&f.to_string()), "{f} missing");
        }
        assert_eq!(init.iter().filter(|f| f.starts_with("(at ")).count(), 3);
        assert_eq!(init.iter().filter(|f| f.starts_with("(is-wall")).count(), 16);
        let names: Vec<&str> = p.objects.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, ["avatar", "box_2_2", "hole_1_1", "n0", "n1", "n2", "n3", "n4"]);
        let printed = print_problem(&p);
        assert!(printed.contains("n0 n1 n2 n3 n4 - num"), "{printed}");
    }

    #[test]
    fn two_avatars_rejected() {
        let (model, _) = load("sokoban", 0);
        let cfg = default_config(&model, "sokoban").unwrap();
        let grid = parse_ldf("wwww\nwAAw\nwwww\n", &model).unwrap();
        assert_eq!(
            problem_from_grid(&grid, &cfg, &model),
            Err(ProblemError::MultipleAvatars(2))
        );
        let grid = parse_ldf("wwww\nwb w\nwwww\n", &model).unwrap();
        assert_eq!(problem_from_grid(&grid, &cfg, &model), Err(ProblemError::NoAvatar));
    }

    #[test]
    fn unmapped_character_rejected() {
        let (model, _) = load("sokoban", 0);
        let grid = LevelGrid::new(vec!["wAz".chars().collect()]);
        assert_eq!(
            Snapshot::from_grid(&grid, &model),
            Err(ProblemError::UnmappedCharacter { ch: 'z', x: 2, y: 0 })
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let (model, grid) = load("sokoban", 1);
        let cfg = default_config(&model, "sokoban").unwrap();
        let a = print_problem(&problem_from_grid(&grid, &cfg, &model).unwrap());
        let b = print_problem(&problem_from_grid(&grid, &cfg, &model).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn dead_instances_are_omitted() {
        let (model, grid) = load("sokoban", 0);
        let cfg = default_config(&model, "sokoban").unwrap();
        let mut snap = Snapshot::from_grid(&grid, &model).unwrap();
        snap.instances.iter_mut().find(|i| i.sprite == "box").unwrap().alive = false;
        let p = generate_problem(&snap, &cfg, &model).unwrap();
        assert!(!p.objects.iter().any(|o| o.name == "box_2_2"));
        assert!(!p.init.iter().any(|a| a.to_string().contains("box_2_2")));
    }

    #[test]
    fn cell_facts_count_static_cells() {
        let (model, grid) = load("zenpuzzle", 0);
        let cfg = default_config(&model, "zenpuzzle").unwrap();
        let p = problem_from_grid(&grid, &cfg, &model).unwrap();
        let snap = Snapshot::from_grid(&grid, &model).unwrap();
        let statics = snap.live().filter(|i| model.is_static(&i.sprite)).count();
        let typed = snap.live().count() - statics;
        let b = fact_breakdown(&p);
        assert_eq!(b.get("at").copied().unwrap_or(0), typed);
        assert_eq!(b.iter().filter(|(k, _)| k.starts_with("is-")).map(|(_, v)| v).sum::<usize>(), statics);
    }
}
