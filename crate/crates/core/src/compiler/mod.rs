//! VGDL game model → PDDL domain.
//!
//! Each sprite becomes a type (statics become `is-<T>` cell predicates
//! instead), each interaction an action, and a fixed set of control actions
//! enforces the game's turn order: avatar → interactions →
//! `END-TURN-INTERACTIONS` → one phase per missile type (closed by
//! `STOP_<T>_MOVE`) → `END-TURN-SPRITES`.

use std::collections::BTreeSet;

use log::warn;
use thiserror::Error;

use crate::kb::{Binding, Instantiated, KbError, KnowledgeBase};
use crate::pddl::{ActionDef, Atom, Domain, Formula, PredicateDef, TypeDecl, TypedName};
use crate::vgdl::{Direction, GameModel, InteractionKind, TerminationDef, TerminationKind, VgdlType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("two actions named `{0}`")]
    DuplicateActionName(String),
    #[error("unsupported goal: {0}")]
    UnsupportedGoal(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, CompileError>;

pub const REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":equality",
    ":universal-preconditions",
    ":conditional-effects",
];

/// Capitalised game name used for `<Game>Domain` / `<Game>Problem`.
pub fn pddl_game_name(game: &str) -> String {
    let mut cs = game.chars();
    match cs.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + cs.as_str(),
        None => String::new(),
    }
}

pub fn domain_name(game: &str) -> String {
    format!("{}Domain", pddl_game_name(game))
}

/// The `n<k>` object standing for the number `k`.
pub fn num(k: usize) -> String {
    format!("n{k}")
}

/// PDDL parent type of a (non-static) sprite.
pub fn parent_type(model: &GameModel, name: &str) -> String {
    let s = model.sprite(name).expect("declared sprite");
    match &s.parent {
        Some(p) => p.clone(),
        None if s.name.eq_ignore_ascii_case(s.vgdl_type.as_str()) => "Object".to_string(),
        None => s.vgdl_type.as_str().to_string(),
    }
}

/// Fragments describing one step in direction `d` from `(?x, ?y)`.
pub fn direction_binding(d: Direction) -> Binding {
    let (new, step, dest, bound) = match d {
        Direction::Up => ("?new_y", "(next ?new_y ?y)", "?x ?new_y", "(row ?new_y)"),
        Direction::Down => ("?new_y", "(next ?y ?new_y)", "?x ?new_y", "(row ?new_y)"),
        Direction::Left => ("?new_x", "(next ?new_x ?x)", "?new_x ?y", "(col ?new_x)"),
        Direction::Right => ("?new_x", "(next ?x ?new_x)", "?new_x ?y", "(col ?new_x)"),
    };
    let mut b = Binding::new();
    b.insert("O".into(), d.lower().into());
    b.insert("NEW".into(), new.into());
    b.insert("STEP".into(), step.into());
    b.insert("DEST".into(), dest.into());
    b.insert("BOUND".into(), bound.into());
    b
}

/// "No in-grid cell in direction `d`" as a (static) formula.
fn offgrid(d: Direction) -> String {
    let (next, bound) = match d {
        Direction::Up => ("(next ?n ?y)", "row"),
        Direction::Down => ("(next ?y ?n)", "row"),
        Direction::Left => ("(next ?n ?x)", "col"),
        Direction::Right => ("(next ?x ?n)", "col"),
    };
    format!("(forall (?n - num) (or (not {next}) (not ({bound} ?n))))")
}

/// Sets orientation `d` on `var` and clears the other three.
fn orient(var: &str, d: Direction) -> String {
    let mut s = format!("(oriented-{} {var})", d.lower());
    for o in Direction::ALL {
        if o != d {
            s.push_str(&format!(" (not (oriented-{} {var}))", o.lower()));
        }
    }
    s
}


/// What stops a sprite from entering a cell (its `stepBack` producers),
/// split into static sprites and typed sprite leaves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Blockers {
    pub statics: Vec<String>,
    pub typed: Vec<String>,
}

impl Blockers {
    pub fn of(model: &GameModel, mover: &str) -> Blockers {
        let mut b = Blockers::default();
        for i in model.effective_interactions() {
            if i.kind != InteractionKind::StepBack || !model.is_a(mover, &i.receiver) {
                continue;
            }
            for leaf in model.leaf_descendants(&i.producer) {
                let list = if model.is_static(&leaf.name) {
                    &mut b.statics
                } else {
                    &mut b.typed
                };
                if !list.contains(&leaf.name) {
                    list.push(leaf.name.clone());
                }
            }
        }
        b
    }

    /// Conjunction saying the cell `dest` holds no blocker.
    pub fn free(&self, dest: &str) -> String {
        let mut parts: Vec<String> = self.statics.iter().map(|s| format!("(not (is-{s} {dest}))")).collect();
        parts.extend(
            self.typed
                .iter()
                .map(|t| format!("(forall (?p - {t}) (not (at {dest} ?p)))")),
        );
        parts.join(" ")
    }
}

/// Orientations a missile may have: its fixed one, or all four.
pub fn missile_orientations(model: &GameModel, name: &str) -> Vec<Direction> {
    match model.sprite(name).and_then(|s| s.orientation()) {
        Some(d) => vec![d],
        None => Direction::ALL.to_vec(),
    }
}

/// Missile leaves in declaration order; each gets its own turn phase.
pub fn missile_leaves(model: &GameModel) -> Vec<String> {
    model
        .leaves()
        .filter(|s| s.vgdl_type == VgdlType::Missile)
        .map(|s| s.name.clone())
        .collect()
}

/// Sprites with a `got-resource-<R>` counter.
pub fn resource_sprites(model: &GameModel) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for i in model.effective_interactions() {
        let r = match i.kind {
            InteractionKind::CollectResource => Some(i.receiver.clone()),
            InteractionKind::KillIfOtherHasMore => i.params.get("resource").cloned(),
            _ => None,
        };
        if let Some(r) = r {
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}

/// The avatar's projectile sprite, if it can shoot.
pub fn projectile(model: &GameModel) -> Option<String> {
    let a = model.avatar()?;
    if a.vgdl_type.can_shoot() {
        a.param("stype").map(str::to_string)
    } else {
        None
    }
}

/// Name of the single reserve projectile object.
pub fn projectile_object(stype: &str) -> String {
    format!("{stype}_shot")
}

pub fn has_timeout(model: &GameModel) -> bool {
    model.terminations.iter().any(|t| t.kind == TerminationKind::Timeout)
}

pub fn uses_geq(model: &GameModel) -> bool {
    model
        .effective_interactions()
        .iter()
        .any(|i| i.kind == InteractionKind::KillIfOtherHasMore)
}

/// Largest number the domain itself mentions (limits and timeouts).
pub fn max_number(model: &GameModel) -> usize {
    let limits = model
        .effective_interactions()
        .into_iter()
        .filter_map(|i| i.params.get("limit").and_then(|l| l.parse::<usize>().ok()));
    let timeouts = model
        .terminations
        .iter()
        .filter(|t| t.kind == TerminationKind::Timeout)
        .map(|t| t.limit as usize);
    limits.chain(timeouts).max().unwrap_or(0)
}

/// Goal of the game: the first winning termination.
pub fn deduce_goal(terminations: &[TerminationDef]) -> Result<Formula> {
    let t = terminations
        .iter()
        .find(|t| t.win)
        .ok_or_else(|| CompileError::UnsupportedGoal("no winning termination".into()))?;
    deduce_one(t)
}

/// Goal formula for one winning termination.
pub fn deduce_one(t: &TerminationDef) -> Result<Formula> {
    match t.kind {
        TerminationKind::SpriteCounter => {
            let s = t.stype.as_deref().unwrap_or_default();
            if t.limit > 0 {
                return Err(CompileError::UnsupportedGoal(format!(
                    "SpriteCounter stype={s} limit={} win=True",
                    t.limit
                )));
            }
            Ok(Formula::Forall(
                vec![TypedName::new("?o", s)],
                Box::new(Formula::atom("dead", &["?o"])),
            ))
        }
        TerminationKind::Timeout => Ok(Formula::And(vec![
            Formula::atom("turn", &[&num(t.limit as usize)]),
            Formula::negate(Formula::atom("dead", &["avatar"])),
        ])),
    }
}

/// Goal for `model`, also rejecting counters over static sprites.
pub fn game_goal(model: &GameModel) -> Result<Formula> {
    let t = model
        .terminations
        .iter()
        .find(|t| t.win)
        .ok_or_else(|| CompileError::UnsupportedGoal("no winning termination".into()))?;
    if let Some(s) = &t.stype {
        if model.is_static(s) {
            return Err(CompileError::UnsupportedGoal(format!(
                "static sprite `{s}` can never disappear"
            )));
        }
    }
    deduce_one(t)
}

struct Builder<'a> {
    model: &'a GameModel,
    kb: &'a KnowledgeBase,
    out: Instantiated,
    constants: Vec<TypedName>,
}

impl<'a> Builder<'a> {
    fn add(&mut self, id: &str, b: &Binding) -> Result<()> {
        let inst = self.kb.instantiate(id, b)?;
        self.out.extend(inst);
        Ok(())
    }

    fn avatar_actions(&mut self) -> Result<()> {
        let Some(avatar) = self.model.avatar() else {
            return Ok(());
        };
        let name = avatar.name.clone();
        let free = Blockers::of(self.model, &name);
        let dirs: &[Direction] = if avatar.vgdl_type == VgdlType::FlakAvatar {
            &[Direction::Left, Direction::Right]
        } else {
            &Direction::ALL
        };
        for &d in dirs {
            let mut b = direction_binding(d);
            b.insert("AVATAR".into(), name.clone());
            b.insert("FREE".into(), free.free(&b["DEST"]));
            b.insert("ORIENT".into(), orient("?o", d));
            self.add("avatar-move", &b)?;
        }
        let mut b = Binding::new();
        b.insert("AVATAR".into(), name.clone());
        self.add("avatar-nil", &b)?;

        if !avatar.vgdl_type.can_shoot() {
            return Ok(());
        }
        let shot = projectile(self.model).ok_or_else(|| {
            CompileError::Unsupported(format!("shooting avatar `{name}` has no stype"))
        })?;
        if self.model.sprite(&shot).is_some_and(|s| s.is_abstract()) || self.model.is_static(&shot) {
            return Err(CompileError::Unsupported(format!(
                "projectile `{shot}` must be a concrete, non-static sprite"
            )));
        }
        let shot_free = Blockers::of(self.model, &shot);
        let fixed = self.model.sprite(&shot).and_then(|s| s.orientation());
        let (id, dirs): (&str, &[Direction]) = if avatar.vgdl_type == VgdlType::FlakAvatar {
            ("avatar-use", &[Direction::Up])
        } else {
            ("avatar-use-facing", &Direction::ALL)
        };
        for &d in dirs {
            let mut b = direction_binding(d);
            b.insert("AVATAR".into(), name.clone());
            b.insert("SHOT".into(), shot.clone());
            b.insert("FREE".into(), shot_free.free(&b["DEST"]));
            b.insert("ORIENT".into(), orient("?b", fixed.unwrap_or(d)));
            self.add(id, &b)?;
        }
        Ok(())
    }

    fn interaction_actions(&mut self) -> Result<()> {
        for i in self.model.shadowed_interactions() {
            warn!(
                "interaction `{} {} > {}` is overridden by a later declaration of the same pair",
                i.receiver,
                i.producer,
                i.kind.as_str()
            );
        }
        for i in self.model.effective_interactions() {
            let mut b = Binding::new();
            b.insert("S1".into(), i.receiver.clone());
            b.insert("S2".into(), i.producer.clone());
            match i.kind {
                InteractionKind::StepBack => {}
                InteractionKind::KillSprite => self.add("kill-sprite", &b)?,
                InteractionKind::KillBoth => self.add("kill-both", &b)?,
                InteractionKind::KillIfFromAbove => self.add("kill-if-from-above", &b)?,
                InteractionKind::CollectResource => self.add("collect-resource", &b)?,
                InteractionKind::KillIfOtherHasMore => {
                    let limit: usize = i.params["limit"].parse().map_err(|_| {
                        CompileError::Unsupported(format!("limit `{}` is not a number", i.params["limit"]))
                    })?;
                    let c = num(limit);
                    if !self.constants.iter().any(|t| t.name == c) {
                        self.constants.push(TypedName::new(c.clone(), "num"));
                    }
                    b.insert("RES".into(), i.params["resource"].clone());
                    b.insert("LIMIT".into(), c);
                    self.add("kill-if-other-has-more", &b)?;
                }
                InteractionKind::BounceForward => {
                    let free = Blockers::of(self.model, &i.receiver);
                    for d in Direction::ALL {
                        let mut b = b.clone();
                        b.extend(direction_binding(d));
                        b.insert("FREE".into(), free.free(&b["DEST"]));
                        self.add("bounce-forward", &b)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn missile_actions(&mut self, t: &str) -> Result<()> {
        let blockers = Blockers::of(self.model, t);
        for d in missile_orientations(self.model, t) {
            let mut b = direction_binding(d);
            b.insert("T".into(), t.to_string());
            b.insert("FREE".into(), blockers.free(&b["DEST"]));
            self.add("missile-move", &b)?;
            if !blockers.statics.is_empty() {
                let dest = b["DEST"].clone();
                let cells: Vec<String> = blockers.statics.iter().map(|s| format!("(is-{s} {dest})")).collect();
                let blocked = if cells.len() == 1 {
                    cells[0].clone()
                } else {
                    format!("(or {})", cells.join(" "))
                };
                b.insert("BLOCKED".into(), blocked);
                self.add("missile-move-stop", &b)?;
            }
            for p in &blockers.typed {
                let mut b = b.clone();
                b.insert("P".into(), p.clone());
                self.add("missile-move-stop-object", &b)?;
            }
            let mut b = Binding::new();
            b.insert("T".into(), t.to_string());
            b.insert("O".into(), d.lower().into());
            b.insert("OFFGRID".into(), offgrid(d));
            self.add("missile-leave", &b)?;
        }
        Ok(())
    }
}

/// The control part of the domain: phase predicates, the per-missile
/// sub-phases and both END-TURN actions. `triggers` are the pending
/// conditions of the interaction actions.
pub fn emit_turn_structure(
    model: &GameModel,
    kb: &KnowledgeBase,
    triggers: &[(Vec<TypedName>, Formula)],
) -> Result<Instantiated> {
    let missiles = missile_leaves(model);
    let mut out = Instantiated::default();
    let phase = |t: &str| format!("(turn-{t}-move)");

    let mut no_pending = String::new();
    for (params, f) in triggers {
        no_pending.push_str(&format!("(forall ({}) (not {f})) ", crate::pddl::typed_list(params)));
    }
    let mut b = Binding::new();
    b.insert("NO-PENDING".into(), no_pending.trim_end().to_string());
    b.insert(
        "NEXT".into(),
        missiles.first().map(|t| phase(t)).unwrap_or_else(|| "(turn-sprites)".into()),
    );
    out.extend(kb.instantiate("end-turn-interactions", &b)?);

    for (i, t) in missiles.iter().enumerate() {
        let mut b = Binding::new();
        b.insert("T".into(), t.clone());
        out.extend(kb.instantiate("missile-phase", &b)?);
        b.insert(
            "NEXT".into(),
            missiles.get(i + 1).map(|n| phase(n)).unwrap_or_else(|| "(turn-sprites)".into()),
        );
        out.extend(kb.instantiate("missile-stop-phase", &b)?);
    }

    let mut b = Binding::new();
    let finished: Vec<String> = missiles.iter().map(|t| format!("(not (finished-turn-{t}-move))")).collect();
    b.insert("FINISHED".into(), finished.join(" "));
    if has_timeout(model) {
        b.insert("PARAMS".into(), "?t ?t2 - num".into());
        b.insert("TICK-PRE".into(), "(turn ?t) (next ?t ?t2)".into());
        b.insert("TICK".into(), "(not (turn ?t)) (turn ?t2)".into());
    } else {
        for k in ["PARAMS", "TICK-PRE", "TICK"] {
            b.insert(k.into(), String::new());
        }
    }
    out.extend(kb.instantiate("end-turn-sprites", &b)?);
    Ok(out)
}

/// Type declarations: one per non-static sprite, then the VGDL classes used
/// as parents, then `num`.
pub fn compile_types(model: &GameModel) -> Vec<TypeDecl> {
    let mut types = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    for s in &model.sprites {
        if model.is_static(&s.name) {
            continue;
        }
        let parent = parent_type(model, &s.name);
        if s.parent.is_none() && parent != "Object" && !classes.contains(&parent) {
            classes.push(parent.clone());
        }
        types.push(TypeDecl {
            name: s.name.clone(),
            parent: Some(parent),
        });
    }
    for c in classes {
        if !types.iter().any(|t: &TypeDecl| t.name.eq_ignore_ascii_case(&c)) {
            types.push(TypeDecl {
                name: c,
                parent: Some("Object".into()),
            });
        }
    }
    types.push(TypeDecl {
        name: "num".into(),
        parent: None,
    });
    types
}

/// Compiles with the built-in knowledge base.
pub fn compile_domain(model: &GameModel, game: &str) -> Result<Domain> {
    compile_domain_with(model, game, &KnowledgeBase::builtin())
}

pub fn compile_domain_with(model: &GameModel, game: &str, kb: &KnowledgeBase) -> Result<Domain> {
    let mut bld = Builder {
        model,
        kb,
        out: Instantiated::default(),
        constants: Vec::new(),
    };
    bld.add("base", &Binding::new())?;
    for s in model.leaves() {
        if model.is_static(&s.name) {
            let mut b = Binding::new();
            b.insert("T".into(), s.name.clone());
            bld.add("sprite-static", &b)?;
        }
    }
    for r in resource_sprites(model) {
        let mut b = Binding::new();
        b.insert("T".into(), r);
        bld.add("resource-counter", &b)?;
    }
    if has_timeout(model) {
        bld.add("timeout", &Binding::new())?;
    }
    bld.avatar_actions()?;
    bld.interaction_actions()?;
    let triggers = std::mem::take(&mut bld.out.triggers);
    let mut unique_triggers = Vec::new();
    for t in triggers {
        if !unique_triggers.contains(&t) {
            unique_triggers.push(t);
        }
    }
    let control = emit_turn_structure(model, kb, &unique_triggers)?;
    // END-TURN-INTERACTIONS goes before the sprite phases.
    let (end_inter, rest): (Vec<ActionDef>, Vec<ActionDef>) = control
        .actions
        .into_iter()
        .partition(|a| a.name == "END-TURN-INTERACTIONS");
    let (end_sprites, stops): (Vec<ActionDef>, Vec<ActionDef>) =
        rest.into_iter().partition(|a| a.name == "END-TURN-SPRITES");
    bld.out.predicates.extend(control.predicates);
    bld.out.actions.extend(end_inter);
    for t in missile_leaves(model) {
        bld.missile_actions(&t)?;
        let stop = format!("STOP_{}_MOVE", t.to_ascii_uppercase());
        bld.out.actions.extend(stops.iter().filter(|a| a.name == stop).cloned());
    }
    bld.out.actions.extend(end_sprites);

    let mut predicates: Vec<PredicateDef> = Vec::new();
    for p in bld.out.predicates {
        if !predicates.iter().any(|q| q.name == p.name) {
            predicates.push(p);
        }
    }
    let mut names = BTreeSet::new();
    for a in &bld.out.actions {
        if !names.insert(a.name.to_ascii_uppercase()) {
            return Err(CompileError::DuplicateActionName(a.name.clone()));
        }
    }
    bld.constants.sort_by_key(|c| c.name[1..].parse::<usize>().unwrap_or(0));
    Ok(Domain {
        name: domain_name(game),
        requirements: REQUIREMENTS.iter().map(|s| s.to_string()).collect(),
        types: compile_types(model),
        constants: bld.constants,
        predicates,
        actions: bld.out.actions,
    })
}

/// Init-fact schemata (with variables) a sprite contributes to a problem.
pub fn correspondence(model: &GameModel, kb: &KnowledgeBase, sprite: &str) -> Result<Vec<Atom>> {
    let mut b = Binding::new();
    b.insert("T".into(), sprite.to_string());
    let id = if model.is_static(sprite) { "sprite-static" } else { "sprite-object" };
    Ok(kb.instantiate(id, &b)?.init_facts)
}

/// Size figures of a domain: leaf types (statics counted as their
/// `is-<T>` family), supertypes, predicates and actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainStats {
    pub types: usize,
    pub supertypes: usize,
    pub predicates: usize,
    pub actions: usize,
}

pub fn domain_stats(d: &Domain) -> DomainStats {
    let is_parent = |t: &str| d.types.iter().any(|u| u.parent.as_deref() == Some(t));
    let leaves = d
        .types
        .iter()
        .filter(|t| t.name != "num" && t.name != "Object" && !is_parent(&t.name))
        .count();
    let statics = d.predicates.iter().filter(|p| p.name.starts_with("is-")).count();
    DomainStats {
        types: leaves + statics,
        supertypes: d
            .types
            .iter()
            .filter(|t| t.name != "Object" && is_parent(&t.name))
            .count(),
        predicates: d.predicates.len(),
        actions: d.actions.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vgdl::parse_gdf;

    fn game(name: &str) -> GameModel {
        let path = format!("{}/games/{name}/game.gdf", env!("CARGO_MANIFEST_DIR"));
        parse_gdf(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    fn stats(name: &str) -> DomainStats {
        domain_stats(&compile_domain(&game(name), name).unwrap())
    }

    #[test]
    fn sokoban_matches_reference_counts() {
        let s = stats("sokoban");
        assert_eq!((s.types, s.supertypes, s.predicates, s.actions), (4, 3, 13, 12));
    }

    #[test]
    fn zenpuzzle_matches_reference_counts() {
        let s = stats("zenpuzzle");
        assert_eq!((s.types, s.supertypes, s.predicates, s.actions), (5, 2, 15, 8));
    }

    #[test]
    fn sokoban_types_and_statics() {
        let d = compile_domain(&game("sokoban"), "sokoban").unwrap();
        assert_eq!(d.parent_of("box"), Some("Passive"));
        assert_eq!(d.parent_of("Passive"), Some("Object"));
        assert!(!d.declares_type("wall"));
        assert!(d.predicate("is-wall").is_some());
        let names: Vec<&str> = d.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "AVATAR_ACTION_MOVE_UP",
                "AVATAR_ACTION_MOVE_DOWN",
                "AVATAR_ACTION_MOVE_LEFT",
                "AVATAR_ACTION_MOVE_RIGHT",
                "AVATAR_ACTION_NIL",
                "BOX_AVATAR_BOUNCEFORWARD_UP",
                "BOX_AVATAR_BOUNCEFORWARD_DOWN",
                "BOX_AVATAR_BOUNCEFORWARD_LEFT",
                "BOX_AVATAR_BOUNCEFORWARD_RIGHT",
                "BOX_HOLE_KILLSPRITE",
                "END-TURN-INTERACTIONS",
                "END-TURN-SPRITES",
            ]
        );
    }

    #[test]
    fn inherited_types_follow_the_sprite_tree() {
        let m = parse_gdf(
            "BasicGame
  SpriteSet
    avatar > ShootAvatar stype=bullet
    missile > Missile
      bullet > orientation=UP
      rock > orientation=DOWN
    alien > Bomber stype=rock
  LevelMapping
    A > avatar
    a > alien
  InteractionSet
    alien bullet > killSprite
  TerminationSet
    SpriteCounter stype=alien limit=0 win=True
",
        )
        .unwrap();
        let d = compile_domain(&m, "shots").unwrap();
        assert_eq!(d.parent_of("bullet"), Some("missile"));
        assert_eq!(d.parent_of("missile"), Some("Object"));
        assert!(d.action("BULLET_MOVE_UP").is_some());
        assert!(d.action("STOP_ROCK_MOVE").is_some());
    }

    #[test]
    fn goals() {
        use crate::vgdl::TerminationDef;
        let counter = TerminationDef {
            kind: TerminationKind::SpriteCounter,
            stype: Some("box".into()),
            limit: 0,
            win: true,
        };
        assert_eq!(deduce_goal(std::slice::from_ref(&counter)).unwrap().to_string(), "(forall (?o - box) (dead ?o))");
        let timeout = TerminationDef {
            kind: TerminationKind::Timeout,
            stype: None,
            limit: 50,
            win: true,
        };
        assert_eq!(
            deduce_goal(&[timeout]).unwrap().to_string(),
            "(and (turn n50) (not (dead avatar)))"
        );
        let lose = TerminationDef { win: false, ..counter.clone() };
        assert!(deduce_goal(&[lose]).is_err());
        let limited = TerminationDef { limit: 2, ..counter };
        assert!(matches!(deduce_goal(&[limited]), Err(CompileError::UnsupportedGoal(_))));
    }

    #[test]
    fn domain_text_round_trips() {
        for g in ["sokoban", "zenpuzzle"] {
            let d = compile_domain(&game(g), g).unwrap();
            let text = crate::pddl::print_domain(&d);
            let back = crate::pddl::read_domain(&text).unwrap();
            assert_eq!(crate::pddl::print_domain(&back), text);
            assert_eq!(text, crate::pddl::print_domain(&compile_domain(&game(g), g).unwrap()));
        }
    }

    #[test]
    fn duplicate_pair_last_wins() {
        let m = parse_gdf(
            "BasicGame
  SpriteSet
    avatar > MovingAvatar
    box > Passive
  LevelMapping
    A > avatar
    b > box
  InteractionSet
    box avatar > killSprite
    box avatar > bounceForward
  TerminationSet
    SpriteCounter stype=box limit=0 win=True
",
        )
        .unwrap();
        let d = compile_domain(&m, "dup").unwrap();
        assert!(d.action("BOX_AVATAR_KILLSPRITE").is_none());
        assert!(d.action("BOX_AVATAR_BOUNCEFORWARD_UP").is_some());
    }
}
