//! A small VGDL simulator with the same turn order as the compiled domains:
//! avatar → interactions (to a fixpoint) → missiles, one type at a time →
//! other NPCs → terminations.
//!
//! Every rule the domain also models is reported as an [`Event`] carrying
//! the ground PDDL action it corresponds to, so a trace of a deterministic
//! game is itself a plan for the compiled task.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::compiler::{
    missile_leaves, num, projectile, projectile_object, Blockers,
};
use crate::pddl::PlanStep;
use crate::problem::{initial_orientation, ProblemError, Snapshot};
use crate::vgdl::{
    Direction, GameModel, InteractionDef, InteractionKind, LevelGrid, TerminationKind, VgdlType,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("{action} is not available to a {avatar}")]
    IllegalAction { action: AvatarAction, avatar: VgdlType },
    #[error("the game is over")]
    GameOver,
    #[error("the level has no live avatar")]
    NoAvatar,
    #[error("cell ({x}, {y}) holds {sprites:?}, which no level character maps to")]
    CellConflict { x: usize, y: usize, sprites: Vec<String> },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub type Result<T> = std::result::Result<T, EngineError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AvatarAction {
    Up,
    Down,
    Left,
    Right,
    Use,
    Nil,
}

impl AvatarAction {
    pub const ALL: [AvatarAction; 6] = [
        AvatarAction::Up,
        AvatarAction::Down,
        AvatarAction::Left,
        AvatarAction::Right,
        AvatarAction::Use,
        AvatarAction::Nil,
    ];

    pub fn direction(self) -> Option<Direction> {
        match self {
            AvatarAction::Up => Some(Direction::Up),
            AvatarAction::Down => Some(Direction::Down),
            AvatarAction::Left => Some(Direction::Left),
            AvatarAction::Right => Some(Direction::Right),
            _ => None,
        }
    }

    /// The engine action behind an avatar-phase PDDL action name.
    pub fn from_pddl(name: &str) -> Option<AvatarAction> {
        let rest = name.to_ascii_uppercase();
        let rest = rest.strip_prefix("AVATAR_ACTION_")?;
        match rest {
            "NIL" => Some(AvatarAction::Nil),
            "USE" => Some(AvatarAction::Use),
            _ if rest.starts_with("USE_") => Some(AvatarAction::Use),
            _ => {
                let d = Direction::parse(rest.strip_prefix("MOVE_")?)?;
                Some(match d {
                    Direction::Up => AvatarAction::Up,
                    Direction::Down => AvatarAction::Down,
                    Direction::Left => AvatarAction::Left,
                    Direction::Right => AvatarAction::Right,
                })
            }
        }
    }
}

impl fmt::Display for AvatarAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AvatarAction::Up => "UP",
            AvatarAction::Down => "DOWN",
            AvatarAction::Left => "LEFT",
            AvatarAction::Right => "RIGHT",
            AvatarAction::Use => "USE",
            AvatarAction::Nil => "NIL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ongoing,
    Win,
    Lose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Avatar,
    Interaction,
    Sprite,
}

impl Phase {
    /// Trace marker: `+` avatar, `-` interactions, `#` other sprites.
    pub fn marker(self) -> char {
        match self {
            Phase::Avatar => '+',
            Phase::Interaction => '-',
            Phase::Sprite => '#',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub turn: usize,
    pub phase: Phase,
    pub step: PlanStep,
    /// False for rules the domain does not model (random NPCs, bombs,
    /// unresolvable pushes).
    pub modelled: bool,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}({})",
            self.turn,
            self.phase.marker(),
            self.step.name,
            self.step.args.join(" ")
        )
    }
}

/// The world: a [`Snapshot`] plus the game status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub snapshot: Snapshot,
    pub status: Status,
}

impl GameState {
    pub fn turn(&self) -> usize {
        self.snapshot.turn
    }

    pub fn avatar(&self) -> Option<&crate::problem::Instance> {
        self.snapshot.live().find(|i| i.name == "avatar")
    }
}

pub struct Engine {
    model: GameModel,
    blockers: HashMap<String, Blockers>,
    missiles: Vec<String>,
    shot: Option<String>,
    rng: ChaCha8Rng,
    /// Chance per turn that a Bomber drops its `stype`.
    pub bomber_probability: f64,
}

fn offset(x: usize, y: usize, d: Direction, w: usize, h: usize) -> Option<(usize, usize)> {
    let (dx, dy) = d.delta();
    let nx = x as i64 + dx;
    let ny = y as i64 + dy;
    (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then_some((nx as usize, ny as usize))
}

impl Engine {
    pub fn new(model: &GameModel, seed: u64) -> Engine {
        let blockers = model
            .leaves()
            .map(|s| (s.name.clone(), Blockers::of(model, &s.name)))
            .collect();
        Engine {
            model: model.clone(),
            blockers,
            missiles: missile_leaves(model),
            shot: projectile(model),
            rng: ChaCha8Rng::seed_from_u64(seed),
            bomber_probability: 0.5,
        }
    }

    pub fn model(&self) -> &GameModel {
        &self.model
    }

    pub fn load(&self, grid: &LevelGrid) -> Result<GameState> {
        Ok(GameState {
            snapshot: Snapshot::from_grid(grid, &self.model)?,
            status: Status::Ongoing,
        })
    }

    fn vgdl_type(&self, sprite: &str) -> Option<VgdlType> {
        self.model.sprite(sprite).map(|s| s.vgdl_type)
    }

    /// Index of the first live instance at `(x, y)` that keeps `mover` out.
    fn blocker_at(&self, snap: &Snapshot, mover: usize, x: usize, y: usize) -> Option<(usize, bool)> {
        let b = self.blockers.get(&snap.instances[mover].sprite)?;
        snap.instances.iter().enumerate().find_map(|(k, i)| {
            if k == mover || !i.alive || i.x != x || i.y != y {
                return None;
            }
            if b.statics.contains(&i.sprite) {
                Some((k, true))
            } else if b.typed.contains(&i.sprite) {
                Some((k, false))
            } else {
                None
            }
        })
    }

    /// Executes one turn.
    pub fn step(&mut self, state: &mut GameState, action: AvatarAction) -> Result<Vec<Event>> {
        if state.status != Status::Ongoing {
            return Err(EngineError::GameOver);
        }
        let snap = &mut state.snapshot;
        let av = snap
            .instances
            .iter()
            .position(|i| i.alive && i.name == "avatar")
            .ok_or(EngineError::NoAvatar)?;
        let av_type = self.vgdl_type(&snap.instances[av].sprite).ok_or(EngineError::NoAvatar)?;
        let illegal = match action {
            AvatarAction::Up | AvatarAction::Down => av_type == VgdlType::FlakAvatar,
            AvatarAction::Use => !av_type.can_shoot(),
            _ => false,
        };
        if illegal {
            return Err(EngineError::IllegalAction {
                action,
                avatar: av_type,
            });
        }
        let turn = snap.turn;
        let mut events = Vec::new();
        let emit = |events: &mut Vec<Event>, phase: Phase, name: String, args: Vec<String>, modelled: bool| {
            events.push(Event {
                turn,
                phase,
                step: PlanStep::new(name, args),
                modelled,
            })
        };
        let start: Vec<(usize, usize)> = snap.instances.iter().map(|i| (i.x, i.y)).collect();

        // Avatar.
        let (ax, ay) = (snap.instances[av].x, snap.instances[av].y);
        let mut acted = false;
        if let Some(d) = action.direction() {
            if let Some((nx, ny)) = offset(ax, ay, d, snap.width, snap.height) {
                if self.blocker_at(snap, av, nx, ny).is_none() {
                    let a = &mut snap.instances[av];
                    a.x = nx;
                    a.y = ny;
                    a.orientation = Some(d);
                    let new = if matches!(d, Direction::Up | Direction::Down) { ny } else { nx };
                    emit(
                        &mut events,
                        Phase::Avatar,
                        format!("AVATAR_ACTION_MOVE_{}", d.upper()),
                        vec!["avatar".into(), num(ax), num(ay), num(new)],
                        true,
                    );
                    acted = true;
                }
            }
        } else if action == AvatarAction::Use {
            let d = if av_type == VgdlType::FlakAvatar {
                Some(Direction::Up)
            } else {
                snap.instances[av].orientation
            };
            let shot = self.shot.clone().unwrap_or_default();
            let reserve = snap
                .instances
                .iter()
                .position(|i| !i.alive && i.sprite == shot && i.name == projectile_object(&shot));
            if let (Some(d), Some(b)) = (d, reserve) {
                if let Some((nx, ny)) = offset(ax, ay, d, snap.width, snap.height) {
                    if self.blocker_at(snap, b, nx, ny).is_none() {
                        let fixed = self.model.sprite(&shot).and_then(|s| s.orientation());
                        let inst = &mut snap.instances[b];
                        inst.x = nx;
                        inst.y = ny;
                        inst.alive = true;
                        inst.orientation = Some(fixed.unwrap_or(d));
                        let name = if av_type == VgdlType::FlakAvatar {
                            "AVATAR_ACTION_USE".to_string()
                        } else {
                            format!("AVATAR_ACTION_USE_{}", d.upper())
                        };
                        let new = if matches!(d, Direction::Up | Direction::Down) { ny } else { nx };
                        emit(
                            &mut events,
                            Phase::Avatar,
                            name,
                            vec!["avatar".into(), inst.name.clone(), num(ax), num(ay), num(new)],
                            true,
                        );
                        acted = true;
                    }
                }
            }
        }
        if !acted {
            emit(&mut events, Phase::Avatar, "AVATAR_ACTION_NIL".into(), vec!["avatar".into()], true);
        }

        // Interactions, to a fixpoint.
        let interactions: Vec<InteractionDef> =
            self.model.effective_interactions().into_iter().cloned().collect();
        let mut rounds = 0;
        'fix: loop {
            rounds += 1;
            if rounds > 10_000 {
                log::warn!("interaction resolution did not settle");
                break;
            }
            for inter in &interactions {
                if let Some((name, args, modelled)) = self.fire(snap, inter, &start) {
                    emit(&mut events, Phase::Interaction, name, args, modelled);
                    continue 'fix;
                }
            }
            break;
        }
        emit(&mut events, Phase::Interaction, "END-TURN-INTERACTIONS".into(), vec![], true);

        // Missiles, one type at a time, in creation order.
        for t in &self.missiles {
            let movers: Vec<usize> = (0..snap.instances.len())
                .filter(|&k| snap.instances[k].alive && &snap.instances[k].sprite == t)
                .collect();
            let up = t.to_ascii_uppercase();
            for k in movers {
                let (x, y) = (snap.instances[k].x, snap.instances[k].y);
                let d = snap.instances[k].orientation.unwrap_or(Direction::Right);
                let me = snap.instances[k].name.clone();
                match offset(x, y, d, snap.width, snap.height) {
                    None => {
                        snap.instances[k].alive = false;
                        emit(
                            &mut events,
                            Phase::Sprite,
                            format!("{up}_LEAVE_{}", d.upper()),
                            vec![me, num(x), num(y)],
                            true,
                        );
                    }
                    Some((nx, ny)) => {
                        let new = if matches!(d, Direction::Up | Direction::Down) { ny } else { nx };
                        match self.blocker_at(snap, k, nx, ny) {
                            Some((_, true)) => emit(
                                &mut events,
                                Phase::Sprite,
                                format!("{up}_MOVE_STOP_{}", d.upper()),
                                vec![me, num(x), num(y), num(new)],
                                true,
                            ),
                            Some((p, false)) => emit(
                                &mut events,
                                Phase::Sprite,
                                format!(
                                    "{up}_MOVE_STOP_{}_{}",
                                    d.upper(),
                                    snap.instances[p].sprite.to_ascii_uppercase()
                                ),
                                vec![me, snap.instances[p].name.clone(), num(x), num(y), num(new)],
                                true,
                            ),
                            None => {
                                snap.instances[k].x = nx;
                                snap.instances[k].y = ny;
                                emit(
                                    &mut events,
                                    Phase::Sprite,
                                    format!("{up}_MOVE_{}", d.upper()),
                                    vec![me, num(x), num(y), num(new)],
                                    true,
                                );
                            }
                        }
                    }
                }
            }
            emit(&mut events, Phase::Sprite, format!("STOP_{up}_MOVE"), vec![], true);
        }

        // Unmodelled NPCs.
        let npcs: Vec<usize> = (0..snap.instances.len()).filter(|&k| snap.instances[k].alive).collect();
        for k in npcs {
            let sprite = snap.instances[k].sprite.clone();
            match self.vgdl_type(&sprite) {
                Some(VgdlType::RandomNPC) => {
                    let d = Direction::ALL[self.rng.gen_range(0..4)];
                    let (x, y) = (snap.instances[k].x, snap.instances[k].y);
                    if let Some((nx, ny)) = offset(x, y, d, snap.width, snap.height) {
                        if self.blocker_at(snap, k, nx, ny).is_none() {
                            snap.instances[k].x = nx;
                            snap.instances[k].y = ny;
                            let me = snap.instances[k].name.clone();
                            emit(
                                &mut events,
                                Phase::Sprite,
                                format!("{}_WANDER_{}", sprite.to_ascii_uppercase(), d.upper()),
                                vec![me, num(x), num(y)],
                                false,
                            );
                        }
                    }
                }
                Some(VgdlType::Bomber) => {
                    let stype = self
                        .model
                        .sprite(&sprite)
                        .and_then(|s| s.param("stype"))
                        .map(str::to_string);
                    let Some(stype) = stype else { continue };
                    if self.rng.gen_bool(self.bomber_probability) {
                        let (x, y) = (snap.instances[k].x, snap.instances[k].y);
                        let name = format!("{stype}_{x}_{y}_{turn}");
                        emit(
                            &mut events,
                            Phase::Sprite,
                            format!("{}_SPAWN", sprite.to_ascii_uppercase()),
                            vec![snap.instances[k].name.clone(), name.clone()],
                            false,
                        );
                        snap.instances.push(crate::problem::Instance {
                            name,
                            orientation: initial_orientation(&self.model, &stype),
                            sprite: stype,
                            x,
                            y,
                            alive: true,
                        });
                    }
                }
                _ => {}
            }
        }

        let tick = if self.model.terminations.iter().any(|t| t.kind == TerminationKind::Timeout) {
            vec![num(turn), num(turn + 1)]
        } else {
            vec![]
        };
        emit(&mut events, Phase::Sprite, "END-TURN-SPRITES".into(), tick, true);
        snap.turn += 1;
        state.status = self.terminations(&state.snapshot);
        Ok(events)
    }

    /// Fires the first applicable pair of `inter`, scanning cells row-major.
    fn fire(
        &self,
        snap: &mut Snapshot,
        inter: &InteractionDef,
        start: &[(usize, usize)],
    ) -> Option<(String, Vec<String>, bool)> {
        let is = |k: usize, of: &str| self.model.is_a(&snap.instances[k].sprite, of);
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for r in 0..snap.instances.len() {
            if !snap.instances[r].alive || !is(r, &inter.receiver) {
                continue;
            }
            for p in 0..snap.instances.len() {
                if p == r || !snap.instances[p].alive || !is(p, &inter.producer) {
                    continue;
                }
                let (ri, pi) = (&snap.instances[r], &snap.instances[p]);
                let touching = match inter.kind {
                    InteractionKind::KillIfFromAbove => {
                        pi.x == ri.x && pi.y + 1 == ri.y && pi.orientation == Some(Direction::Down)
                    }
                    _ => pi.x == ri.x && pi.y == ri.y,
                };
                if touching {
                    pairs.push((r, p));
                }
            }
        }
        pairs.sort_by_key(|&(r, p)| (snap.instances[r].y, snap.instances[r].x, r, p));
        let tag = inter.kind.as_str().to_ascii_uppercase();
        for (r, p) in pairs {
            let (x, y) = (snap.instances[r].x, snap.instances[r].y);
            let base = |snap: &Snapshot| {
                vec![
                    snap.instances[r].name.clone(),
                    snap.instances[p].name.clone(),
                    num(x),
                    num(y),
                ]
            };
            let head = format!(
                "{}_{}",
                inter.receiver.to_ascii_uppercase(),
                inter.producer.to_ascii_uppercase()
            );
            match inter.kind {
                InteractionKind::StepBack => {}
                InteractionKind::KillSprite => {
                    let args = base(snap);
                    snap.instances[r].alive = false;
                    return Some((format!("{head}_{tag}"), args, true));
                }
                InteractionKind::KillBoth => {
                    let args = base(snap);
                    snap.instances[r].alive = false;
                    snap.instances[p].alive = false;
                    return Some((format!("{head}_{tag}"), args, true));
                }
                InteractionKind::KillIfFromAbove => {
                    let mut args = base(snap);
                    args.push(num(y - 1));
                    snap.instances[r].alive = false;
                    return Some((format!("{head}_{tag}"), args, true));
                }
                InteractionKind::CollectResource => {
                    let have = snap.resources.get(&inter.receiver).copied().unwrap_or(0);
                    let mut args = base(snap);
                    args.push(num(have));
                    args.push(num(have + 1));
                    snap.instances[r].alive = false;
                    snap.resources.insert(inter.receiver.clone(), have + 1);
                    return Some((format!("{head}_{tag}"), args, true));
                }
                InteractionKind::KillIfOtherHasMore => {
                    let res = inter.params.get("resource")?;
                    let limit: usize = inter.params.get("limit")?.parse().ok()?;
                    let have = snap.resources.get(res).copied().unwrap_or(0);
                    if have < limit {
                        continue;
                    }
                    let mut args = base(snap);
                    args.push(num(have));
                    snap.instances[r].alive = false;
                    return Some((format!("{head}_{tag}"), args, true));
                }
                InteractionKind::BounceForward => {
                    let Some(d) = snap.instances[p].orientation else {
                        continue;
                    };
                    let dest = offset(x, y, d, snap.width, snap.height)
                        .filter(|&(nx, ny)| self.blocker_at(snap, r, nx, ny).is_none());
                    match dest {
                        Some((nx, ny)) => {
                            let new = if matches!(d, Direction::Up | Direction::Down) { ny } else { nx };
                            let mut args = base(snap);
                            args.push(num(new));
                            snap.instances[r].x = nx;
                            snap.instances[r].y = ny;
                            return Some((format!("{head}_{tag}_{}", d.upper()), args, true));
                        }
                        None => {
                            // Cannot push: the pusher goes back where it came from.
                            let back = start.get(p).copied().filter(|&c| c != (x, y));
                            let Some((bx, by)) = back else { continue };
                            let args = base(snap);
                            snap.instances[p].x = bx;
                            snap.instances[p].y = by;
                            return Some((format!("{head}_STEPBACK"), args, false));
                        }
                    }
                }
            }
        }
        None
    }

    /// First termination (in declaration order) that holds.
    pub fn terminations(&self, snap: &Snapshot) -> Status {
        for t in &self.model.terminations {
            let fired = match t.kind {
                TerminationKind::SpriteCounter => {
                    let s = t.stype.as_deref().unwrap_or_default();
                    let live = snap.live().filter(|i| self.model.is_a(&i.sprite, s)).count();
                    live <= t.limit as usize
                }
                TerminationKind::Timeout => snap.turn >= t.limit as usize,
            };
            if fired {
                return if t.win { Status::Win } else { Status::Lose };
            }
        }
        Status::Ongoing
    }
}

/// The level character for each cell, from the live instances.
pub fn to_ldf(state: &GameState, model: &GameModel) -> Result<LevelGrid> {
    let snap = &state.snapshot;
    let mut cells = vec![vec![' '; snap.width]; snap.height];
    for (y, row) in cells.iter_mut().enumerate() {
        for (x, cell) in row.iter_mut().enumerate() {
            let mut here: Vec<String> = snap.at(x, y).map(|i| i.sprite.clone()).collect();
            if here.is_empty() {
                continue;
            }
            here.sort();
            let found = model.level_mapping.iter().find(|(_, sprites)| {
                let mut s = (*sprites).clone();
                s.sort();
                s == here
            });
            match found {
                Some((&c, _)) => *cell = c,
                None => return Err(EngineError::CellConflict { x, y, sprites: here }),
            }
        }
    }
    Ok(LevelGrid::new(cells))
}

/// ASCII picture of the board; cells without a level character show `?`.
pub fn render(state: &GameState, model: &GameModel) -> String {
    let snap = &state.snapshot;
    let mut out = String::new();
    for y in 0..snap.height {
        for x in 0..snap.width {
            let single = GameState {
                snapshot: Snapshot {
                    width: 1,
                    height: 1,
                    instances: snap
                        .at(x, y)
                        .map(|i| crate::problem::Instance { x: 0, y: 0, ..i.clone() })
                        .collect(),
                    resources: Default::default(),
                    turn: 0,
                },
                status: state.status,
            };
            let c = to_ldf(&single, model).map(|g| g.get(0, 0)).unwrap_or('?');
            out.push(c);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{builtin_games_dir, Game};
    use crate::vgdl::parse_ldf;

    fn sokoban() -> Game {
        Game::load(&builtin_games_dir().join("sokoban")).unwrap()
    }

    fn names(events: &[Event]) -> Vec<String> {
        events.iter().map(|e| e.step.name.clone()).collect()
    }

    #[test]
    fn load_counts_instances() {
        let g = sokoban();
        let e = Engine::new(&g.model, 0);
        let s = e.load(&g.level(0).unwrap()).unwrap();
        let count = |t: &str| s.snapshot.live().filter(|i| i.sprite == t).count();
        assert_eq!((count("avatar"), count("box"), count("hole"), count("wall")), (1, 1, 1, 16));
        assert_eq!(s.turn(), 0);
        assert_eq!(s.status, Status::Ongoing);
    }

    #[test]
    fn pushing_the_last_box_into_a_hole_wins() {
        let g = sokoban();
        let mut e = Engine::new(&g.model, 0);
        let grid = parse_ldf("wwwww\nw A w\nw b w\nw h w\nwwwww\n", &g.model).unwrap();
        let mut s = e.load(&grid).unwrap();
        let ev = e.step(&mut s, AvatarAction::Down).unwrap();
        assert_eq!(
            names(&ev),
            [
                "AVATAR_ACTION_MOVE_DOWN",
                "BOX_AVATAR_BOUNCEFORWARD_DOWN",
                "BOX_HOLE_KILLSPRITE",
                "END-TURN-INTERACTIONS",
                "END-TURN-SPRITES"
            ]
        );
        assert_eq!(ev[1].step.args, ["box_2_2", "avatar", "n2", "n2", "n3"]);
        assert_eq!(ev[2].to_string(), "0:-:BOX_HOLE_KILLSPRITE(box_2_2 hole_2_3 n2 n3)");
        assert!(!s.snapshot.instances.iter().find(|i| i.name == "box_2_2").unwrap().alive);
        assert_eq!(s.status, Status::Win);
        assert_eq!(e.step(&mut s, AvatarAction::Nil), Err(EngineError::GameOver));
    }

    #[test]
    fn nil_only_advances_the_turn() {
        let g = sokoban();
        let mut e = Engine::new(&g.model, 0);
        let mut s = e.load(&g.level(0).unwrap()).unwrap();
        let before = s.clone();
        let ev = e.step(&mut s, AvatarAction::Nil).unwrap();
        assert_eq!(names(&ev), ["AVATAR_ACTION_NIL", "END-TURN-INTERACTIONS", "END-TURN-SPRITES"]);
        assert_eq!(s.turn(), 1);
        s.snapshot.turn = 0;
        assert_eq!(s, before);
    }

    #[test]
    fn walls_stop_the_avatar() {
        let g = sokoban();
        let mut e = Engine::new(&g.model, 0);
        let grid = parse_ldf("www\nwAw\nwww\n", &g.model).unwrap();
        let mut s = e.load(&grid).unwrap();
        let before = s.snapshot.instances.clone();
        let ev = e.step(&mut s, AvatarAction::Left).unwrap();
        assert_eq!(ev[0].step.name, "AVATAR_ACTION_NIL");
        assert_eq!(s.snapshot.instances, before);
    }

    #[test]
    fn moving_avatar_cannot_shoot() {
        let g = sokoban();
        let mut e = Engine::new(&g.model, 0);
        let mut s = e.load(&g.level(0).unwrap()).unwrap();
        assert!(matches!(
            e.step(&mut s, AvatarAction::Use),
            Err(EngineError::IllegalAction { .. })
        ));
    }

    #[test]
    fn level_round_trip() {
        let g = sokoban();
        let e = Engine::new(&g.model, 0);
        for k in 0..2 {
            let grid = g.level(k).unwrap();
            assert_eq!(to_ldf(&e.load(&grid).unwrap(), &g.model).unwrap(), grid);
        }
        let one = LevelGrid::new(vec![vec![' ']]);
        let s = GameState {
            snapshot: Snapshot::from_grid(&one, &g.model).unwrap(),
            status: Status::Ongoing,
        };
        assert_eq!(to_ldf(&s, &g.model).unwrap(), one);
    }

    #[test]
    fn conflicting_cell_is_reported() {
        let g = sokoban();
        let e = Engine::new(&g.model, 0);
        let mut s = e.load(&g.level(0).unwrap()).unwrap();
        let b = s.snapshot.instances.iter_mut().find(|i| i.sprite == "box").unwrap();
        b.x = 1;
        b.y = 1;
        assert!(matches!(to_ldf(&s, &g.model), Err(EngineError::CellConflict { x: 1, y: 1, .. })));
        assert!(render(&s, &g.model).lines().nth(1).unwrap().starts_with("w?"));
    }

    #[test]
    fn pddl_names_map_to_engine_actions() {
        assert_eq!(AvatarAction::from_pddl("AVATAR_ACTION_MOVE_LEFT"), Some(AvatarAction::Left));
        assert_eq!(AvatarAction::from_pddl("avatar_action_use_up"), Some(AvatarAction::Use));
        assert_eq!(AvatarAction::from_pddl("AVATAR_ACTION_NIL"), Some(AvatarAction::Nil));
        assert_eq!(AvatarAction::from_pddl("BOX_HOLE_KILLSPRITE"), None);
    }
}
