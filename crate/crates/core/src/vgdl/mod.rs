//! VGDL game and level descriptions.
//!
//! A game description (GDF) has four sections: `SpriteSet`, `LevelMapping`,
//! `InteractionSet` and `TerminationSet`. A level description (LDF) is a
//! rectangular character grid whose characters are resolved through the
//! game's level mapping.

mod gdf;
mod ldf;
mod print;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use gdf::parse_gdf;
pub use ldf::{parse_ldf, LevelGrid};
pub use print::print_gdf;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VgdlError {
    #[error("empty game description")]
    Empty,
    #[error("missing section {0}")]
    MissingSection(String),
    #[error("line {line}: indentation error: {msg}")]
    IndentationError { line: usize, msg: String },
    #[error("line {line}: unknown sprite type `{name}`")]
    UnknownSpriteType { line: usize, name: String },
    #[error("line {line}: unknown interaction type `{name}`")]
    UnknownInteractionType { line: usize, name: String },
    #[error("line {line}: unknown termination type `{name}`")]
    UnknownTerminationType { line: usize, name: String },
    #[error("line {line}: reference to undeclared sprite `{name}`")]
    DanglingReference { line: usize, name: String },
    #[error("line {line}: sprite `{name}` declared twice")]
    DuplicateSprite { line: usize, name: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: interaction `{kind}` requires parameter `{param}`")]
    MissingParam { line: usize, kind: String, param: String },
    #[error("line {line}: receiver and producer of an interaction must differ (`{name}`)")]
    SelfInteraction { line: usize, name: String },
    #[error("the game declares no avatar sprite")]
    NoAvatar,
    #[error("the game declares no winning termination")]
    NoWinTermination,
    #[error("level row {row} has {found} columns, expected {expected}")]
    RaggedGrid { row: usize, found: usize, expected: usize },
    #[error("level is empty")]
    EmptyLevel,
    #[error("unmapped character `{ch}` at column {x}, row {y}")]
    UnmappedCharacter { ch: char, x: usize, y: usize },
}

pub type Result<T> = std::result::Result<T, VgdlError>;

/// The subset of VGDL sprite classes the toolchain understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VgdlType {
    Immovable,
    Passive,
    Resource,
    Missile,
    Bomber,
    RandomNPC,
    MovingAvatar,
    ShootAvatar,
    FlakAvatar,
}

impl VgdlType {
    pub const ALL: [VgdlType; 9] = [
        VgdlType::Immovable,
        VgdlType::Passive,
        VgdlType::Resource,
        VgdlType::Missile,
        VgdlType::Bomber,
        VgdlType::RandomNPC,
        VgdlType::MovingAvatar,
        VgdlType::ShootAvatar,
        VgdlType::FlakAvatar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VgdlType::Immovable => "Immovable",
            VgdlType::Passive => "Passive",
            VgdlType::Resource => "Resource",
            VgdlType::Missile => "Missile",
            VgdlType::Bomber => "Bomber",
            VgdlType::RandomNPC => "RandomNPC",
            VgdlType::MovingAvatar => "MovingAvatar",
            VgdlType::ShootAvatar => "ShootAvatar",
            VgdlType::FlakAvatar => "FlakAvatar",
        }
    }

    pub fn is_avatar(self) -> bool {
        matches!(
            self,
            VgdlType::MovingAvatar | VgdlType::ShootAvatar | VgdlType::FlakAvatar
        )
    }

    pub fn can_shoot(self) -> bool {
        matches!(self, VgdlType::ShootAvatar | VgdlType::FlakAvatar)
    }
}

impl fmt::Display for VgdlType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VgdlType {
    type Err = ();
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        VgdlType::ALL
            .iter()
            .copied()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

/// Grid direction. `Up` decreases the row index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn lower(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    pub fn upper(self) -> &'static str {
        match self {
            Direction::Up => "UP",
            Direction::Down => "DOWN",
            Direction::Left => "LEFT",
            Direction::Right => "RIGHT",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        Direction::ALL
            .iter()
            .copied()
            .find(|d| d.lower().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpriteDef {
    pub name: String,
    pub vgdl_type: VgdlType,
    /// Functional and visual parameters, inherited ones materialized.
    pub params: BTreeMap<String, String>,
    pub parent: Option<String>,
    pub children: Vec<String>,
}

impl SpriteDef {
    pub fn is_abstract(&self) -> bool {
        !self.children.is_empty()
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// Fixed orientation from the `orientation` parameter, if any.
    pub fn orientation(&self) -> Option<Direction> {
        self.param("orientation").and_then(Direction::parse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InteractionKind {
    KillSprite,
    KillBoth,
    KillIfFromAbove,
    KillIfOtherHasMore,
    StepBack,
    BounceForward,
    CollectResource,
}

impl InteractionKind {
    pub const ALL: [InteractionKind; 7] = [
        InteractionKind::KillSprite,
        InteractionKind::KillBoth,
        InteractionKind::KillIfFromAbove,
        InteractionKind::KillIfOtherHasMore,
        InteractionKind::StepBack,
        InteractionKind::BounceForward,
        InteractionKind::CollectResource,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::KillSprite => "killSprite",
            InteractionKind::KillBoth => "killBoth",
            InteractionKind::KillIfFromAbove => "killIfFromAbove",
            InteractionKind::KillIfOtherHasMore => "killIfOtherHasMore",
            InteractionKind::StepBack => "stepBack",
            InteractionKind::BounceForward => "bounceForward",
            InteractionKind::CollectResource => "collectResource",
        }
    }

    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            InteractionKind::KillIfOtherHasMore => &["resource", "limit"],
            _ => &[],
        }
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InteractionKind {
    type Err = ();
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        InteractionKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionDef {
    /// First-listed sprite; receives the main effects.
    pub receiver: String,
    /// Second-listed sprite; responsible for the interaction.
    pub producer: String,
    pub kind: InteractionKind,
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationKind {
    SpriteCounter,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminationDef {
    pub kind: TerminationKind,
    pub stype: Option<String>,
    pub limit: u32,
    pub win: bool,
}

/// A parsed game with its sprite hierarchy resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameModel {
    /// Sprites in declaration (pre-order) order.
    pub sprites: Vec<SpriteDef>,
    pub level_mapping: BTreeMap<char, Vec<String>>,
    pub interactions: Vec<InteractionDef>,
    pub terminations: Vec<TerminationDef>,
}

impl GameModel {
    pub fn sprite(&self, name: &str) -> Option<&SpriteDef> {
        self.sprites.iter().find(|s| s.name == name)
    }

    /// Concrete (instantiable) sprites: those without children.
    pub fn leaves(&self) -> impl Iterator<Item = &SpriteDef> {
        self.sprites.iter().filter(|s| !s.is_abstract())
    }

    /// True when `name` equals `ancestor` or descends from it.
    pub fn is_a(&self, name: &str, ancestor: &str) -> bool {
        let mut cur = Some(name);
        while let Some(n) = cur {
            if n == ancestor {
                return true;
            }
            cur = self.sprite(n).and_then(|s| s.parent.as_deref());
        }
        false
    }

    /// Leaf sprites that are `name` or descend from it.
    pub fn leaf_descendants(&self, name: &str) -> Vec<&SpriteDef> {
        self.leaves().filter(|s| self.is_a(&s.name, name)).collect()
    }

    /// The (first) concrete avatar sprite.
    pub fn avatar(&self) -> Option<&SpriteDef> {
        self.leaves().find(|s| s.vgdl_type.is_avatar())
    }

    /// Interactions in which `name` (or an ancestor) is the receiver.
    pub fn interactions_received_by<'a>(
        &'a self,
        name: &'a str,
    ) -> impl Iterator<Item = &'a InteractionDef> + 'a {
        self.interactions
            .iter()
            .filter(move |i| self.is_a(name, &i.receiver))
    }

    /// Interactions with duplicates of the same (receiver, producer) pair
    /// removed; the last declaration wins.
    pub fn effective_interactions(&self) -> Vec<&InteractionDef> {
        self.interactions
            .iter()
            .enumerate()
            .filter(|(i, a)| {
                !self.interactions[i + 1..]
                    .iter()
                    .any(|b| b.receiver == a.receiver && b.producer == a.producer)
            })
            .map(|(_, a)| a)
            .collect()
    }

    /// Interactions shadowed by a later declaration of the same pair.
    pub fn shadowed_interactions(&self) -> Vec<&InteractionDef> {
        let live = self.effective_interactions();
        self.interactions
            .iter()
            .filter(|i| !live.iter().any(|l| std::ptr::eq(*l, *i)))
            .collect()
    }

    /// A sprite compiled to a static cell predicate: an `Immovable` leaf that
    /// never receives an interaction and only ever blocks movement.
    pub fn is_static(&self, name: &str) -> bool {
        let Some(sprite) = self.sprite(name) else {
            return false;
        };
        if sprite.is_abstract() || sprite.vgdl_type != VgdlType::Immovable {
            return false;
        }
        self.effective_interactions().into_iter().all(|i| {
            !self.is_a(name, &i.receiver)
                && (!self.is_a(name, &i.producer) || i.kind == InteractionKind::StepBack)
        })
    }
}
