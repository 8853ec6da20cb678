use std::collections::BTreeMap;

use crate::compiler::{projectile, projectile_object, resource_sprites};
use crate::vgdl::{Direction, GameModel, LevelGrid, VgdlType};

use super::{ProblemError, Result};

/// One sprite instance on the board.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    /// PDDL object name (`box_2_2`, `avatar`, ...).
    pub name: String,
    pub sprite: String,
    pub x: usize,
    pub y: usize,
    pub orientation: Option<Direction>,
    pub alive: bool,
}

/// Everything problem generation needs to know about a game situation;
/// built from a level file or from a running game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub width: usize,
    pub height: usize,
    /// Live and dead instances in creation order.
    pub instances: Vec<Instance>,
    /// Collected amount per resource sprite.
    pub resources: BTreeMap<String, usize>,
    pub turn: usize,
}

/// Orientation a freshly created instance of `sprite` starts with.
pub fn initial_orientation(model: &GameModel, sprite: &str) -> Option<Direction> {
    let s = model.sprite(sprite)?;
    match s.vgdl_type {
        VgdlType::Missile => Some(s.orientation().unwrap_or(Direction::Right)),
        VgdlType::ShootAvatar => Some(s.orientation().unwrap_or(Direction::Up)),
        _ => s.orientation(),
    }
}

/// Object name of an instance created from a level cell.
pub fn object_name(model: &GameModel, sprite: &str, x: usize, y: usize) -> String {
    if model.sprite(sprite).is_some_and(|s| s.vgdl_type.is_avatar()) {
        "avatar".to_string()
    } else {
        format!("{sprite}_{x}_{y}")
    }
}

impl Snapshot {
    /// Turn-0 situation of a level: one instance per mapped sprite per cell,
    /// in row-major order, plus the avatar's reserve projectile.
    pub fn from_grid(grid: &LevelGrid, model: &GameModel) -> Result<Snapshot> {
        let mut instances = Vec::new();
        for y in 0..grid.height {
            for x in 0..grid.width {
                let ch = grid.get(x, y);
                let Some(sprites) = model.level_mapping.get(&ch) else {
                    if LevelGrid::is_empty_char(model, ch) {
                        continue;
                    }
                    return Err(ProblemError::UnmappedCharacter { ch, x, y });
                };
                for s in sprites {
                    instances.push(Instance {
                        name: object_name(model, s, x, y),
                        sprite: s.clone(),
                        x,
                        y,
                        orientation: initial_orientation(model, s),
                        alive: true,
                    });
                }
            }
        }
        if let Some(shot) = projectile(model) {
            instances.push(Instance {
                name: projectile_object(&shot),
                sprite: shot,
                x: 0,
                y: 0,
                orientation: None,
                alive: false,
            });
        }
        Ok(Snapshot {
            width: grid.width,
            height: grid.height,
            instances,
            resources: resource_sprites(model).into_iter().map(|r| (r, 0)).collect(),
            turn: 0,
        })
    }

    pub fn live(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(|i| i.alive)
    }

    pub fn at(&self, x: usize, y: usize) -> impl Iterator<Item = &Instance> {
        self.live().filter(move |i| i.x == x && i.y == y)
    }
}
