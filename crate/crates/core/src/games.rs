//! Loading games from disk and building their planning tasks.
//!
//! A game directory holds `game.gdf` and levels `level<k>.ldf`; the
//! directory name is the game's name.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::compiler::{compile_domain_with, CompileError};
use crate::kb::KnowledgeBase;
use crate::pddl::{ground, Domain, GroundOptions, GroundedTask, PddlError, Problem};
use crate::problem::{emit_config, generate_problem, ConfigFile, ProblemError, Snapshot};
use crate::vgdl::{parse_gdf, parse_ldf, GameModel, LevelGrid, VgdlError};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Vgdl { path: PathBuf, source: VgdlError },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Pddl(#[from] PddlError),
}

pub type Result<T> = std::result::Result<T, LoadError>;

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<GameModel> {
    parse_gdf(&read(path)?).map_err(|source| LoadError::Vgdl {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_level(path: &Path, model: &GameModel) -> Result<LevelGrid> {
    parse_ldf(&read(path)?, model).map_err(|source| LoadError::Vgdl {
        path: path.to_path_buf(),
        source,
    })
}

/// A compiled game: model, domain and problem configuration.
#[derive(Debug, Clone)]
pub struct Game {
    pub name: String,
    pub dir: PathBuf,
    pub model: GameModel,
    pub domain: Domain,
    pub config: ConfigFile,
}

impl Game {
    pub fn load(dir: &Path) -> Result<Game> {
        Game::load_with(dir, &KnowledgeBase::builtin())
    }

    pub fn load_with(dir: &Path, kb: &KnowledgeBase) -> Result<Game> {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| "game".into());
        let model = load_model(&dir.join("game.gdf"))?;
        Game::from_model(&name, dir, model, kb)
    }

    pub fn from_model(name: &str, dir: &Path, model: GameModel, kb: &KnowledgeBase) -> Result<Game> {
        let domain = compile_domain_with(&model, name, kb)?;
        let config = emit_config(&model, name, kb)?;
        Ok(Game {
            name: name.to_string(),
            dir: dir.to_path_buf(),
            model,
            domain,
            config,
        })
    }

    /// Level files sorted by index.
    pub fn level_paths(&self) -> Vec<PathBuf> {
        let mut out: Vec<(usize, PathBuf)> = std::fs::read_dir(&self.dir)
            .into_iter()
            .flatten()
            .flatten()
            .map(|e| e.path())
            .filter_map(|p| {
                let stem = p.file_stem()?.to_str()?.strip_prefix("level")?.parse().ok()?;
                (p.extension()? == "ldf").then_some((stem, p))
            })
            .collect();
        out.sort();
        out.into_iter().map(|(_, p)| p).collect()
    }

    pub fn level(&self, k: usize) -> Result<LevelGrid> {
        load_level(&self.dir.join(format!("level{k}.ldf")), &self.model)
    }

    pub fn problem(&self, snap: &Snapshot) -> Result<Problem> {
        Ok(generate_problem(snap, &self.config, &self.model)?)
    }

    pub fn level_problem(&self, grid: &LevelGrid) -> Result<Problem> {
        self.problem(&Snapshot::from_grid(grid, &self.model)?)
    }

    pub fn task(&self, problem: &Problem) -> Result<GroundedTask> {
        Ok(ground(&self.domain, problem, GroundOptions::default())?)
    }
}

/// The games shipped with the crate.
pub fn builtin_games_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("games")
}
