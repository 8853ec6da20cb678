use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use vgdl2pddl::agent::{run_episode, EpisodeConfig, Outcome, PlannerChoice, DEFAULT_TURN_BUDGET};
use vgdl2pddl::bench::{builtin_planners, load_suite, read_planners, run_bench, BenchOptions};
use vgdl2pddl::engine::{render, GameState, Status};
use vgdl2pddl::games::{builtin_games_dir, load_level, load_model, read, Game};
use vgdl2pddl::kb::{validate as validate_kb, KnowledgeBase};
use vgdl2pddl::pddl::{ground, print_domain, print_problem, read_domain, read_problem, write_plan, GroundOptions};
use vgdl2pddl::planner::{solve, SearchConfig, SearchMode};
use vgdl2pddl::problem::{generate_problem, ConfigFile, Snapshot};

type AnyError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(name = "vgdl2pddl", version, about = "Compile VGDL games to PDDL, plan, play and benchmark")]
struct Cli {
    /// Project file with `kb`, `games`, `planners` and `out` entries.
    #[arg(long, global = true, env = "VGDL2PDDL_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a game description into `<game>.pddl` and `<game>.yaml`.
    Compile {
        gdf: PathBuf,
        /// Output directory (default: project `out`, else the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Game name (default: the GDF's directory for `game.gdf`, else its stem).
        #[arg(long)]
        name: Option<String>,
    },
    /// Generate a PDDL problem for one level.
    GenProblem {
        #[arg(long)]
        gdf: PathBuf,
        #[arg(long)]
        ldf: PathBuf,
        /// Configuration file written by `compile` (default: derived from the GDF).
        #[arg(long = "game-config")]
        game_config: Option<PathBuf>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a PDDL domain/problem pair with a built-in search.
    Plan {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value = "gbfs")]
        mode: SearchMode,
        /// Time limit in seconds.
        #[arg(long, default_value_t = 60)]
        time: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the plan here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play a level with the planning agent.
    Play {
        #[arg(long)]
        gdf: PathBuf,
        #[arg(long)]
        ldf: PathBuf,
        /// A search mode (bfs, gbfs, astar, goalcount) or an external command
        /// template using {domain}, {problem} and optionally {plan}.
        #[arg(long, default_value = "gbfs")]
        planner: String,
        /// Planner time limit per call, in seconds.
        #[arg(long, default_value_t = 60)]
        time: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TURN_BUDGET)]
        budget: usize,
        /// Write the event trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        render: Option<Render>,
    },
    /// Run planners over a suite of games and score them.
    Bench {
        /// Directory of game directories (default: project `games`, else the shipped games).
        #[arg(long)]
        suite: Option<PathBuf>,
        /// Planner list, one `name = command` per line (default: the built-in searches).
        #[arg(long)]
        planners: Option<PathBuf>,
        /// Time limit per run, in seconds.
        #[arg(long, default_value_t = 900)]
        time: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the knowledge base's template unit tests.
    ValidateKb {
        /// Template directory (default: project `kb`, else the built-in templates).
        #[arg(long)]
        kb: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Render {
    Ascii,
}

#[derive(Debug, Default)]
struct ProjectConfig {
    kb: Option<PathBuf>,
    games: Option<PathBuf>,
    planners: Option<PathBuf>,
    out: Option<PathBuf>,
}

impl ProjectConfig {
    /// `key = path` lines; relative paths are taken from the file's directory.
    fn load(path: &Path) -> Result<ProjectConfig, AnyError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = ProjectConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected `key = path`", path.display(), i + 1))?;
            let p = base.join(v.trim());
            let slot = match k.trim() {
                "kb" => &mut cfg.kb,
                "games" => &mut cfg.games,
                "planners" => &mut cfg.planners,
                "out" => {
                    cfg.out = Some(p);
                    continue;
                }
                other => return Err(format!("{}:{}: unknown key `{other}`", path.display(), i + 1).into()),
            };
            if !p.exists() {
                return Err(format!("{}:{}: {} does not exist", path.display(), i + 1, p.display()).into());
            }
            *slot = Some(p);
        }
        Ok(cfg)
    }

    fn knowledge_base(&self, over: Option<&Path>) -> Result<KnowledgeBase, AnyError> {
        Ok(match over.or(self.kb.as_deref()) {
            Some(dir) => KnowledgeBase::load_dir(dir)?,
            None => KnowledgeBase::builtin(),
        })
    }
}

fn game_name(gdf: &Path) -> String {
    let stem = gdf.file_stem().map(|s| s.to_string_lossy().to_string());
    if stem.as_deref() == Some("game") {
        if let Some(dir) = gdf.parent().and_then(|p| p.file_name()) {
            return dir.to_string_lossy().to_string();
        }
    }
    stem.unwrap_or_else(|| "game".into())
}

fn load_game(gdf: &Path, name: Option<&str>, kb: &KnowledgeBase) -> Result<Game, AnyError> {
    let model = load_model(gdf)?;
    let name = name.map(str::to_string).unwrap_or_else(|| game_name(gdf));
    let dir = gdf.parent().unwrap_or(Path::new("."));
    Ok(Game::from_model(&name, dir, model, kb)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), AnyError> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn run(cli: Cli) -> Result<ExitCode, AnyError> {
    let project = match &cli.config {
        Some(p) => ProjectConfig::load(p)?,
        None => ProjectConfig::default(),
    };
    match cli.command {
        Command::Compile { gdf, out, name } => {
            let kb = project.knowledge_base(None)?;
            let game = load_game(&gdf, name.as_deref(), &kb)?;
            let out = out.or(project.out).unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            let d = out.join(format!("{}.pddl", game.name));
            let c = out.join(format!("{}.yaml", game.name));
            write_file(&d, &print_domain(&game.domain))?;
            write_file(&c, &game.config.to_text())?;
            println!("{}\n{}", d.display(), c.display());
        }
        Command::GenProblem {
            gdf,
            ldf,
            game_config,
            out,
        } => {
            let kb = project.knowledge_base(None)?;
            let game = load_game(&gdf, None, &kb)?;
            let config = match game_config {
                Some(p) => ConfigFile::parse(&read(&p)?).map_err(|e| format!("{}: {e}", p.display()))?,
                None => game.config.clone(),
            };
            let grid = load_level(&ldf, &game.model)?;
            let snap = Snapshot::from_grid(&grid, &game.model)?;
            let text = print_problem(&generate_problem(&snap, &config, &game.model)?);
            match out {
                Some(p) => write_file(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Plan {
            domain,
            problem,
            mode,
            time,
            seed,
            out,
        } => {
            let d = read_domain(&read(&domain)?).map_err(|e| format!("{}: {e}", domain.display()))?;
            let p = read_problem(&read(&problem)?).map_err(|e| format!("{}: {e}", problem.display()))?;
            let task = ground(&d, &p, GroundOptions::default())?;
            let cfg = SearchConfig {
                mode,
                time_limit: Duration::from_secs(time),
                seed,
                ..SearchConfig::default()
            };
            let r = solve(&task, &cfg);
            eprintln!(
                "{}: {} expanded, {} generated, {:.3}s",
                r.status,
                r.stats.expanded,
                r.stats.generated,
                r.stats.wall.as_secs_f64()
            );
            let Some(plan) = r.plan else {
                return Ok(ExitCode::from(1));
            };
            match out {
                Some(o) => write_file(&o, &write_plan(&plan))?,
                None => print!("{}", write_plan(&plan)),
            }
        }
        Command::Play {
            gdf,
            ldf,
            planner,
            time,
            seed,
            budget,
            trace,
            render: style,
        } => {
            let kb = project.knowledge_base(None)?;
            let game = load_game(&gdf, None, &kb)?;
            let grid = load_level(&ldf, &game.model)?;
            let time_limit = Duration::from_secs(time);
            let planner = match planner.parse::<SearchMode>() {
                Ok(mode) => PlannerChoice::Builtin(SearchConfig {
                    mode,
                    time_limit,
                    seed,
                    ..SearchConfig::default()
                }),
                Err(_) => PlannerChoice::External {
                    command: planner,
                    time_limit,
                },
            };
            let cfg = EpisodeConfig {
                planner,
                seed,
                turn_budget: budget,
                ..EpisodeConfig::default()
            };
            let r = run_episode(&game, &grid, &cfg);
            if let Some(Render::Ascii) = style {
                let snaps = r.issued.iter().map(|(s, _)| s).chain(&r.final_snapshot);
                for snap in snaps {
                    let st = GameState {
                        snapshot: snap.clone(),
                        status: Status::Ongoing,
                    };
                    println!("turn {}\n{}", snap.turn, render(&st, &game.model));
                }
            }
            if let Some(t) = trace {
                let text: String = r.trace.iter().map(|e| format!("{e}\n")).collect();
                write_file(&t, &text)?;
            }
            let outcome = match r.outcome {
                Outcome::Win => "win",
                Outcome::Lose => "lose",
                Outcome::PlannerFailed => "planner failed",
                Outcome::TurnBudgetExhausted => "turn budget exhausted",
            };
            println!(
                "outcome: {outcome}\nturns: {}\nreplans: {}\nplan lengths: {:?}",
                r.turns, r.replans, r.plan_lengths
            );
        }
        Command::Bench {
            suite,
            planners,
            time,
            jobs,
            out,
        } => {
            let suite = suite.or(project.games).unwrap_or_else(builtin_games_dir);
            let time_limit = Duration::from_secs(time);
            let planners = match planners.or(project.planners) {
                Some(p) => read_planners(&read(&p)?, time_limit)?,
                None => builtin_planners(time_limit),
            };
            let games = load_suite(&suite)?;
            let out = out.or(project.out).unwrap_or_else(|| PathBuf::from("bench-out"));
            let board = run_bench(&games, &planners, &BenchOptions { jobs, out: out.clone() })?;
            print!("{}", std::fs::read_to_string(out.join("report.txt"))?);
            eprintln!("{} runs recorded in {}", board.results.len(), out.display());
        }
        Command::ValidateKb { kb } => {
            let kb = project.knowledge_base(kb.as_deref())?;
            let report = validate_kb(&kb);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for r in &report.results {
                let mark = if r.passed { "ok  " } else { "FAIL" };
                println!("{mark} {} {}", r.template, r.message);
            }
            if !report.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
