//! Benchmark harness: games × levels × planners, scored the way the
//! planning competitions score satisficing tracks.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use log::{info, warn};
use thiserror::Error;

use crate::agent::{plan_for, PlannerChoice};
use crate::compiler::{domain_stats, DomainStats};
use crate::games::{load_level, Game, LoadError};
use crate::planner::{parse_planner_list, PlanStatus, PlannerError, SearchConfig, SearchMode};
use crate::problem::Snapshot;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: malformed row {row}")]
    Row { path: PathBuf, row: usize },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Planners(#[from] PlannerError),
    #[error("no games found in {0}")]
    EmptySuite(PathBuf),
}

pub type Result<T> = std::result::Result<T, BenchError>;

const AGILE_CUTOFF: f64 = 900.0;

/// Number of solved runs.
pub fn score_coverage(results: &[RunResult]) -> usize {
    results.iter().filter(|r| r.solved).count()
}

/// `reference / found`: 1 for the best known plan, smaller for longer ones,
/// 0 when nothing was found.
pub fn score_satisficing(found: Option<usize>, reference: usize) -> f64 {
    match found {
        Some(c) if c > 0 => (reference.max(1) as f64 / c as f64).min(1.0),
        Some(_) => 1.0,
        None => 0.0,
    }
}

/// 1 up to a second, then logarithmic decay down to 0 at 900 s.
pub fn score_agile(seconds: f64) -> f64 {
    if seconds <= 1.0 {
        1.0
    } else if seconds <= AGILE_CUTOFF {
        1.0 - seconds.ln() / AGILE_CUTOFF.ln()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub planner: String,
    pub game: String,
    pub level: usize,
    pub solved: bool,
    pub plan_length: Option<usize>,
    pub seconds: f64,
}

impl RunResult {
    fn key(&self) -> (String, String, usize) {
        (self.planner.clone(), self.game.clone(), self.level)
    }
}

/// How a level's reference length was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Blind breadth-first search solved it, so the length is optimal.
    Optimal,
    BestFound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub levels: usize,
    pub coverage: usize,
    pub satisficing: f64,
    pub agile: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBoard {
    pub results: Vec<RunResult>,
    pub references: BTreeMap<(String, usize), (usize, ReferenceKind)>,
    /// Keyed by (planner, game).
    pub aggregates: BTreeMap<(String, String), Aggregate>,
}

impl ScoreBoard {
    pub fn new(mut results: Vec<RunResult>) -> ScoreBoard {
        results.sort_by_key(|r| r.key());
        let bfs = SearchMode::BlindBfs.as_str();
        let mut references: BTreeMap<(String, usize), (usize, ReferenceKind)> = BTreeMap::new();
        for r in results.iter().filter(|r| r.solved) {
            let Some(len) = r.plan_length else { continue };
            let kind = if r.planner == bfs {
                ReferenceKind::Optimal
            } else {
                ReferenceKind::BestFound
            };
            let e = references.entry((r.game.clone(), r.level)).or_insert((len, kind));
            if len < e.0 {
                *e = (len, kind);
            } else if len == e.0 && kind == ReferenceKind::Optimal {
                e.1 = kind;
            }
        }
        let mut aggregates: BTreeMap<(String, String), Aggregate> = BTreeMap::new();
        for r in &results {
            let a = aggregates.entry((r.planner.clone(), r.game.clone())).or_insert(Aggregate {
                levels: 0,
                coverage: 0,
                satisficing: 0.0,
                agile: 0.0,
            });
            a.levels += 1;
            if r.solved {
                a.coverage += 1;
                let reference = references.get(&(r.game.clone(), r.level)).map_or(1, |x| x.0);
                a.satisficing += score_satisficing(r.plan_length, reference);
                a.agile += score_agile(r.seconds);
            }
        }
        ScoreBoard {
            results,
            references,
            aggregates,
        }
    }

    pub fn planners(&self) -> Vec<String> {
        let s: BTreeSet<_> = self.results.iter().map(|r| r.planner.clone()).collect();
        s.into_iter().collect()
    }

    pub fn games(&self) -> Vec<String> {
        let s: BTreeSet<_> = self.results.iter().map(|r| r.game.clone()).collect();
        s.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchPlanner {
    pub name: String,
    pub choice: PlannerChoice,
}

/// The four built-in search configurations.
pub fn builtin_planners(time_limit: Duration) -> Vec<BenchPlanner> {
    SearchMode::ALL
        .iter()
        .map(|&mode| BenchPlanner {
            name: mode.as_str().to_string(),
            choice: PlannerChoice::Builtin(SearchConfig {
                mode,
                time_limit,
                ..SearchConfig::default()
            }),
        })
        .collect()
}

/// Reads a planner list. `builtin:<mode>` selects a built-in search, any
/// other command is run as an external planner.
pub fn read_planners(text: &str, time_limit: Duration) -> Result<Vec<BenchPlanner>> {
    let mut out = Vec::new();
    for p in parse_planner_list(text)? {
        let choice = match p.command.strip_prefix("builtin:") {
            Some(mode) => {
                let mode = mode.trim().parse().map_err(|e: String| PlannerError::Config {
                    line: 0,
                    msg: format!("{}: {e}", p.name),
                })?;
                PlannerChoice::Builtin(SearchConfig {
                    mode,
                    time_limit,
                    ..SearchConfig::default()
                })
            }
            None => PlannerChoice::External {
                command: p.command,
                time_limit,
            },
        };
        out.push(BenchPlanner { name: p.name, choice });
    }
    Ok(out)
}

/// Games are the subdirectories of `suite` holding a `game.gdf`.
pub fn load_suite(suite: &Path) -> Result<Vec<Game>> {
    let rd = std::fs::read_dir(suite).map_err(|source| BenchError::Io {
        path: suite.to_path_buf(),
        source,
    })?;
    let mut dirs: Vec<PathBuf> = rd
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.join("game.gdf").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(BenchError::EmptySuite(suite.to_path_buf()));
    }
    dirs.iter().map(|d| Ok(Game::load(d)?)).collect()
}

/// Plans one level and times problem generation, grounding and search.
pub fn run_one(game: &Game, level: &Path, level_index: usize, planner: &BenchPlanner) -> Result<RunResult> {
    let grid = load_level(level, &game.model)?;
    let snap = Snapshot::from_grid(&grid, &game.model).map_err(LoadError::from)?;
    let start = Instant::now();
    let r = plan_for(game, &snap, &planner.choice);
    let seconds = start.elapsed().as_secs_f64();
    let (solved, plan_length) = match r {
        Some(r) if r.status == PlanStatus::Solved => (true, r.plan.map(|p| p.len())),
        Some(r) => {
            info!("{} {} level{level_index}: {}", planner.name, game.name, r.status);
            (false, None)
        }
        None => (false, None),
    };
    Ok(RunResult {
        planner: planner.name.clone(),
        game: game.name.clone(),
        level: level_index,
        solved,
        plan_length,
        seconds,
    })
}

const HEADER: [&str; 6] = ["planner", "game", "level", "solved", "plan_length", "seconds"];

pub fn read_results(path: &Path) -> Result<Vec<RunResult>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let csv_err = |source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = || BenchError::Row {
            path: path.to_path_buf(),
            row: i + 2,
        };
        if rec.len() != HEADER.len() {
            return Err(bad());
        }
        out.push(RunResult {
            planner: rec[0].to_string(),
            game: rec[1].to_string(),
            level: rec[2].parse().map_err(|_| bad())?,
            solved: rec[3].parse().map_err(|_| bad())?,
            plan_length: if rec[4].is_empty() {
                None
            } else {
                Some(rec[4].parse().map_err(|_| bad())?)
            },
            seconds: rec[5].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

fn result_row(r: &RunResult) -> [String; 6] {
    [
        r.planner.clone(),
        r.game.clone(),
        r.level.to_string(),
        r.solved.to_string(),
        r.plan_length.map(|l| l.to_string()).unwrap_or_default(),
        format!("{:.6}", r.seconds),
    ]
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub jobs: usize,
    pub out: PathBuf,
}

/// Runs every (planner, game, level) not already present in
/// `out/results.csv`, appending one row per run, then rewrites the summary
/// and the report from the complete result store.
pub fn run_bench(games: &[Game], planners: &[BenchPlanner], opts: &BenchOptions) -> Result<ScoreBoard> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| BenchError::Io { path, source }
    };
    std::fs::create_dir_all(&opts.out).map_err(io(&opts.out))?;
    let results_path = opts.out.join("results.csv");
    let done: HashSet<(String, String, usize)> = read_results(&results_path)?.iter().map(RunResult::key).collect();

    let mut jobs = Vec::new();
    for g in games {
        for (k, level) in g.level_paths().into_iter().enumerate() {
            for p in planners {
                if !done.contains(&(p.name.clone(), g.name.clone(), k)) {
                    jobs.push((g, level.clone(), k, p));
                }
            }
        }
    }
    info!("{} runs to do, {} already recorded", jobs.len(), done.len());

    let fresh = !results_path.exists();
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&results_path)
        .map_err(io(&results_path))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(HEADER).and_then(|_| Ok(w.flush()?)).map_err(|source| BenchError::Csv {
            path: results_path.clone(),
            source,
        })?;
    }
    let writer = Mutex::new(w);
    let next = AtomicUsize::new(0);
    let first_error: Mutex<Option<BenchError>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..opts.jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((g, level, k, p)) = jobs.get(i) else { break };
                let outcome = run_one(g, level, *k, p).and_then(|r| {
                    let mut w = writer.lock().unwrap();
                    w.write_record(result_row(&r))
                        .and_then(|_| Ok(w.flush()?))
                        .map_err(|source| BenchError::Csv {
                            path: results_path.clone(),
                            source,
                        })
                });
                if let Err(e) = outcome {
                    warn!("{e}");
                    first_error.lock().unwrap().get_or_insert(e);
                }
            });
        }
    });
    drop(writer);
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }

    let board = ScoreBoard::new(read_results(&results_path)?);
    let summary = opts.out.join("summary.csv");
    std::fs::write(&summary, summary_csv(&board)).map_err(io(&summary))?;
    let report = opts.out.join("report.txt");
    std::fs::write(&report, report_text(&board, games)).map_err(io(&report))?;
    Ok(board)
}

pub fn summary_csv(board: &ScoreBoard) -> String {
    let mut s = String::from("planner,game,levels,coverage,satisficing,agile\n");
    for ((p, g), a) in &board.aggregates {
        let _ = writeln!(s, "{p},{g},{},{},{:.4},{:.4}", a.levels, a.coverage, a.satisficing, a.agile);
    }
    s
}

/// Object counts for one level: ours against one object per sprite instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectReduction {
    pub naive: usize,
    pub declared: usize,
}

impl ObjectReduction {
    pub fn percent(&self) -> f64 {
        if self.naive == 0 {
            return 0.0;
        }
        100.0 * (1.0 - self.declared as f64 / self.naive as f64)
    }
}

pub fn object_reduction(game: &Game, level: &Path) -> Result<ObjectReduction> {
    let grid = load_level(level, &game.model)?;
    let snap = Snapshot::from_grid(&grid, &game.model).map_err(LoadError::from)?;
    let problem = game.problem(&snap)?;
    Ok(ObjectReduction {
        naive: snap.instances.len(),
        declared: problem.objects.iter().filter(|o| o.ty != "num").count(),
    })
}

fn table(out: &mut String, title: &str, board: &ScoreBoard, cell: impl Fn(&Aggregate) -> f64, decimals: usize) {
    let planners = board.planners();
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "{:<12}", "game");
    for p in &planners {
        let _ = write!(out, " {p:>10}");
    }
    out.push('\n');
    let mut totals = vec![0.0; planners.len()];
    for g in board.games() {
        let _ = write!(out, "{g:<12}");
        for (i, p) in planners.iter().enumerate() {
            let v = board.aggregates.get(&(p.clone(), g.clone())).map_or(0.0, &cell);
            totals[i] += v;
            let _ = write!(out, " {v:>10.decimals$}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<12}", "total");
    for t in totals {
        let _ = write!(out, " {t:>10.decimals$}");
    }
    out.push_str("\n\n");
}

pub fn report_text(board: &ScoreBoard, games: &[Game]) -> String {
    let mut out = String::new();
    table(&mut out, "Coverage", board, |a| a.coverage as f64, 0);
    table(&mut out, "Satisficing", board, |a| a.satisficing, 2);
    table(&mut out, "Agile", board, |a| a.agile, 2);

    out.push_str("References\n");
    for ((g, l), (len, kind)) in &board.references {
        let kind = match kind {
            ReferenceKind::Optimal => "optimal",
            ReferenceKind::BestFound => "best found",
        };
        let _ = writeln!(out, "{g:<12} level{l:<3} {len:>5}  {kind}");
    }
    out.push('\n');

    out.push_str("Domains\n");
    let _ = writeln!(out, "{:<12} {:>6} {:>10} {:>10} {:>8}", "game", "types", "supertypes", "predicates", "actions");
    for g in games {
        let DomainStats {
            types,
            supertypes,
            predicates,
            actions,
        } = domain_stats(&g.domain);
        let _ = writeln!(out, "{:<12} {types:>6} {supertypes:>10} {predicates:>10} {actions:>8}", g.name);
    }
    out.push('\n');

    out.push_str("Objects (one per sprite instance vs declared)\n");
    for g in games {
        for (k, level) in g.level_paths().iter().enumerate() {
            match object_reduction(g, level) {
                Ok(r) => {
                    let _ = writeln!(
                        out,
                        "{:<12} level{k:<3} {:>5} {:>5}  -{:.0}%",
                        g.name,
                        r.naive,
                        r.declared,
                        r.percent()
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{:<12} level{k:<3} {e}", g.name);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::builtin_games_dir;

    fn run(planner: &str, level: usize, len: Option<usize>, seconds: f64) -> RunResult {
        RunResult {
            planner: planner.into(),
            game: "g".into(),
            level,
            solved: len.is_some(),
            plan_length: len,
            seconds,
        }
    }

    #[test]
    fn agile_branches() {
        assert_eq!(score_agile(0.0), 1.0);
        assert_eq!(score_agile(1.0), 1.0);
        assert!(score_agile(900.0).abs() < 1e-12);
        assert_eq!(score_agile(901.0), 0.0);
        // Base-10 logs give the same ratio.
        let expect = 1.0 - 30f64.log10() / 900f64.log10();
        assert!((score_agile(30.0) - expect).abs() < 1e-12);
        assert!((score_agile(30.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn satisficing_ratio() {
        assert_eq!(score_satisficing(Some(7), 7), 1.0);
        assert_eq!(score_satisficing(Some(14), 7), 0.5);
        assert_eq!(score_satisficing(None, 7), 0.0);
    }

    #[test]
    fn coverage_counts_solved_runs() {
        let rs = [run("a", 0, Some(3), 0.1), run("a", 1, Some(4), 0.1), run("a", 2, None, 0.1)];
        assert_eq!(score_coverage(&rs), 2);
        assert_eq!(score_coverage(&rs[2..]), 0);
    }

    #[test]
    fn reference_is_the_shortest_plan_of_any_planner() {
        let b = ScoreBoard::new(vec![run("x", 0, Some(10), 2.0), run("y", 0, Some(5), 0.5)]);
        assert_eq!(b.references[&("g".to_string(), 0)], (5, ReferenceKind::BestFound));
        let x = b.aggregates[&("x".to_string(), "g".to_string())];
        assert_eq!(x.satisficing, 0.5);
        assert_eq!(b.aggregates[&("y".to_string(), "g".to_string())].satisficing, 1.0);
        assert_eq!(x.agile, 1.0 - 2f64.ln() / 900f64.ln());

        let b = ScoreBoard::new(vec![run("gbfs", 0, Some(5), 0.1), run("bfs", 0, Some(5), 0.1)]);
        assert_eq!(b.references[&("g".to_string(), 0)].1, ReferenceKind::Optimal);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        let rs = vec![run("a", 0, Some(3), 0.25), run("b", 1, None, 1.5)];
        let mut w = csv::Writer::from_path(&path).unwrap();
        w.write_record(HEADER).unwrap();
        for r in &rs {
            w.write_record(result_row(r)).unwrap();
        }
        w.flush().unwrap();
        assert_eq!(read_results(&path).unwrap(), rs);
        std::fs::write(&path, "planner,game,level,solved,plan_length,seconds\na,g,x,true,1,0\n").unwrap();
        assert!(matches!(read_results(&path), Err(BenchError::Row { row: 2, .. })));
    }

    #[test]
    fn planner_list_mixes_builtin_and_external() {
        let ps = read_planners("fast = builtin:gbfs\nfd = fd {domain} {problem} {plan}\n", Duration::from_secs(5)).unwrap();
        assert!(matches!(&ps[0].choice, PlannerChoice::Builtin(c) if c.mode == SearchMode::GbfsHadd));
        assert!(matches!(&ps[1].choice, PlannerChoice::External { .. }));
        assert!(read_planners("x = builtin:nope\n", Duration::from_secs(1)).is_err());
    }

    #[test]
    fn sokoban_drops_the_walls() {
        let g = Game::load(&builtin_games_dir().join("sokoban")).unwrap();
        let r = object_reduction(&g, &g.level_paths()[0]).unwrap();
        assert_eq!(r, ObjectReduction { naive: 19, declared: 3 });
        assert!(r.percent() > 75.0);
    }

    #[test]
    fn bench_resumes_without_rerunning() {
        let dir = tempfile::tempdir().unwrap();
        let g = Game::load(&builtin_games_dir().join("sokoban")).unwrap();
        let games = [g];
        let planners = builtin_planners(Duration::from_secs(30));
        let opts = BenchOptions {
            jobs: 3,
            out: dir.path().to_path_buf(),
        };
        let first = run_bench(&games, &planners[..2], &opts).unwrap();
        assert_eq!(first.results.len(), 4);
        let a = &first.aggregates[&("bfs".to_string(), "sokoban".to_string())];
        assert_eq!((a.levels, a.coverage), (2, 2));
        assert_eq!(a.satisficing, 2.0);

        let again = run_bench(&games, &planners[..2], &opts).unwrap();
        assert_eq!(again, first);
        let more = run_bench(&games, &planners, &opts).unwrap();
        assert_eq!(more.results.len(), 8);
        for (k, v) in &first.aggregates {
            assert!(more.aggregates[k].satisficing <= v.satisficing + 1e-12);
        }
        let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(report.contains("Coverage") && report.contains("sokoban"));
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 5);
    }
}
