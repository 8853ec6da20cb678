use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use log::{debug, warn};
use thiserror::Error;

use crate::pddl::{parse_plan, GroundedTask};

use super::{validate, PlanResult, PlanStatus, SearchStats};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlannerError {
    #[error("could not start planner: {0}")]
    Spawn(String),
    #[error("could not read the planner's plan: {0}")]
    Parse(String),
    #[error("external plan rejected at step {index}")]
    ValidationFailed { index: usize },
    #[error("planner list line {line}: {msg}")]
    Config { line: usize, msg: String },
}

/// A named command template. `{domain}`, `{problem}` and `{plan}` are
/// replaced by file paths; without `{plan}` the plan is read from stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalPlanner {
    pub name: String,
    pub command: String,
}

/// Reads `name = command template` lines; `#` starts a comment line.
pub fn parse_planner_list(text: &str) -> Result<Vec<ExternalPlanner>, PlannerError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, cmd) = line.split_once('=').ok_or_else(|| PlannerError::Config {
            line: i + 1,
            msg: "expected `name = command`".into(),
        })?;
        out.push(ExternalPlanner {
            name: name.trim().to_string(),
            command: cmd.trim().to_string(),
        });
    }
    Ok(out)
}

fn scratch_plan_path() -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("vgdl2pddl-{}-{n}.plan", std::process::id()))
}

fn kill_group(child: &mut std::process::Child) {
    // The child leads its own process group; take the whole group down so
    // grandchildren started by the shell die too.
    let _ = Command::new("kill")
        .args(["-s", "KILL", "--"])
        .arg(format!("-{}", child.id()))
        .stderr(Stdio::null())
        .status();
    let _ = child.kill();
    let _ = child.wait();
}

/// Runs an external planner on a domain/problem pair and validates its plan
/// against `task` (the grounding of the same pair).
pub fn external_solve(
    domain: &Path,
    problem: &Path,
    cmd_template: &str,
    time_limit: Duration,
    task: &GroundedTask,
) -> Result<PlanResult, PlannerError> {
    let plan_path = scratch_plan_path();
    let _ = std::fs::remove_file(&plan_path);
    let uses_file = cmd_template.contains("{plan}");
    let cmd = cmd_template
        .replace("{domain}", &domain.display().to_string())
        .replace("{problem}", &problem.display().to_string())
        .replace("{plan}", &plan_path.display().to_string());
    debug!("running `{cmd}`");
    let start = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .stdin(Stdio::null())
        .stdout(if uses_file { Stdio::null() } else { Stdio::piped() })
        .stderr(Stdio::null())
        .process_group(0)
        .spawn()
        .map_err(|e| PlannerError::Spawn(e.to_string()))?;

    let stdout_reader = child.stdout.take().map(|mut out| {
        std::thread::spawn(move || {
            let mut s = String::new();
            let _ = std::io::Read::read_to_string(&mut out, &mut s);
            s
        })
    });
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() >= time_limit => {
                warn!("planner exceeded {time_limit:?}, killing it");
                kill_group(&mut child);
                let _ = std::fs::remove_file(&plan_path);
                return Ok(PlanResult::without_plan(
                    PlanStatus::Timeout,
                    SearchStats {
                        wall: start.elapsed(),
                        ..SearchStats::default()
                    },
                ));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(10)),
            Err(e) => return Err(PlannerError::Spawn(e.to_string())),
        }
    }
    let stats = SearchStats {
        wall: start.elapsed(),
        ..SearchStats::default()
    };
    let text = if uses_file {
        let t = std::fs::read_to_string(&plan_path).ok();
        let _ = std::fs::remove_file(&plan_path);
        t
    } else {
        stdout_reader.and_then(|h| h.join().ok())
    };
    let Some(text) = text.filter(|t| !t.trim().is_empty()) else {
        return Ok(PlanResult::without_plan(PlanStatus::Unsolvable, stats));
    };
    let plan = parse_plan(&text).map_err(|e| PlannerError::Parse(e.to_string()))?;
    let v = validate(task, &plan);
    if !v.valid {
        return Err(PlannerError::ValidationFailed {
            index: v.failure.unwrap_or(0),
        });
    }
    Ok(PlanResult {
        status: PlanStatus::Solved,
        plan: Some(plan),
        stats,
    })
}
