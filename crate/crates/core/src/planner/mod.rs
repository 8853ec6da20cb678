//! Forward state-space search over grounded tasks, plan validation, and an
//! adapter for external PDDL planners.

mod external;
mod heuristic;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::pddl::{GroundedTask, PlanStep, State};

pub use external::{external_solve, parse_planner_list, ExternalPlanner, PlannerError};
pub use heuristic::{goal_count, HAdd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMode {
    /// Breadth-first; plans are shortest.
    BlindBfs,
    GbfsHadd,
    AStarHadd,
    GoalCount,
}

impl SearchMode {
    pub const ALL: [SearchMode; 4] = [
        SearchMode::BlindBfs,
        SearchMode::GbfsHadd,
        SearchMode::AStarHadd,
        SearchMode::GoalCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SearchMode::BlindBfs => "bfs",
            SearchMode::GbfsHadd => "gbfs",
            SearchMode::AStarHadd => "astar",
            SearchMode::GoalCount => "goalcount",
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SearchMode::ALL
            .iter()
            .copied()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown search mode `{s}` (bfs, gbfs, astar, goalcount)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub mode: SearchMode,
    pub time_limit: Duration,
    /// Approximate bound on memory held by the search, in bytes.
    pub memory_limit: usize,
    /// Tie-breaking among equally ranked open nodes.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: SearchMode::GbfsHadd,
            time_limit: Duration::from_secs(60),
            memory_limit: 2 << 30,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStatus {
    Solved,
    Unsolvable,
    Timeout,
    OutOfMemory,
}

impl fmt::Display for PlanStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanStatus::Solved => "solved",
            PlanStatus::Unsolvable => "unsolvable",
            PlanStatus::Timeout => "timeout",
            PlanStatus::OutOfMemory => "out-of-memory",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub plan: Option<Vec<PlanStep>>,
    pub stats: SearchStats,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.status == PlanStatus::Solved
    }

    fn without_plan(status: PlanStatus, stats: SearchStats) -> PlanResult {
        PlanResult {
            status,
            plan: None,
            stats,
        }
    }
}

struct Node {
    parent: usize,
    action: usize,
    g: u32,
}

struct Search<'a> {
    task: &'a GroundedTask,
    cfg: SearchConfig,
    start: Instant,
    states: Vec<State>,
    nodes: Vec<Node>,
    seen: HashMap<State, usize>,
    stats: SearchStats,
    state_bytes: usize,
}

impl<'a> Search<'a> {
    fn new(task: &'a GroundedTask, cfg: SearchConfig) -> Search<'a> {
        Search {
            task,
            cfg,
            start: Instant::now(),
            states: Vec::new(),
            nodes: Vec::new(),
            seen: HashMap::new(),
            stats: SearchStats::default(),
            // Two copies per state (arena + hash key) plus bookkeeping.
            state_bytes: 2 * task.num_facts().div_ceil(64).max(1) * 8 + 96,
        }
    }

    fn add(&mut self, s: State, parent: usize, action: usize, g: u32) -> usize {
        let id = self.nodes.len();
        self.seen.insert(s.clone(), id);
        self.states.push(s);
        self.nodes.push(Node { parent, action, g });
        id
    }

    /// Checked once per expansion.
    fn limit(&self) -> Option<PlanStatus> {
        if self.stats.expanded.is_multiple_of(256) && self.start.elapsed() >= self.cfg.time_limit {
            return Some(PlanStatus::Timeout);
        }
        if self.nodes.len() * self.state_bytes > self.cfg.memory_limit {
            return Some(PlanStatus::OutOfMemory);
        }
        None
    }

    fn extract(&self, mut id: usize) -> Vec<PlanStep> {
        let mut out = Vec::new();
        while id != 0 {
            let n = &self.nodes[id];
            let a = &self.task.actions[n.action];
            out.push(PlanStep::new(a.name.clone(), a.args.clone()));
            id = n.parent;
        }
        out.reverse();
        out
    }

    fn finish(mut self, status: PlanStatus, goal: Option<usize>) -> PlanResult {
        self.stats.wall = self.start.elapsed();
        match goal {
            Some(id) => PlanResult {
                status: PlanStatus::Solved,
                plan: Some(self.extract(id)),
                stats: self.stats,
            },
            None => PlanResult::without_plan(status, self.stats),
        }
    }

    fn successors(&self, id: usize) -> Vec<(usize, State)> {
        let s = &self.states[id];
        self.task
            .actions
            .iter()
            .enumerate()
            .filter(|(_, a)| a.applicable(s))
            .map(|(i, a)| (i, a.successor(s)))
            .collect()
    }

    fn bfs(mut self) -> PlanResult {
        let init = self.task.init.clone();
        let root = self.add(init, 0, 0, 0);
        if self.task.goal_satisfied(&self.states[root]) {
            return self.finish(PlanStatus::Solved, Some(root));
        }
        let mut queue = VecDeque::from([root]);
        while let Some(id) = queue.pop_front() {
            self.stats.expanded += 1;
            if let Some(st) = self.limit() {
                return self.finish(st, None);
            }
            let g = self.nodes[id].g + 1;
            for (a, t) in self.successors(id) {
                self.stats.generated += 1;
                if self.seen.contains_key(&t) {
                    continue;
                }
                let goal = self.task.goal_satisfied(&t);
                let child = self.add(t, id, a, g);
                if goal {
                    return self.finish(PlanStatus::Solved, Some(child));
                }
                queue.push_back(child);
            }
        }
        self.finish(PlanStatus::Unsolvable, None)
    }

    /// Best-first search ranked by `(f, h, tie)`; `weight_g` selects A*.
    fn best_first(mut self, weight_g: bool) -> PlanResult {
        let task = self.task;
        let mut hadd = HAdd::new(task);
        let mode = self.cfg.mode;
        let mut h = |s: &State| -> Option<u32> {
            match mode {
                SearchMode::GoalCount => Some(goal_count(task, s)),
                _ => hadd.eval(s),
            }
        };
        let init = task.init.clone();
        let Some(h0) = h(&init) else {
            return self.finish(PlanStatus::Unsolvable, None);
        };
        let root = self.add(init, 0, 0, 0);
        let mut counter: u64 = 0;
        let seed = self.cfg.seed;
        let mut open = BinaryHeap::new();
        open.push(Reverse((h0, h0, counter ^ seed, root)));
        let mut closed = vec![false];
        while let Some(Reverse((_, _, _, id))) = open.pop() {
            if closed[id] {
                continue;
            }
            closed[id] = true;
            if task.goal_satisfied(&self.states[id]) {
                return self.finish(PlanStatus::Solved, Some(id));
            }
            self.stats.expanded += 1;
            if let Some(st) = self.limit() {
                return self.finish(st, None);
            }
            let g = self.nodes[id].g + 1;
            for (a, t) in self.successors(id) {
                self.stats.generated += 1;
                let child = match self.seen.get(&t) {
                    Some(&old) if self.nodes[old].g <= g || !weight_g => continue,
                    Some(&old) => {
                        // Cheaper path to a known state: reopen it.
                        self.nodes[old] = Node { parent: id, action: a, g };
                        closed[old] = false;
                        old
                    }
                    None => {
                        let c = self.add(t, id, a, g);
                        closed.push(false);
                        c
                    }
                };
                let Some(hv) = h(&self.states[child]) else {
                    closed[child] = true;
                    continue;
                };
                counter += 1;
                let f = if weight_g { g.saturating_add(hv) } else { hv };
                open.push(Reverse((f, hv, counter ^ seed, child)));
            }
        }
        self.finish(PlanStatus::Unsolvable, None)
    }
}

/// Searches for a plan. Deterministic for a given task and configuration
/// (up to the time limit).
pub fn solve(task: &GroundedTask, cfg: &SearchConfig) -> PlanResult {
    let search = Search::new(task, *cfg);
    match cfg.mode {
        SearchMode::BlindBfs => search.bfs(),
        SearchMode::AStarHadd => search.best_first(true),
        SearchMode::GbfsHadd | SearchMode::GoalCount => search.best_first(false),
    }
}

/// Outcome of checking a plan against a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validation {
    pub valid: bool,
    /// Index of the first unknown or inapplicable step; `plan.len()` when
    /// every step applies but the goal does not hold at the end.
    pub failure: Option<usize>,
}

pub fn validate(task: &GroundedTask, plan: &[PlanStep]) -> Validation {
    let mut s = task.init.clone();
    for (i, step) in plan.iter().enumerate() {
        let Some(a) = task.find_action(&step.name, &step.args) else {
            return Validation {
                valid: false,
                failure: Some(i),
            };
        };
        let a = &task.actions[a];
        if !a.applicable(&s) {
            return Validation {
                valid: false,
                failure: Some(i),
            };
        }
        s = a.successor(&s);
    }
    if task.goal_satisfied(&s) {
        Validation {
            valid: true,
            failure: None,
        }
    } else {
        Validation {
            valid: false,
            failure: Some(plan.len()),
        }
    }
}
