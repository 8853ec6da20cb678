use std::fmt::Write;

use crate::compiler::{
    domain_name, game_goal, has_timeout, max_number, pddl_game_name, projectile, resource_sprites,
    uses_geq, correspondence,
};
use crate::kb::{Binding, KnowledgeBase};
use crate::pddl::{read_atom, read_formula, Atom, Formula, Term};
use crate::vgdl::GameModel;

use super::{ProblemError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalEntry {
    pub predicate: Formula,
    pub priority: u32,
}

/// What the agent needs to turn a board into a problem, independently of
/// the compiler.
///
/// The three core sections are `gameElementsCorrespondence`,
/// `variablesTypes` and `goals`; the rest carries the facts that depend on
/// counters rather than on cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigFile {
    pub domain: String,
    pub problem: String,
    /// Sprite → fact schemata over `?x`, `?y` and `?<sprite>`.
    pub correspondence: Vec<(String, Vec<Atom>)>,
    /// Variable → PDDL type.
    pub variables_types: Vec<(String, String)>,
    pub goals: Vec<GoalEntry>,
    /// Ground facts every problem starts with.
    pub initial_facts: Vec<Atom>,
    /// Sprites counted by `got-resource-<R>`.
    pub resource_counters: Vec<String>,
    pub turn_counter: bool,
    /// Number relations to materialize: `next`, and `geq` when used.
    pub order_predicates: Vec<String>,
    /// Numbers the domain declares as constants (left out of `:objects`).
    pub constants: Vec<String>,
    /// Smallest number range the domain needs.
    pub min_numbers: usize,
    /// Sprite of the avatar's reserve projectile.
    pub projectile: Option<String>,
}

/// Builds the configuration for a game.
pub fn emit_config(model: &GameModel, game: &str, kb: &KnowledgeBase) -> Result<ConfigFile> {
    let goal = game_goal(model)?;
    let avatar = model.avatar().ok_or(ProblemError::NoAvatar)?;
    let mut order: Vec<&str> = vec![&avatar.name];
    order.extend(model.leaves().map(|s| s.name.as_str()).filter(|n| *n != avatar.name));

    let mut cfg = ConfigFile {
        domain: domain_name(game),
        problem: format!("{}Problem", pddl_game_name(game)),
        goals: vec![GoalEntry {
            predicate: goal,
            priority: 1,
        }],
        resource_counters: resource_sprites(model),
        turn_counter: has_timeout(model),
        min_numbers: max_number(model) + 1,
        projectile: projectile(model),
        ..ConfigFile::default()
    };
    for s in order {
        cfg.correspondence
            .push((s.to_string(), correspondence(model, kb, s).map_err(ProblemError::Compile)?));
    }
    for s in model.leaves() {
        if !model.is_static(&s.name) {
            cfg.variables_types.push((format!("?{}", s.name), s.name.clone()));
        }
    }
    cfg.variables_types.push(("?x".into(), "num".into()));
    cfg.variables_types.push(("?y".into(), "num".into()));
    cfg.initial_facts = kb
        .instantiate("base", &Binding::new())
        .map_err(|e| ProblemError::Compile(e.into()))?
        .init_facts;
    cfg.order_predicates.push("next".into());
    if uses_geq(model) {
        cfg.order_predicates.push("geq".into());
        let mut limits: Vec<usize> = model
            .effective_interactions()
            .into_iter()
            .filter_map(|i| i.params.get("limit").and_then(|l| l.parse().ok()))
            .collect();
        limits.sort_unstable();
        limits.dedup();
        cfg.constants = limits.into_iter().map(crate::compiler::num).collect();
    }
    Ok(cfg)
}

impl ConfigFile {
    /// Schemata for `sprite`, if it has an entry.
    pub fn schemata(&self, sprite: &str) -> Option<&[Atom]> {
        self.correspondence
            .iter()
            .find(|(s, _)| s == sprite)
            .map(|(_, v)| v.as_slice())
    }

    /// True when the sprite is represented by a cell predicate (no object).
    pub fn is_cell_sprite(&self, sprite: &str) -> bool {
        let var = format!("?{sprite}");
        self.schemata(sprite).is_some_and(|atoms| {
            atoms
                .iter()
                .all(|a| a.args.iter().all(|t| t.as_str() != var))
        })
    }

    pub fn variable_type(&self, var: &str) -> Option<&str> {
        self.variables_types
            .iter()
            .find(|(v, _)| v == var)
            .map(|(_, t)| t.as_str())
    }

    /// The goal used for planning: the first priority-1 entry.
    pub fn goal(&self) -> Option<&Formula> {
        self.goals
            .iter()
            .find(|g| g.priority == 1)
            .or(self.goals.first())
            .map(|g| &g.predicate)
    }

    /// Checks that every schema variable has a declared type.
    pub fn check(&self) -> Result<()> {
        for (sprite, atoms) in &self.correspondence {
            for a in atoms {
                for t in &a.args {
                    if let Term::Var(v) = t {
                        if self.variable_type(v).is_none() {
                            return Err(ProblemError::Config {
                                line: 0,
                                msg: format!("variable `{v}` of `{sprite}` has no type"),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "domain: {}", self.domain);
        let _ = writeln!(out, "problem: {}", self.problem);
        out.push_str("gameElementsCorrespondence:\n");
        for (s, atoms) in &self.correspondence {
            let _ = writeln!(out, "  {s}:");
            for a in atoms {
                let _ = writeln!(out, "  - {a}");
            }
        }
        out.push_str("variablesTypes:\n");
        for (v, t) in &self.variables_types {
            let _ = writeln!(out, "  {v}: {t}");
        }
        out.push_str("goals:\n");
        for g in &self.goals {
            let _ = writeln!(out, "  - goalPredicate: {}", g.predicate);
            let _ = writeln!(out, "    priority: {}", g.priority);
        }
        let list = |out: &mut String, key: &str, items: Vec<String>| {
            if !items.is_empty() {
                let _ = writeln!(out, "{key}:");
                for i in items {
                    let _ = writeln!(out, "  - {i}");
                }
            }
        };
        list(&mut out, "initialFacts", self.initial_facts.iter().map(|a| a.to_string()).collect());
        list(&mut out, "resourceCounters", self.resource_counters.clone());
        list(&mut out, "orderPredicates", self.order_predicates.clone());
        list(&mut out, "constants", self.constants.clone());
        if self.turn_counter {
            out.push_str("turnCounter: true\n");
        }
        let _ = writeln!(out, "minNumbers: {}", self.min_numbers);
        if let Some(p) = &self.projectile {
            let _ = writeln!(out, "projectile: {p}");
        }
        out
    }

    /// Reads the indentation-based format written by [`ConfigFile::to_text`].
    /// A `goalPredicate` may continue on more-indented lines.
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut cfg = ConfigFile::default();
        let lines: Vec<(usize, usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.len() - l.trim_start().len(), l.trim()))
            .filter(|(_, _, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let err = |line: usize, msg: String| ProblemError::Config { line, msg };
        let mut section = String::new();
        let mut sprite: Option<String> = None;
        let mut i = 0;
        while i < lines.len() {
            let (ln, indent, l) = lines[i];
            i += 1;
            if indent == 0 && !l.starts_with('-') {
                let (key, value) = l
                    .split_once(':')
                    .ok_or_else(|| err(ln, format!("expected `key:`, found `{l}`")))?;
                let value = value.trim();
                section = key.trim().to_string();
                sprite = None;
                match section.as_str() {
                    "domain" => cfg.domain = value.to_string(),
                    "problem" => cfg.problem = value.to_string(),
                    "turnCounter" => cfg.turn_counter = value == "true",
                    "minNumbers" => {
                        cfg.min_numbers = value
                            .parse()
                            .map_err(|_| err(ln, format!("bad number `{value}`")))?
                    }
                    "projectile" => cfg.projectile = Some(value.to_string()),
                    "gameElementsCorrespondence" | "variablesTypes" | "goals" | "initialFacts"
                    | "resourceCounters" | "orderPredicates" | "constants" => {}
                    _ => return Err(err(ln, format!("unknown key `{section}`"))),
                }
                continue;
            }
            match section.as_str() {
                "gameElementsCorrespondence" => {
                    if let Some(item) = l.strip_prefix('-') {
                        let s = sprite
                            .as_ref()
                            .ok_or_else(|| err(ln, "schema outside a sprite entry".into()))?;
                        let atom = read_atom(item.trim()).map_err(|e| err(ln, e.to_string()))?;
                        cfg.correspondence
                            .iter_mut()
                            .find(|(n, _)| n == s)
                            .expect("entry pushed")
                            .1
                            .push(atom);
                    } else {
                        let name = l
                            .strip_suffix(':')
                            .ok_or_else(|| err(ln, format!("expected `sprite:`, found `{l}`")))?;
                        sprite = Some(name.trim().to_string());
                        cfg.correspondence.push((name.trim().to_string(), Vec::new()));
                    }
                }
                "variablesTypes" => {
                    let (v, t) = l
                        .split_once(':')
                        .ok_or_else(|| err(ln, format!("expected `?var: type`, found `{l}`")))?;
                    cfg.variables_types.push((v.trim().to_string(), t.trim().to_string()));
                }
                "goals" => {
                    let body = l.strip_prefix('-').map(str::trim).unwrap_or(l);
                    let (key, value) = body
                        .split_once(':')
                        .ok_or_else(|| err(ln, format!("expected `key: value`, found `{l}`")))?;
                    match key.trim() {
                        "goalPredicate" => {
                            let mut text = value.trim().to_string();
                            while i < lines.len()
                                && lines[i].1 > indent
                                && !lines[i].2.starts_with("priority:")
                                && !lines[i].2.starts_with('-')
                            {
                                text.push(' ');
                                text.push_str(lines[i].2);
                                i += 1;
                            }
                            let f = read_formula(&text).map_err(|e| err(ln, e.to_string()))?;
                            cfg.goals.push(GoalEntry {
                                predicate: f,
                                priority: 1,
                            });
                        }
                        "priority" => {
                            let g = cfg
                                .goals
                                .last_mut()
                                .ok_or_else(|| err(ln, "priority before goalPredicate".into()))?;
                            g.priority = value
                                .trim()
                                .parse()
                                .map_err(|_| err(ln, format!("bad priority `{}`", value.trim())))?;
                        }
                        k => return Err(err(ln, format!("unknown goal field `{k}`"))),
                    }
                }
                "initialFacts" | "resourceCounters" | "orderPredicates" | "constants" => {
                    let item = l
                        .strip_prefix('-')
                        .ok_or_else(|| err(ln, format!("expected `- item`, found `{l}`")))?
                        .trim();
                    match section.as_str() {
                        "initialFacts" => cfg
                            .initial_facts
                            .push(read_atom(item).map_err(|e| err(ln, e.to_string()))?),
                        "resourceCounters" => cfg.resource_counters.push(item.to_string()),
                        "orderPredicates" => cfg.order_predicates.push(item.to_string()),
                        _ => cfg.constants.push(item.to_string()),
                    }
                }
                _ => return Err(err(ln, format!("unexpected line `{l}`"))),
            }
        }
        if cfg.domain.is_empty() {
            return Err(err(0, "missing `domain`".into()));
        }
        cfg.check()?;
        Ok(cfg)
    }
}
