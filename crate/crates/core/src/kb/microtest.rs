//! Per-template micro-tests: a tiny domain holding the instantiated template,
//! a tiny problem, a sequence of actions, and the hand-checked final state.
//!
//! ```text
//! bind: T rock
//! bind: STEP (next ?y ?new_y)
//! types: rock - Missile Missile - Object
//! predicates: (is-wall ?x ?y - num)
//! objects: r - rock n0 n1 - num
//! init: (turn-rock-move) (oriented-down r) (at n0 n0 r) (next n0 n1) (row n1)
//! apply: (ROCK_MOVE_DOWN r n0 n0 n1)
//! reject: (ROCK_MOVE_DOWN r n0 n1 n0)
//! expect: (turn-rock-move) (oriented-down r) (at n0 n1 r) (next n0 n1) (row n1) (rock-moved r)
//! ```
//!
//! `apply` must succeed, `reject` must be inapplicable; after all steps the
//! state must equal the union of the `expect` lines.

use std::collections::BTreeSet;

use super::{Binding, KnowledgeBase, Template};
use crate::pddl::{apply_lifted, parse_plan, read_domain, read_problem, Atom, LiftedState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroTestReport {
    pub template: String,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub results: Vec<MicroTestReport>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &MicroTestReport> {
        self.results.iter().filter(|r| !r.passed)
    }
}

enum Step {
    Apply(String),
    Reject(String),
}

#[derive(Default)]
struct Spec {
    binding: Binding,
    types: String,
    constants: String,
    predicates: String,
    objects: String,
    init: String,
    expect: String,
    steps: Vec<Step>,
}

fn parse_spec(text: &str) -> Result<Spec, String> {
    let mut s = Spec::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected `key: value`", i + 1))?;
        let v = v.trim();
        let append = |buf: &mut String| {
            buf.push(' ');
            buf.push_str(v);
        };
        match k.trim() {
            "bind" => {
                let (name, value) = v.split_once(' ').unwrap_or((v, ""));
                s.binding.insert(name.to_string(), value.trim().to_string());
            }
            "types" => append(&mut s.types),
            "constants" => append(&mut s.constants),
            "predicates" => append(&mut s.predicates),
            "objects" => append(&mut s.objects),
            "init" => append(&mut s.init),
            "expect" => append(&mut s.expect),
            "apply" => s.steps.push(Step::Apply(v.to_string())),
            "reject" => s.steps.push(Step::Reject(v.to_string())),
            other => return Err(format!("line {}: unknown directive `{other}`", i + 1)),
        }
    }
    Ok(s)
}

fn run(kb: &KnowledgeBase, t: &Template, text: &str) -> Result<(), String> {
    let spec = parse_spec(text)?;
    let inst = t.instantiate(&spec.binding).map_err(|e| e.to_string())?;
    let section = |name: &str, body: &str| {
        if body.trim().is_empty() {
            String::new()
        } else {
            format!("({name} {body})\n")
        }
    };
    let skeleton = format!(
        "(define (domain micro)\n(:requirements :strips :typing :negative-preconditions :disjunctive-preconditions :equality :universal-preconditions :conditional-effects)\n{}{}{})",
        section(":types", &spec.types),
        section(":constants", &spec.constants),
        section(":predicates", &spec.predicates),
    );
    let mut domain = read_domain(&skeleton).map_err(|e| format!("micro-domain: {e}"))?;
    let base = kb
        .get("base")
        .and_then(|b| b.instantiate(&Binding::new()))
        .map(|i| i.predicates)
        .unwrap_or_default();
    for p in base.into_iter().chain(inst.predicates) {
        if domain.predicate(&p.name).is_none() {
            domain.predicates.push(p);
        }
    }
    domain.actions = inst.actions;
    let problem_text = format!(
        "(define (problem micro-p) (:domain micro)\n{}(:init {})\n(:goal (and)))",
        section(":objects", &spec.objects),
        spec.init
    );
    let problem = read_problem(&problem_text).map_err(|e| format!("micro-problem: {e}"))?;
    let mut state = LiftedState::new(&domain, &problem);
    for step in &spec.steps {
        let (line, must_apply) = match step {
            Step::Apply(l) => (l, true),
            Step::Reject(l) => (l, false),
        };
        let parsed = parse_plan(line).map_err(|e| e.to_string())?;
        let [ps] = parsed.as_slice() else {
            return Err(format!("expected one action in `{line}`"));
        };
        let action = domain
            .action(&ps.name)
            .ok_or_else(|| format!("template produced no action `{}`", ps.name))?;
        match (apply_lifted(&domain, &state, action, &ps.args), must_apply) {
            (Ok(next), true) => state = next,
            (Err(e), true) => return Err(format!("{ps}: {e}")),
            (Ok(_), false) => return Err(format!("{ps} should be inapplicable")),
            (Err(_), false) => {}
        }
    }
    let expected: BTreeSet<Atom> = read_problem(&format!(
        "(define (problem e) (:domain micro) (:init {}) (:goal (and)))",
        spec.expect
    ))
    .map_err(|e| format!("expect: {e}"))?
    .init
    .into_iter()
    .collect();
    if expected != state.facts {
        let missing: Vec<String> = expected.difference(&state.facts).map(|a| a.to_string()).collect();
        let extra: Vec<String> = state.facts.difference(&expected).map(|a| a.to_string()).collect();
        return Err(format!(
            "final state differs; missing [{}], unexpected [{}]",
            missing.join(" "),
            extra.join(" ")
        ));
    }
    Ok(())
}

/// Runs the micro-test of one template.
pub fn run_micro_test(kb: &KnowledgeBase, id: &str) -> MicroTestReport {
    let outcome = match (kb.get(id), kb.micro_test(id)) {
        (Err(e), _) => Err(e.to_string()),
        (Ok(_), None) => Err("no micro-test".to_string()),
        (Ok(t), Some(text)) => run(kb, t, text),
    };
    MicroTestReport {
        template: id.to_string(),
        passed: outcome.is_ok(),
        message: outcome.err().unwrap_or_else(|| "ok".to_string()),
    }
}

/// Runs every template's micro-test.
pub fn validate(kb: &KnowledgeBase) -> ValidationReport {
    let mut report = ValidationReport::default();
    if kb.is_empty() {
        report.warnings.push("knowledge base is empty; nothing to validate".into());
    }
    for t in kb.templates() {
        report.results.push(run_micro_test(kb, &t.id));
    }
    report
}
