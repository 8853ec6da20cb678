//! PDDL 1.2 abstract syntax, reader, printer and grounding.
//!
//! Supported requirements: `:strips :typing :negative-preconditions
//! :disjunctive-preconditions :equality :universal-preconditions
//! :conditional-effects` (conditional effects only with static conditions).

mod eval;
mod ground;
mod plan;
mod print;
mod read;
mod sexpr;
mod task;

use std::fmt;

use thiserror::Error;

pub use eval::{apply_lifted, eval_formula, ground_atom, substitute, violated_conjuncts, Binding, LiftedState};
pub use ground::{ground, GroundOptions};
pub use plan::{parse_plan, write_plan, PlanStep};
pub use print::{print_domain, print_problem};
pub use read::{read_action, read_atom, read_domain, read_formula, read_fragments, read_predicates, read_problem, Fragment};
pub use task::{Clause, FactId, GroundAction, GroundedTask, Lit, State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unsupported construct `{construct}`")]
    UnsupportedConstruct {
        line: usize,
        col: usize,
        construct: String,
    },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("undeclared {what} `{name}`")]
    Undeclared { what: &'static str, name: String },
    #[error("action `{0}` is not applicable")]
    NotApplicable(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
}

pub type Result<T> = std::result::Result<T, PddlError>;

/// A name with its declared type (`object` when untyped).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> TypedName {
        TypedName {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeDecl {
    pub name: String,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Variable, stored with its leading `?`.
    Var(String),
    Const(String),
}

impl Term {
    pub fn parse(s: &str) -> Term {
        if s.starts_with('?') {
            Term::Var(s.to_string())
        } else {
            Term::Const(s.to_string())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Atom {
        Atom {
            predicate: predicate.into(),
            args: args.iter().map(|a| Term::parse(a)).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|a| matches!(a, Term::Const(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom(Atom),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Forall(Vec<TypedName>, Box<Formula>),
}

impl Formula {
    pub fn truth() -> Formula {
        Formula::And(Vec::new())
    }

    pub fn atom(predicate: &str, args: &[&str]) -> Formula {
        Formula::Atom(Atom::new(predicate, args))
    }

    pub fn negate(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Top-level conjuncts (a non-`and` formula is its own single conjunct).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(fs) => fs.iter().collect(),
            other => vec![other],
        }
    }

    /// Visits every atom with its polarity under negation.
    pub fn visit_atoms<'a>(&'a self, positive: bool, f: &mut impl FnMut(&'a Atom, bool)) {
        match self {
            Formula::Atom(a) => f(a, positive),
            Formula::Eq(..) => {}
            Formula::Not(g) => g.visit_atoms(!positive, f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(positive, f)),
            Formula::Forall(_, g) => g.visit_atoms(positive, f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    Add(Atom),
    Del(Atom),
    And(Vec<Effect>),
    Forall(Vec<TypedName>, Box<Effect>),
    When(Formula, Box<Effect>),
}

impl Effect {
    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom, bool)) {
        match self {
            Effect::Add(a) => f(a, true),
            Effect::Del(a) => f(a, false),
            Effect::And(es) => es.iter().for_each(|e| e.visit_atoms(f)),
            Effect::Forall(_, e) | Effect::When(_, e) => e.visit_atoms(f),
        }
    }

    pub fn parts(&self) -> Vec<&Effect> {
        match self {
            Effect::And(es) => es.iter().collect(),
            other => vec![other],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDef {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Formula,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDecl>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDef>,
    pub actions: Vec<ActionDef>,
}

impl Domain {
    pub fn action(&self, name: &str) -> Option<&ActionDef> {
        self.actions
            .iter()
            .find(|a| a.name.eq_ignore_ascii_case(name))
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDef> {
        self.predicates
            .iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
    }

    /// Parent of a declared type; `None` for roots and for `object`.
    pub fn parent_of(&self, ty: &str) -> Option<&str> {
        self.types
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(ty))
            .and_then(|t| t.parent.as_deref())
    }

    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ancestor.eq_ignore_ascii_case("object") {
            return true;
        }
        let mut cur = Some(ty);
        let mut guard = 0;
        while let Some(t) = cur {
            if t.eq_ignore_ascii_case(ancestor) {
                return true;
            }
            cur = self.parent_of(t);
            guard += 1;
            if guard > self.types.len() + 1 {
                break;
            }
        }
        false
    }

    pub fn declares_type(&self, ty: &str) -> bool {
        ty.eq_ignore_ascii_case("object") || self.types.iter().any(|t| t.name.eq_ignore_ascii_case(ty))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Formula,
}

impl Default for Formula {
    fn default() -> Self {
        Formula::truth()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Renders `a b - t c - u`, grouping consecutive names of one type.
pub fn typed_list(items: &[TypedName]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        while j < items.len() && items[j].ty == items[i].ty {
            j += 1;
        }
        for item in &items[i..j] {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&item.name);
        }
        out.push_str(" - ");
        out.push_str(&items[i].ty);
        i = j;
    }
    out
}

/// Single-line rendering.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                let head = if matches!(self, Formula::And(_)) { "and" } else { "or" };
                write!(f, "({head}")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                f.write_str(")")
            }
            Formula::Forall(vars, g) => write!(f, "(forall ({}) {g})", typed_list(vars)),
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::Add(a) => write!(f, "{a}"),
            Effect::Del(a) => write!(f, "(not {a})"),
            Effect::And(es) => {
                f.write_str("(and")?;
                for e in es {
                    write!(f, " {e}")?;
                }
                f.write_str(")")
            }
            Effect::Forall(vars, e) => write!(f, "(forall ({}) {e})", typed_list(vars)),
            Effect::When(c, e) => write!(f, "(when {c} {e})"),
        }
    }
}
