use std::collections::HashMap;
use std::fmt;

use super::{Atom, PddlError, Result};

pub type FactId = usize;

/// A set of facts, stored as a dense bit vector over the task's fact index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    bits: Vec<u64>,
}

impl State {
    pub fn empty(num_facts: usize) -> State {
        State {
            bits: vec![0; num_facts.div_ceil(64).max(1)],
        }
    }

    #[inline]
    pub fn contains(&self, f: FactId) -> bool {
        self.bits[f / 64] >> (f % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, f: FactId) {
        self.bits[f / 64] |= 1 << (f % 64);
    }

    #[inline]
    pub fn remove(&mut self, f: FactId) {
        self.bits[f / 64] &= !(1 << (f % 64));
    }

    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &State) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub fact: FactId,
    pub positive: bool,
}

impl Lit {
    pub fn holds(&self, s: &State) -> bool {
        s.contains(self.fact) == self.positive
    }
}

/// A disjunction of literals.
pub type Clause = Vec<Lit>;

/// A ground condition in conjunctive normal form: unit literals are kept
/// apart from the (rarer) proper clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Condition {
    pub pos: Vec<FactId>,
    pub neg: Vec<FactId>,
    pub clauses: Vec<Clause>,
}

impl Condition {
    pub fn holds(&self, s: &State) -> bool {
        self.pos.iter().all(|&f| s.contains(f))
            && self.neg.iter().all(|&f| !s.contains(f))
            && self.clauses.iter().all(|c| c.iter().any(|l| l.holds(s)))
    }

    /// Unit literals and clauses that are false in `s`.
    pub fn violations(&self, s: &State) -> Vec<Clause> {
        let mut out = Vec::new();
        for &f in &self.pos {
            if !s.contains(f) {
                out.push(vec![Lit { fact: f, positive: true }]);
            }
        }
        for &f in &self.neg {
            if s.contains(f) {
                out.push(vec![Lit { fact: f, positive: false }]);
            }
        }
        for c in &self.clauses {
            if !c.iter().any(|l| l.holds(s)) {
                out.push(c.clone());
            }
        }
        out
    }

    pub fn is_trivial(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty() && self.clauses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    pub pre: Condition,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
}

impl GroundAction {
    pub fn applicable(&self, s: &State) -> bool {
        self.pre.holds(s)
    }

    /// Successor `(s \ del) ∪ add`; the caller checks applicability.
    pub fn successor(&self, s: &State) -> State {
        let mut next = s.clone();
        for &f in &self.del {
            next.remove(f);
        }
        for &f in &self.add {
            next.insert(f);
        }
        next
    }

    pub fn apply(&self, s: &State) -> Result<State> {
        if !self.applicable(s) {
            return Err(PddlError::NotApplicable(self.to_string()));
        }
        Ok(self.successor(s))
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// A propositional STRIPS task (with negative and clausal preconditions).
#[derive(Debug, Clone)]
pub struct GroundedTask {
    pub facts: Vec<Atom>,
    pub fact_index: HashMap<Atom, FactId>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: Condition,
    /// Facts that no action changes; true ones were compiled away.
    pub static_facts: Vec<Atom>,
    pub(crate) by_label: HashMap<(String, Vec<String>), usize>,
}

impl GroundedTask {
    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn fact(&self, id: FactId) -> &Atom {
        &self.facts[id]
    }

    pub fn fact_id(&self, atom: &Atom) -> Option<FactId> {
        self.fact_index.get(atom).copied()
    }

    pub fn goal_satisfied(&self, s: &State) -> bool {
        self.goal.holds(s)
    }

    /// Looks an action up by name and arguments, case-insensitively.
    pub fn find_action(&self, name: &str, args: &[String]) -> Option<usize> {
        let key = (
            name.to_ascii_lowercase(),
            args.iter().map(|a| a.to_ascii_lowercase()).collect(),
        );
        self.by_label.get(&key).copied()
    }

    pub fn state_atoms(&self, s: &State) -> Vec<Atom> {
        s.iter().map(|f| self.facts[f].clone()).collect()
    }

    /// Builds a state from ground atoms; atoms outside the index are ignored.
    pub fn state_from_atoms<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> State {
        let mut s = State::empty(self.facts.len());
        for a in atoms {
            if let Some(&f) = self.fact_index.get(a) {
                s.insert(f);
            }
        }
        s
    }

    pub fn empty_state(&self) -> State {
        State::empty(self.facts.len())
    }

    pub(crate) fn rebuild_labels(&mut self) {
        self.by_label = self
            .actions
            .iter()
            .enumerate()
            .map(|(i, a)| {
                (
                    (
                        a.name.to_ascii_lowercase(),
                        a.args.iter().map(|x| x.to_ascii_lowercase()).collect(),
                    ),
                    i,
                )
            })
            .collect();
    }

    pub fn render_clause(&self, c: &Clause) -> String {
        let lits: Vec<String> = c
            .iter()
            .map(|l| {
                if l.positive {
                    self.facts[l.fact].to_string()
                } else {
                    format!("(not {})", self.facts[l.fact])
                }
            })
            .collect();
        if lits.len() == 1 {
            lits[0].clone()
        } else {
            format!("(or {})", lits.join(" "))
        }
    }
}
