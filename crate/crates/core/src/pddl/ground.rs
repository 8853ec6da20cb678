//! Grounding: lifted domain + problem -> propositional task.
//!
//! Static predicates (those no action changes) are evaluated away, `forall`
//! is expanded over the typed universe, and preconditions are normalised to
//! CNF. A relaxed reachability pass then drops actions that can never fire
//! and facts that can never hold.

use std::collections::{HashMap, HashSet};

use super::eval::{ground_atom, Binding};
use super::task::{Clause, Condition, FactId, GroundAction, GroundedTask, Lit, State};
use super::{ActionDef, Atom, Domain, Effect, Formula, PddlError, Problem, Result, Term, TypedName};

/// Clause-set size beyond which CNF conversion gives up.
const MAX_CNF_CLAUSES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    pub prune_unreachable: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            prune_unreachable: true,
        }
    }
}

#[derive(Debug, Clone)]
enum G {
    T,
    F,
    L(Lit),
    And(Vec<G>),
    Or(Vec<G>),
}

fn g_bool(b: bool) -> G {
    if b {
        G::T
    } else {
        G::F
    }
}

fn g_and(parts: Vec<G>) -> G {
    let mut out = Vec::new();
    for p in parts {
        match p {
            G::T => {}
            G::F => return G::F,
            G::And(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => G::T,
        1 => out.pop().unwrap(),
        _ => G::And(out),
    }
}

fn g_or(parts: Vec<G>) -> G {
    let mut out = Vec::new();
    for p in parts {
        match p {
            G::F => {}
            G::T => return G::T,
            G::Or(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => G::F,
        1 => out.pop().unwrap(),
        _ => G::Or(out),
    }
}

/// Normalises a clause; `None` if it is a tautology.
fn normalize_clause(mut c: Clause) -> Option<Clause> {
    c.sort();
    c.dedup();
    for w in c.windows(2) {
        if w[0].fact == w[1].fact {
            return None;
        }
    }
    Some(c)
}

/// CNF of an NNF tree. `[[]]` (one empty clause) is false, `[]` is true.
fn cnf(g: &G) -> Result<Vec<Clause>> {
    Ok(match g {
        G::T => vec![],
        G::F => vec![vec![]],
        G::L(l) => vec![vec![*l]],
        G::And(gs) => {
            let mut out = Vec::new();
            for g in gs {
                out.extend(cnf(g)?);
            }
            out
        }
        G::Or(gs) => {
            let mut acc: Vec<Clause> = vec![vec![]];
            for g in gs {
                let part = cnf(g)?;
                if acc.len().saturating_mul(part.len()) > MAX_CNF_CLAUSES {
                    return Err(PddlError::UnsupportedConstruct {
                        line: 0,
                        col: 0,
                        construct: "disjunction too large to normalise".into(),
                    });
                }
                let mut next = Vec::new();
                for c in &acc {
                    for d in &part {
                        let mut m = c.clone();
                        m.extend_from_slice(d);
                        if let Some(m) = normalize_clause(m) {
                            next.push(m);
                        }
                    }
                }
                acc = next;
            }
            acc
        }
    })
}

fn condition_from_clauses(clauses: Vec<Clause>) -> Option<Condition> {
    let mut cond = Condition::default();
    let mut seen = HashSet::new();
    for c in clauses {
        let Some(c) = normalize_clause(c) else { continue };
        if c.is_empty() {
            return None;
        }
        if !seen.insert(c.clone()) {
            continue;
        }
        if c.len() == 1 {
            if c[0].positive {
                cond.pos.push(c[0].fact);
            } else {
                cond.neg.push(c[0].fact);
            }
        } else {
            cond.clauses.push(c);
        }
    }
    if cond.pos.iter().any(|f| cond.neg.contains(f)) {
        return None;
    }
    cond.pos.sort_unstable();
    cond.neg.sort_unstable();
    Some(cond)
}

struct Grounder<'a> {
    domain: &'a Domain,
    objects: Vec<TypedName>,
    by_type: HashMap<String, Vec<String>>,
    fluent: HashSet<String>,
    static_true: HashSet<Atom>,
    facts: Vec<Atom>,
    index: HashMap<Atom, FactId>,
}

impl<'a> Grounder<'a> {
    fn objects_of(&mut self, ty: &str) -> Result<Vec<String>> {
        let key = ty.to_ascii_lowercase();
        if let Some(v) = self.by_type.get(&key) {
            return Ok(v.clone());
        }
        if !self.domain.declares_type(ty) {
            return Err(PddlError::Undeclared {
                what: "type",
                name: ty.to_string(),
            });
        }
        let v: Vec<String> = self
            .objects
            .iter()
            .filter(|o| self.domain.is_subtype(&o.ty, ty))
            .map(|o| o.name.clone())
            .collect();
        self.by_type.insert(key, v.clone());
        Ok(v)
    }

    fn intern(&mut self, a: Atom) -> FactId {
        if let Some(&f) = self.index.get(&a) {
            return f;
        }
        let f = self.facts.len();
        self.index.insert(a.clone(), f);
        self.facts.push(a);
        f
    }

    fn check_atom(&self, a: &Atom) -> Result<()> {
        let p = self.domain.predicate(&a.predicate).ok_or_else(|| PddlError::Undeclared {
            what: "predicate",
            name: a.predicate.clone(),
        })?;
        if p.params.len() != a.args.len() {
            return Err(PddlError::TypeMismatch(format!(
                "{} expects {} arguments, got {}",
                p.name,
                p.params.len(),
                a.args.len()
            )));
        }
        Ok(())
    }

    fn is_static(&self, predicate: &str) -> bool {
        !self.fluent.contains(&predicate.to_ascii_lowercase())
    }

    fn bindings(&mut self, vars: &[TypedName], b: &Binding) -> Result<Vec<Binding>> {
        let mut out = vec![b.clone()];
        for v in vars {
            let objs = self.objects_of(&v.ty)?;
            let mut next = Vec::with_capacity(out.len() * objs.len());
            for partial in &out {
                for o in &objs {
                    let mut m = partial.clone();
                    m.insert(v.name.clone(), o.clone());
                    next.push(m);
                }
            }
            out = next;
        }
        Ok(out)
    }

    fn lower(&mut self, f: &Formula, b: &Binding, pos: bool) -> Result<G> {
        Ok(match f {
            Formula::Atom(a) => {
                self.check_atom(a)?;
                let ga = ground_atom(a, b)?;
                if self.is_static(&a.predicate) {
                    g_bool(self.static_true.contains(&ga) == pos)
                } else {
                    G::L(Lit {
                        fact: self.intern(ga),
                        positive: pos,
                    })
                }
            }
            Formula::Eq(x, y) => {
                let gx = ground_atom(&Atom { predicate: String::new(), args: vec![x.clone(), y.clone()] }, b)?;
                g_bool(gx.args[0].as_str().eq_ignore_ascii_case(gx.args[1].as_str()) == pos)
            }
            Formula::Not(g) => self.lower(g, b, !pos)?,
            Formula::And(gs) | Formula::Or(gs) => {
                let parts = gs.iter().map(|g| self.lower(g, b, pos)).collect::<Result<Vec<_>>>()?;
                if matches!(f, Formula::And(_)) == pos {
                    g_and(parts)
                } else {
                    g_or(parts)
                }
            }
            Formula::Forall(vars, g) => {
                let mut parts = Vec::new();
                for inner in self.bindings(vars, b)? {
                    let part = self.lower(g, &inner, pos)?;
                    // Short-circuit on an absorbing element.
                    let absorbing = if pos { matches!(part, G::F) } else { matches!(part, G::T) };
                    parts.push(part);
                    if absorbing {
                        break;
                    }
                }
                if pos {
                    g_and(parts)
                } else {
                    g_or(parts)
                }
            }
        })
    }

    fn effects(&mut self, e: &Effect, b: &Binding, add: &mut Vec<FactId>, del: &mut Vec<FactId>) -> Result<()> {
        match e {
            Effect::Add(a) | Effect::Del(a) => {
                self.check_atom(a)?;
                let f = self.intern(ground_atom(a, b)?);
                if matches!(e, Effect::Add(_)) {
                    add.push(f);
                } else {
                    del.push(f);
                }
            }
            Effect::And(es) => {
                for e in es {
                    self.effects(e, b, add, del)?;
                }
            }
            Effect::Forall(vars, e) => {
                for inner in self.bindings(vars, b)? {
                    self.effects(e, &inner, add, del)?;
                }
            }
            Effect::When(c, e) => match self.lower(c, b, true)? {
                G::T => self.effects(e, b, add, del)?,
                G::F => {}
                _ => {
                    return Err(PddlError::UnsupportedConstruct {
                        line: 0,
                        col: 0,
                        construct: format!("when with fluent condition {c}"),
                    })
                }
            },
        }
        Ok(())
    }

    fn static_literal_ok(&self, f: &Formula, b: &Binding) -> Result<bool> {
        match f {
            Formula::Atom(a) => Ok(self.static_true.contains(&ground_atom(a, b)?)),
            Formula::Not(g) => Ok(!self.static_literal_ok(g, b)?),
            Formula::Eq(x, y) => {
                let gx = ground_atom(&Atom { predicate: String::new(), args: vec![x.clone(), y.clone()] }, b)?;
                Ok(gx.args[0].as_str().eq_ignore_ascii_case(gx.args[1].as_str()))
            }
            _ => Ok(true),
        }
    }

    fn is_static_literal(&self, f: &Formula) -> bool {
        match f {
            Formula::Atom(a) => self.is_static(&a.predicate),
            Formula::Eq(..) => true,
            Formula::Not(g) => self.is_static_literal(g),
            _ => false,
        }
    }

    fn ground_action(&mut self, action: &ActionDef, out: &mut Vec<GroundAction>) -> Result<()> {
        for p in &action.params {
            self.objects_of(&p.ty)?;
        }
        // Attach each static top-level literal to the parameter position
        // after which all its variables are bound.
        let mut filters: Vec<Vec<Formula>> = vec![Vec::new(); action.params.len() + 1];
        for c in action.precondition.conjuncts() {
            if !self.is_static_literal(c) {
                continue;
            }
            let mut last = 0;
            let mut known = true;
            let mut vars = Vec::new();
            collect_vars(c, &mut vars);
            for v in vars {
                match action.params.iter().position(|p| p.name == v) {
                    Some(i) => last = last.max(i + 1),
                    None => known = false,
                }
            }
            if known {
                filters[last].push(c.clone());
            }
        }
        let mut stack: Vec<(usize, Binding)> = vec![(0, Binding::new())];
        while let Some((depth, b)) = stack.pop() {
            let mut ok = true;
            for f in &filters[depth] {
                if !self.static_literal_ok(f, &b)? {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            if depth == action.params.len() {
                self.instantiate(action, &b, out)?;
                continue;
            }
            let p = &action.params[depth];
            let objs = self.objects_of(&p.ty)?;
            for o in objs.iter().rev() {
                let mut m = b.clone();
                m.insert(p.name.clone(), o.clone());
                stack.push((depth + 1, m));
            }
        }
        Ok(())
    }

    fn instantiate(&mut self, action: &ActionDef, b: &Binding, out: &mut Vec<GroundAction>) -> Result<()> {
        let g = self.lower(&action.precondition, b, true)?;
        if matches!(g, G::F) {
            return Ok(());
        }
        let Some(pre) = condition_from_clauses(cnf(&g)?) else {
            return Ok(());
        };
        let (mut add, mut del) = (Vec::new(), Vec::new());
        self.effects(&action.effect, b, &mut add, &mut del)?;
        add.sort_unstable();
        add.dedup();
        del.sort_unstable();
        del.dedup();
        del.retain(|f| add.binary_search(f).is_err());
        out.push(GroundAction {
            name: action.name.clone(),
            args: action.params.iter().map(|p| b[&p.name].clone()).collect(),
            pre,
            add,
            del,
        });
        Ok(())
    }
}

fn collect_vars(f: &Formula, out: &mut Vec<String>) {
    let mut term = |t: &Term| {
        if let Term::Var(v) = t {
            out.push(v.clone());
        }
    };
    match f {
        Formula::Atom(a) => a.args.iter().for_each(&mut term),
        Formula::Eq(x, y) => {
            term(x);
            term(y);
        }
        Formula::Not(g) => collect_vars(g, out),
        _ => {}
    }
}

fn validate_problem(domain: &Domain, problem: &Problem) -> Result<()> {
    for o in &problem.objects {
        if !domain.declares_type(&o.ty) {
            return Err(PddlError::Undeclared {
                what: "type",
                name: o.ty.clone(),
            });
        }
    }
    let ty_of = |name: &str| {
        problem
            .objects
            .iter()
            .chain(&domain.constants)
            .find(|o| o.name == name)
            .map(|o| o.ty.clone())
    };
    for a in &problem.init {
        let p = domain.predicate(&a.predicate).ok_or_else(|| PddlError::Undeclared {
            what: "predicate",
            name: a.predicate.clone(),
        })?;
        if p.params.len() != a.args.len() {
            return Err(PddlError::TypeMismatch(format!("{a}: wrong arity for {}", p.name)));
        }
        for (arg, param) in a.args.iter().zip(&p.params) {
            let ty = ty_of(arg.as_str()).ok_or_else(|| PddlError::Undeclared {
                what: "object",
                name: arg.as_str().to_string(),
            })?;
            if !domain.is_subtype(&ty, &param.ty) {
                return Err(PddlError::TypeMismatch(format!(
                    "{a}: {} is a {ty}, expected {}",
                    arg, param.ty
                )));
            }
        }
    }
    Ok(())
}

/// Grounds `problem` against `domain`.
pub fn ground(domain: &Domain, problem: &Problem, opts: GroundOptions) -> Result<GroundedTask> {
    validate_problem(domain, problem)?;
    let mut objects = problem.objects.clone();
    for c in &domain.constants {
        if !objects.iter().any(|o| o.name == c.name) {
            objects.push(c.clone());
        }
    }
    let mut fluent = HashSet::new();
    for a in &domain.actions {
        a.effect.visit_atoms(&mut |atom, _| {
            fluent.insert(atom.predicate.to_ascii_lowercase());
        });
    }
    let mut g = Grounder {
        domain,
        objects,
        by_type: HashMap::new(),
        fluent,
        static_true: HashSet::new(),
        facts: Vec::new(),
        index: HashMap::new(),
    };
    let mut init_facts = Vec::new();
    let mut static_facts = Vec::new();
    for a in &problem.init {
        if g.is_static(&a.predicate) {
            g.static_true.insert(a.clone());
            static_facts.push(a.clone());
        } else {
            init_facts.push(g.intern(a.clone()));
        }
    }
    let mut actions = Vec::new();
    for a in &domain.actions {
        g.ground_action(a, &mut actions)?;
    }
    let goal_g = g.lower(&problem.goal, &Binding::new(), true)?;
    let goal_clauses = cnf(&goal_g)?;

    let n = g.facts.len();
    let mut reached = vec![false; n];
    for &f in &init_facts {
        reached[f] = true;
    }
    let mut live = vec![true; actions.len()];
    if opts.prune_unreachable {
        live = vec![false; actions.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for (i, a) in actions.iter().enumerate() {
                if live[i] {
                    continue;
                }
                let ok = a.pre.pos.iter().all(|&f| reached[f])
                    && a.pre.clauses.iter().all(|c| c.iter().any(|l| !l.positive || reached[l.fact]));
                if ok {
                    live[i] = true;
                    changed = true;
                    for &f in &a.add {
                        reached[f] = true;
                    }
                }
            }
        }
    } else {
        reached = vec![true; n];
    }

    // Renumber reachable facts; literals over unreachable ones are constant.
    let mut remap = vec![usize::MAX; n];
    let mut facts = Vec::new();
    for f in 0..n {
        if reached[f] {
            remap[f] = facts.len();
            facts.push(g.facts[f].clone());
        }
    }
    let rewrite = |cond_clauses: Vec<Clause>| -> Option<Condition> {
        let mut out = Vec::new();
        for c in cond_clauses {
            let mut nc = Vec::new();
            let mut sat = false;
            for l in c {
                if reached[l.fact] {
                    nc.push(Lit { fact: remap[l.fact], positive: l.positive });
                } else if !l.positive {
                    sat = true;
                    break;
                }
            }
            if !sat {
                out.push(nc);
            }
        }
        condition_from_clauses(out)
    };
    let to_clauses = |c: &Condition| -> Vec<Clause> {
        let mut v: Vec<Clause> = c.pos.iter().map(|&f| vec![Lit { fact: f, positive: true }]).collect();
        v.extend(c.neg.iter().map(|&f| vec![Lit { fact: f, positive: false }]));
        v.extend(c.clauses.iter().cloned());
        v
    };
    let mut out_actions = Vec::new();
    for (i, a) in actions.into_iter().enumerate() {
        if !live[i] {
            continue;
        }
        let Some(pre) = rewrite(to_clauses(&a.pre)) else { continue };
        out_actions.push(GroundAction {
            name: a.name,
            args: a.args,
            pre,
            add: a.add.iter().map(|&f| remap[f]).collect(),
            del: a.del.iter().filter(|&&f| reached[f]).map(|&f| remap[f]).collect(),
        });
    }
    let goal = rewrite(goal_clauses).unwrap_or(Condition {
        pos: vec![],
        neg: vec![],
        clauses: vec![vec![]],
    });
    let mut init = State::empty(facts.len());
    for f in init_facts {
        init.insert(remap[f]);
    }
    let fact_index = facts.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    let mut task = GroundedTask {
        facts,
        fact_index,
        actions: out_actions,
        init,
        goal,
        static_facts,
        by_label: HashMap::new(),
    };
    task.rebuild_labels();
    Ok(task)
}
