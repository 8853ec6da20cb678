//! A direct interpreter over lifted formulas. Slow, but independent of the
//! grounder, so it doubles as a reference implementation.

use std::collections::{BTreeSet, HashMap};

use super::{ActionDef, Atom, Domain, Effect, Formula, PddlError, Problem, Result, Term, TypedName};

pub type Binding = HashMap<String, String>;

/// A ground state together with the typed universe it ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedState {
    /// Problem objects followed by domain constants.
    pub objects: Vec<TypedName>,
    pub facts: BTreeSet<Atom>,
}

impl LiftedState {
    pub fn new(domain: &Domain, problem: &Problem) -> LiftedState {
        let mut objects = problem.objects.clone();
        for c in &domain.constants {
            if !objects.iter().any(|o| o.name.eq_ignore_ascii_case(&c.name)) {
                objects.push(c.clone());
            }
        }
        LiftedState {
            objects,
            facts: problem.init.iter().cloned().collect(),
        }
    }

    pub fn holds(&self, atom: &Atom) -> bool {
        self.facts.contains(atom)
    }

    pub fn objects_of<'a>(&'a self, domain: &'a Domain, ty: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.objects
            .iter()
            .filter(move |o| domain.is_subtype(&o.ty, ty))
            .map(|o| o.name.as_str())
    }

    fn canonical(&self, name: &str) -> Option<&TypedName> {
        self.objects.iter().find(|o| o.name.eq_ignore_ascii_case(name))
    }

    /// Binds action parameters to arguments, checking arity and types.
    pub fn bind(&self, domain: &Domain, action: &ActionDef, args: &[String]) -> Result<Binding> {
        if action.params.len() != args.len() {
            return Err(PddlError::TypeMismatch(format!(
                "{} expects {} arguments, got {}",
                action.name,
                action.params.len(),
                args.len()
            )));
        }
        let mut b = Binding::new();
        for (p, a) in action.params.iter().zip(args) {
            let obj = self.canonical(a).ok_or_else(|| PddlError::Undeclared {
                what: "object",
                name: a.clone(),
            })?;
            if !domain.is_subtype(&obj.ty, &p.ty) {
                return Err(PddlError::TypeMismatch(format!(
                    "{} of type {} bound to {} - {}",
                    obj.name, obj.ty, p.name, p.ty
                )));
            }
            b.insert(p.name.clone(), obj.name.clone());
        }
        Ok(b)
    }
}

fn resolve(t: &Term, b: &Binding) -> Result<String> {
    match t {
        Term::Const(c) => Ok(c.clone()),
        Term::Var(v) => b.get(v).cloned().ok_or_else(|| PddlError::Undeclared {
            what: "variable",
            name: v.clone(),
        }),
    }
}

pub fn ground_atom(a: &Atom, b: &Binding) -> Result<Atom> {
    Ok(Atom {
        predicate: a.predicate.clone(),
        args: a
            .args
            .iter()
            .map(|t| resolve(t, b).map(Term::Const))
            .collect::<Result<_>>()?,
    })
}

pub fn eval_formula(domain: &Domain, st: &LiftedState, f: &Formula, b: &Binding) -> Result<bool> {
    Ok(match f {
        Formula::Atom(a) => st.holds(&ground_atom(a, b)?),
        Formula::Eq(x, y) => resolve(x, b)?.eq_ignore_ascii_case(&resolve(y, b)?),
        Formula::Not(g) => !eval_formula(domain, st, g, b)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval_formula(domain, st, g, b)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_formula(domain, st, g, b)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Forall(vars, g) => {
            let mut ok = true;
            for_each_binding(domain, st, vars, b, &mut |inner| {
                if ok && !eval_formula(domain, st, g, inner)? {
                    ok = false;
                }
                Ok(())
            })?;
            ok
        }
    })
}

fn for_each_binding(
    domain: &Domain,
    st: &LiftedState,
    vars: &[TypedName],
    b: &Binding,
    f: &mut dyn FnMut(&Binding) -> Result<()>,
) -> Result<()> {
    match vars.split_first() {
        None => f(b),
        Some((v, rest)) => {
            let candidates: Vec<String> = st.objects_of(domain, &v.ty).map(str::to_string).collect();
            for c in candidates {
                let mut inner = b.clone();
                inner.insert(v.name.clone(), c);
                for_each_binding(domain, st, rest, &inner, f)?;
            }
            Ok(())
        }
    }
}

fn collect_effects(
    domain: &Domain,
    st: &LiftedState,
    e: &Effect,
    b: &Binding,
    add: &mut Vec<Atom>,
    del: &mut Vec<Atom>,
) -> Result<()> {
    match e {
        Effect::Add(a) => add.push(ground_atom(a, b)?),
        Effect::Del(a) => del.push(ground_atom(a, b)?),
        Effect::And(es) => {
            for e in es {
                collect_effects(domain, st, e, b, add, del)?;
            }
        }
        Effect::When(c, e) => {
            if eval_formula(domain, st, c, b)? {
                collect_effects(domain, st, e, b, add, del)?;
            }
        }
        Effect::Forall(vars, e) => {
            for_each_binding(domain, st, vars, b, &mut |inner| {
                collect_effects(domain, st, e, inner, add, del)
            })?;
        }
    }
    Ok(())
}

/// Applies a lifted action: checks the precondition, then deletes before adds.
pub fn apply_lifted(domain: &Domain, st: &LiftedState, action: &ActionDef, args: &[String]) -> Result<LiftedState> {
    let b = st.bind(domain, action, args)?;
    if !eval_formula(domain, st, &action.precondition, &b)? {
        return Err(PddlError::NotApplicable(format!("({} {})", action.name, args.join(" "))));
    }
    let (mut add, mut del) = (Vec::new(), Vec::new());
    collect_effects(domain, st, &action.effect, &b, &mut add, &mut del)?;
    let mut next = st.clone();
    for a in &del {
        next.facts.remove(a);
    }
    next.facts.extend(add);
    Ok(next)
}

/// Top-level precondition conjuncts that are false, with parameters substituted.
pub fn violated_conjuncts(domain: &Domain, st: &LiftedState, action: &ActionDef, args: &[String]) -> Result<Vec<String>> {
    let b = st.bind(domain, action, args)?;
    let mut out = Vec::new();
    for c in action.precondition.conjuncts() {
        if !eval_formula(domain, st, c, &b)? {
            out.push(substitute(c, &b).to_string());
        }
    }
    Ok(out)
}

/// Replaces bound variables (free occurrences only) by constants.
pub fn substitute(f: &Formula, b: &Binding) -> Formula {
    let term = |t: &Term| match t {
        Term::Var(v) => b.get(v).map(|c| Term::Const(c.clone())).unwrap_or_else(|| t.clone()),
        c => c.clone(),
    };
    match f {
        Formula::Atom(a) => Formula::Atom(Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(term).collect(),
        }),
        Formula::Eq(x, y) => Formula::Eq(term(x), term(y)),
        Formula::Not(g) => Formula::negate(substitute(g, b)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| substitute(g, b)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| substitute(g, b)).collect()),
        Formula::Forall(vars, g) => {
            let mut inner = b.clone();
            for v in vars {
                inner.remove(&v.name);
            }
            Formula::Forall(vars.clone(), Box::new(substitute(g, &inner)))
        }
    }
}
