use super::sexpr::{parse_all, parse_one, syntax, SExpr};
use super::{
    ActionDef, Atom, Domain, Effect, Formula, PddlError, PredicateDef, Problem, Result, Term,
    TypeDecl, TypedName,
};

const UNSUPPORTED_REQS: &[&str] = &[
    ":fluents",
    ":numeric-fluents",
    ":durative-actions",
    ":duration-inequalities",
    ":continuous-effects",
    ":derived-predicates",
    ":timed-initial-literals",
    ":preferences",
    ":constraints",
    ":action-costs",
    ":object-fluents",
];

fn unsupported(e: &SExpr, construct: impl Into<String>) -> PddlError {
    let p = e.pos();
    PddlError::UnsupportedConstruct {
        line: p.line,
        col: p.col,
        construct: construct.into(),
    }
}

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.list()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

fn expect_sym<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.sym()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

/// `a b - t c - u d` → [(a,t),(b,t),(c,u),(d,object)]
fn typed_list(items: &[SExpr]) -> Result<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.list().is_some() {
            return Err(unsupported(item, "either"));
        }
        let s = item.sym().unwrap();
        if s == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| syntax(item.pos(), "missing type after `-`"))?;
            if ty_expr.list().is_some() {
                return Err(unsupported(ty_expr, "either"));
            }
            let ty = ty_expr.sym().unwrap();
            if pending.is_empty() {
                return Err(syntax(item.pos(), "type without names"));
            }
            out.extend(pending.drain(..).map(|n| TypedName::new(n, ty)));
            i += 2;
        } else {
            pending.push(s.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|n| TypedName::new(n, "object")));
    Ok(out)
}

fn terms(items: &[SExpr]) -> Result<Vec<Term>> {
    items
        .iter()
        .map(|e| expect_sym(e, "term").map(Term::parse))
        .collect()
}

fn atom_from(items: &[SExpr], e: &SExpr) -> Result<Atom> {
    let pred = expect_sym(
        items.first().ok_or_else(|| syntax(e.pos(), "empty atom"))?,
        "predicate name",
    )?;
    Ok(Atom {
        predicate: pred.to_string(),
        args: terms(&items[1..])?,
    })
}

pub(crate) fn formula(e: &SExpr) -> Result<Formula> {
    let items = expect_list(e, "formula")?;
    if items.is_empty() {
        return Ok(Formula::truth());
    }
    let head = e.head().unwrap_or_default();
    match head.as_str() {
        "and" => Ok(Formula::And(
            items[1..].iter().map(formula).collect::<Result<_>>()?,
        )),
        "or" => Ok(Formula::Or(
            items[1..].iter().map(formula).collect::<Result<_>>()?,
        )),
        "not" => {
            if items.len() != 2 {
                return Err(syntax(e.pos(), "`not` takes one argument"));
            }
            Ok(Formula::negate(formula(&items[1])?))
        }
        "=" => {
            let ts = terms(&items[1..])?;
            if ts.len() != 2 {
                return Err(syntax(e.pos(), "`=` takes two terms"));
            }
            Ok(Formula::Eq(ts[0].clone(), ts[1].clone()))
        }
        "forall" => {
            if items.len() != 3 {
                return Err(syntax(e.pos(), "malformed forall"));
            }
            let vars = typed_list(expect_list(&items[1], "variable list")?)?;
            Ok(Formula::Forall(vars, Box::new(formula(&items[2])?)))
        }
        "exists" | "imply" | "when" | "<" | ">" | "<=" | ">=" | "preference" => {
            Err(unsupported(e, head))
        }
        _ => {
            if items[0].list().is_some() {
                return Err(syntax(e.pos(), "expected formula"));
            }
            Ok(Formula::Atom(atom_from(items, e)?))
        }
    }
}

pub(crate) fn effect(e: &SExpr) -> Result<Effect> {
    let items = expect_list(e, "effect")?;
    if items.is_empty() {
        return Ok(Effect::And(Vec::new()));
    }
    let head = e.head().unwrap_or_default();
    match head.as_str() {
        "and" => Ok(Effect::And(
            items[1..].iter().map(effect).collect::<Result<_>>()?,
        )),
        "not" => {
            let inner = items
                .get(1)
                .ok_or_else(|| syntax(e.pos(), "`not` takes one argument"))?;
            let li = expect_list(inner, "atom")?;
            Ok(Effect::Del(atom_from(li, inner)?))
        }
        "forall" => {
            if items.len() != 3 {
                return Err(syntax(e.pos(), "malformed forall"));
            }
            let vars = typed_list(expect_list(&items[1], "variable list")?)?;
            Ok(Effect::Forall(vars, Box::new(effect(&items[2])?)))
        }
        "when" => {
            if items.len() != 3 {
                return Err(syntax(e.pos(), "malformed when"));
            }
            Ok(Effect::When(formula(&items[1])?, Box::new(effect(&items[2])?)))
        }
        "increase" | "decrease" | "assign" | "scale-up" | "scale-down" => Err(unsupported(e, head)),
        _ => Ok(Effect::Add(atom_from(items, e)?)),
    }
}

pub(crate) fn action(e: &SExpr) -> Result<ActionDef> {
    let items = expect_list(e, "action")?;
    let name = expect_sym(
        items.get(1).ok_or_else(|| syntax(e.pos(), "action without name"))?,
        "action name",
    )?;
    let mut act = ActionDef {
        name: name.to_string(),
        params: Vec::new(),
        precondition: Formula::truth(),
        effect: Effect::And(Vec::new()),
    };
    let mut i = 2;
    while i < items.len() {
        let key = expect_sym(&items[i], "action keyword")?.to_ascii_lowercase();
        let val = items
            .get(i + 1)
            .ok_or_else(|| syntax(items[i].pos(), format!("missing value for {key}")))?;
        match key.as_str() {
            ":parameters" => act.params = typed_list(expect_list(val, "parameter list")?)?,
            ":precondition" => act.precondition = formula(val)?,
            ":effect" => act.effect = effect(val)?,
            _ => return Err(unsupported(&items[i], key)),
        }
        i += 2;
    }
    Ok(act)
}

fn predicates(items: &[SExpr]) -> Result<Vec<PredicateDef>> {
    items
        .iter()
        .map(|p| {
            let li = expect_list(p, "predicate declaration")?;
            let name = expect_sym(
                li.first().ok_or_else(|| syntax(p.pos(), "empty predicate"))?,
                "predicate name",
            )?;
            Ok(PredicateDef {
                name: name.to_string(),
                params: typed_list(&li[1..])?,
            })
        })
        .collect()
}

fn define_header<'a>(e: &'a SExpr, kind: &str) -> Result<(&'a str, &'a [SExpr])> {
    let items = expect_list(e, "(define ...)")?;
    if e.head().as_deref() != Some("define") {
        return Err(syntax(e.pos(), "expected `define`"));
    }
    let hdr = items
        .get(1)
        .ok_or_else(|| syntax(e.pos(), "missing header"))?;
    let h = expect_list(hdr, "header")?;
    if hdr.head().as_deref() != Some(kind) || h.len() != 2 {
        return Err(syntax(hdr.pos(), format!("expected ({kind} NAME)")));
    }
    Ok((expect_sym(&h[1], "name")?, &items[2..]))
}

pub fn read_domain(text: &str) -> Result<Domain> {
    let e = parse_one(text)?;
    let (name, sections) = define_header(&e, "domain")?;
    let mut dom = Domain {
        name: name.to_string(),
        ..Domain::default()
    };
    for sec in sections {
        let items = expect_list(sec, "domain section")?;
        let head = sec.head().unwrap_or_default();
        match head.as_str() {
            ":requirements" => {
                for r in &items[1..] {
                    let req = expect_sym(r, "requirement")?;
                    if UNSUPPORTED_REQS.contains(&req.to_ascii_lowercase().as_str()) {
                        return Err(unsupported(r, req));
                    }
                    dom.requirements.push(req.to_string());
                }
            }
            ":types" => {
                dom.types = typed_list(&items[1..])?
                    .into_iter()
                    .map(|t| TypeDecl {
                        parent: (t.ty != "object" || has_explicit_object(&items[1..], &t.name))
                            .then_some(t.ty),
                        name: t.name,
                    })
                    .collect()
            }
            ":constants" => dom.constants = typed_list(&items[1..])?,
            ":predicates" => dom.predicates = predicates(&items[1..])?,
            ":action" => dom.actions.push(action(sec)?),
            _ => return Err(unsupported(sec, head)),
        }
    }
    Ok(dom)
}

/// Distinguishes `t - object` from a bare `t` in a types list.
fn has_explicit_object(items: &[SExpr], name: &str) -> bool {
    let syms: Vec<&str> = items.iter().filter_map(SExpr::sym).collect();
    let Some(idx) = syms.iter().position(|s| *s == name) else {
        return false;
    };
    syms[idx..]
        .iter()
        .position(|s| *s == "-")
        .is_some_and(|d| syms.get(idx + d + 1).copied() == Some("object"))
}

pub fn read_problem(text: &str) -> Result<Problem> {
    let e = parse_one(text)?;
    let (name, sections) = define_header(&e, "problem")?;
    let mut prob = Problem {
        name: name.to_string(),
        ..Problem::default()
    };
    for sec in sections {
        let items = expect_list(sec, "problem section")?;
        let head = sec.head().unwrap_or_default();
        match head.as_str() {
            ":domain" => {
                prob.domain = expect_sym(
                    items.get(1).ok_or_else(|| syntax(sec.pos(), "missing domain name"))?,
                    "domain name",
                )?
                .to_string()
            }
            ":objects" => prob.objects = typed_list(&items[1..])?,
            ":init" => {
                for f in &items[1..] {
                    let li = expect_list(f, "fact")?;
                    let atom = atom_from(li, f)?;
                    if atom.predicate == "=" || !atom.is_ground() {
                        return Err(unsupported(f, atom.predicate));
                    }
                    if atom.predicate.eq_ignore_ascii_case("not") {
                        return Err(syntax(f.pos(), "negative literal in :init"));
                    }
                    prob.init.push(atom);
                }
            }
            ":goal" => {
                prob.goal = formula(
                    items
                        .get(1)
                        .ok_or_else(|| syntax(sec.pos(), "missing goal"))?,
                )?
            }
            _ => return Err(unsupported(sec, head)),
        }
    }
    Ok(prob)
}

pub fn read_action(text: &str) -> Result<ActionDef> {
    let e = parse_one(text)?;
    if e.head().as_deref() != Some(":action") {
        return Err(syntax(e.pos(), "expected (:action ...)"));
    }
    action(&e)
}

pub fn read_formula(text: &str) -> Result<Formula> {
    formula(&parse_one(text)?)
}

pub fn read_atom(text: &str) -> Result<Atom> {
    let e = parse_one(text)?;
    atom_from(expect_list(&e, "atom")?, &e)
}

/// Reads a sequence of predicate declarations such as `(at ?x - num) (dead ?o)`.
pub fn read_predicates(text: &str) -> Result<Vec<PredicateDef>> {
    predicates(&parse_all(text)?)
}


/// A top-level piece of a knowledge-base template body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fragment {
    Predicates(Vec<PredicateDef>),
    Action(ActionDef),
    /// Problem-side facts.
    Init(Vec<Atom>),
    /// `(:trigger (params) formula)`: when the interaction is pending.
    Trigger(Vec<TypedName>, Formula),
}

/// Reads `(:predicates ...)`, `(:action ...)`, `(:init ...)` and
/// `(:trigger ...)` blocks in any order.
pub fn read_fragments(text: &str) -> Result<Vec<Fragment>> {
    let mut out = Vec::new();
    for e in parse_all(text)? {
        let items = expect_list(&e, "template block")?;
        match e.head().as_deref() {
            Some(":predicates") => out.push(Fragment::Predicates(predicates(&items[1..])?)),
            Some(":action") => out.push(Fragment::Action(action(&e)?)),
            Some(":init") => out.push(Fragment::Init(
                items[1..]
                    .iter()
                    .map(|a| atom_from(expect_list(a, "atom")?, a))
                    .collect::<Result<_>>()?,
            )),
            Some(":trigger") => {
                if items.len() != 3 {
                    return Err(syntax(e.pos(), "expected (:trigger (params) formula)"));
                }
                let params = typed_list(expect_list(&items[1], "parameters")?)?;
                out.push(Fragment::Trigger(params, formula(&items[2])?));
            }
            _ => return Err(unsupported(&e, e.head().unwrap_or_default())),
        }
    }
    Ok(out)
}
