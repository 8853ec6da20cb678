use std::fmt::Write;

use super::{typed_list, Domain, Effect, Formula, Problem, TypeDecl};

fn pad(depth: usize) -> String {
    "  ".repeat(depth)
}

fn is_flat(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) | Formula::Eq(..) => true,
        Formula::Not(g) => matches!(**g, Formula::Atom(_) | Formula::Eq(..)),
        Formula::And(gs) => gs.is_empty(),
        _ => false,
    }
}

fn write_formula(out: &mut String, f: &Formula, depth: usize) {
    if is_flat(f) {
        let _ = write!(out, "{f}");
        return;
    }
    match f {
        Formula::And(gs) | Formula::Or(gs) => {
            out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
            for g in gs {
                let _ = write!(out, "\n{}", pad(depth + 1));
                write_formula(out, g, depth + 1);
            }
            let _ = write!(out, "\n{})", pad(depth));
        }
        Formula::Not(g) => {
            out.push_str("(not ");
            write_formula(out, g, depth);
            out.push(')');
        }
        Formula::Forall(vars, g) => {
            let _ = write!(out, "(forall ({})\n{}", typed_list(vars), pad(depth + 1));
            write_formula(out, g, depth + 1);
            let _ = write!(out, "\n{})", pad(depth));
        }
        Formula::Atom(_) | Formula::Eq(..) => unreachable!(),
    }
}

fn write_effect(out: &mut String, e: &Effect, depth: usize) {
    match e {
        Effect::Add(_) | Effect::Del(_) => {
            let _ = write!(out, "{e}");
        }
        Effect::And(es) if es.is_empty() => out.push_str("(and)"),
        Effect::And(es) => {
            out.push_str("(and");
            for x in es {
                let _ = write!(out, "\n{}", pad(depth + 1));
                write_effect(out, x, depth + 1);
            }
            let _ = write!(out, "\n{})", pad(depth));
        }
        Effect::Forall(vars, x) => {
            let _ = write!(out, "(forall ({})\n{}", typed_list(vars), pad(depth + 1));
            write_effect(out, x, depth + 1);
            let _ = write!(out, "\n{})", pad(depth));
        }
        Effect::When(c, x) => {
            out.push_str("(when ");
            write_formula(out, c, depth + 1);
            let _ = write!(out, "\n{}", pad(depth + 1));
            write_effect(out, x, depth + 1);
            let _ = write!(out, "\n{})", pad(depth));
        }
    }
}

fn write_types(out: &mut String, types: &[TypeDecl]) {
    let mut i = 0;
    while i < types.len() {
        let mut j = i;
        while j < types.len() && types[j].parent == types[i].parent {
            j += 1;
        }
        let names: Vec<&str> = types[i..j].iter().map(|t| t.name.as_str()).collect();
        let _ = write!(out, "\n    {}", names.join(" "));
        if let Some(p) = &types[i].parent {
            let _ = write!(out, " - {p}");
        }
        i = j;
    }
}

/// Renders a domain in a stable, indented layout.
pub fn print_domain(d: &Domain) -> String {
    let mut out = String::new();
    let _ = write!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = write!(out, "\n  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        out.push_str("\n  (:types");
        write_types(&mut out, &d.types);
        out.push_str("\n  )");
    }
    if !d.constants.is_empty() {
        let _ = write!(out, "\n  (:constants {})", typed_list(&d.constants));
    }
    if !d.predicates.is_empty() {
        out.push_str("\n  (:predicates");
        for p in &d.predicates {
            if p.params.is_empty() {
                let _ = write!(out, "\n    ({})", p.name);
            } else {
                let _ = write!(out, "\n    ({} {})", p.name, typed_list(&p.params));
            }
        }
        out.push_str("\n  )");
    }
    for a in &d.actions {
        let _ = write!(out, "\n\n  (:action {}", a.name);
        let _ = write!(out, "\n    :parameters ({})", typed_list(&a.params));
        out.push_str("\n    :precondition ");
        write_formula(&mut out, &a.precondition, 2);
        out.push_str("\n    :effect ");
        write_effect(&mut out, &a.effect, 2);
        out.push_str("\n  )");
    }
    out.push_str("\n)\n");
    out
}

pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = write!(out, "(define (problem {})", p.name);
    let _ = write!(out, "\n  (:domain {})", p.domain);
    out.push_str("\n  (:objects");
    let mut i = 0;
    while i < p.objects.len() {
        let mut j = i;
        while j < p.objects.len() && p.objects[j].ty == p.objects[i].ty {
            j += 1;
        }
        let _ = write!(out, "\n    {}", typed_list(&p.objects[i..j]));
        i = j;
    }
    out.push_str("\n  )");
    out.push_str("\n  (:init");
    for a in &p.init {
        let _ = write!(out, "\n    {a}");
    }
    out.push_str("\n  )");
    out.push_str("\n  (:goal\n    ");
    write_formula(&mut out, &p.goal, 2);
    out.push_str("\n  )\n)\n");
    out
}
