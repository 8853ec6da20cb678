//! Game-independent PDDL templates and their instantiation.
//!
//! A template file starts with `key: value` header lines (`id`, `kind`,
//! `key`, `placeholders`, `fragments`), then a blank line, then a body of
//! PDDL blocks: `(:predicates ...)`, `(:action ...)`, `(:init ...)` and
//! `(:trigger (params) formula)`.
//!
//! `<NAME>` marks a placeholder. Identifier placeholders (`placeholders:`)
//! take sprite or orientation names; inside a token that carries literal
//! uppercase letters (`<S1>_<S2>_KILLSPRITE`) they are uppercased, otherwise
//! lowercased (`got-resource-<S1>`). Fragment placeholders (`fragments:`)
//! take PDDL text, inserted verbatim.

mod microtest;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::pddl::{read_fragments, ActionDef, Atom, Formula, Fragment, PddlError, PredicateDef, TypedName};

pub use microtest::{run_micro_test, validate, MicroTestReport, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("no {kind} template for `{key}`")]
    UnknownTemplate { kind: String, key: String },
    #[error("template `{template}`: placeholder <{placeholder}> is not bound")]
    UnboundPlaceholder { template: String, placeholder: String },
    #[error("template `{template}`: placeholder <{placeholder}> is not declared in the header")]
    UndeclaredPlaceholder { template: String, placeholder: String },
    #[error("template `{template}`: `{value}` is not a valid identifier for <{placeholder}>")]
    InvalidIdentifier {
        template: String,
        placeholder: String,
        value: String,
    },
    #[error("{file}:{line}: {msg}")]
    Format { file: String, line: usize, msg: String },
    #[error("template `{template}`: {source}")]
    Pddl {
        template: String,
        #[source]
        source: PddlError,
    },
    #[error("duplicate template id `{0}`")]
    DuplicateTemplate(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, KbError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateKind {
    SpriteBehaviour,
    AvatarAction,
    Interaction,
    TurnControl,
}

impl TemplateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateKind::SpriteBehaviour => "SpriteBehaviour",
            TemplateKind::AvatarAction => "AvatarAction",
            TemplateKind::Interaction => "Interaction",
            TemplateKind::TurnControl => "TurnControl",
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            TemplateKind::SpriteBehaviour,
            TemplateKind::AvatarAction,
            TemplateKind::Interaction,
            TemplateKind::TurnControl,
        ]
        .into_iter()
        .find(|k| k.as_str().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown template kind `{s}`"))
    }
}

/// Placeholder name → value.
pub type Binding = BTreeMap<String, String>;

/// Builds a binding from `(name, value)` pairs.
pub fn binding<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Binding {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub kind: TemplateKind,
    /// VGDL sprite types, interaction kinds or control names this serves.
    pub keys: Vec<String>,
    pub placeholders: BTreeSet<String>,
    pub fragments: BTreeSet<String>,
    pub body: String,
}

/// Result of instantiating one or more templates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instantiated {
    pub predicates: Vec<PredicateDef>,
    pub actions: Vec<ActionDef>,
    pub init_facts: Vec<Atom>,
    pub triggers: Vec<(Vec<TypedName>, Formula)>,
}

impl Instantiated {
    pub fn extend(&mut self, other: Instantiated) {
        self.predicates.extend(other.predicates);
        self.actions.extend(other.actions);
        self.init_facts.extend(other.init_facts);
        self.triggers.extend(other.triggers);
    }
}

fn is_placeholder_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '-')
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Splits `text` into `(is_placeholder, piece)` segments.
fn segments(text: &str) -> Vec<(bool, &str)> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        let Some(close) = rest[open..].find('>') else { break };
        let name = &rest[open + 1..open + close];
        if !is_placeholder_name(name) {
            out.push((false, &rest[..open + 1]));
            rest = &rest[open + 1..];
            continue;
        }
        if open > 0 {
            out.push((false, &rest[..open]));
        }
        out.push((true, name));
        rest = &rest[open + close + 1..];
    }
    if !rest.is_empty() {
        out.push((false, rest));
    }
    out
}

/// Placeholder names occurring in `text`.
pub fn placeholders_in(text: &str) -> BTreeSet<String> {
    segments(text)
        .into_iter()
        .filter(|(p, _)| *p)
        .map(|(_, s)| s.to_string())
        .collect()
}

impl Template {
    pub fn parse(text: &str, file: &str) -> Result<Template> {
        let fmt_err = |line: usize, msg: String| KbError::Format {
            file: file.to_string(),
            line,
            msg,
        };
        let mut header = BTreeMap::new();
        let mut body_start = text.len();
        let mut offset = 0;
        for (i, line) in text.split_inclusive('\n').enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                body_start = offset + line.len();
                break;
            }
            let (k, v) = trimmed
                .split_once(':')
                .ok_or_else(|| fmt_err(i + 1, format!("expected `key: value`, found `{trimmed}`")))?;
            header.insert(k.trim().to_ascii_lowercase(), (i + 1, v.trim().to_string()));
            offset += line.len();
        }
        let get = |k: &str| -> Result<String> {
            header
                .get(k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| fmt_err(1, format!("missing `{k}:` header")))
        };
        let words = |k: &str| -> BTreeSet<String> {
            header
                .get(k)
                .map(|(_, v)| v.split_whitespace().map(str::to_string).collect())
                .unwrap_or_default()
        };
        let id = get("id")?;
        let kind_line = header.get("kind").map(|(l, _)| *l).unwrap_or(1);
        let kind = get("kind")?.parse().map_err(|e| fmt_err(kind_line, e))?;
        let t = Template {
            keys: get("key")?.split_whitespace().map(str::to_string).collect(),
            placeholders: words("placeholders"),
            fragments: words("fragments"),
            body: text[body_start.min(text.len())..].to_string(),
            id,
            kind,
        };
        for p in placeholders_in(&t.body) {
            if !t.placeholders.contains(&p) && !t.fragments.contains(&p) {
                return Err(KbError::UndeclaredPlaceholder {
                    template: t.id.clone(),
                    placeholder: p,
                });
            }
        }
        t.substitute(&t.dummy_binding())?;
        Ok(t)
    }

    fn dummy_binding(&self) -> Binding {
        self.placeholders
            .iter()
            .map(|p| (p.clone(), "x".to_string()))
            .chain(self.fragments.iter().map(|f| (f.clone(), String::new())))
            .collect()
    }

    pub fn serves(&self, kind: TemplateKind, key: &str) -> bool {
        self.kind == kind && self.keys.iter().any(|k| k.eq_ignore_ascii_case(key))
    }

    /// Substitutes every placeholder; the result contains no `<NAME>` tokens.
    pub fn substitute(&self, b: &Binding) -> Result<String> {
        for p in &self.placeholders {
            if let Some(v) = b.get(p) {
                if !is_identifier(v) {
                    return Err(KbError::InvalidIdentifier {
                        template: self.id.clone(),
                        placeholder: p.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
        let mut out = String::with_capacity(self.body.len());
        // Work token by token so the case rule sees the whole identifier.
        let mut token = String::new();
        let flush = |token: &mut String, out: &mut String| -> Result<()> {
            if token.is_empty() {
                return Ok(());
            }
            let segs = segments(token);
            let upper = segs
                .iter()
                .any(|(p, s)| !*p && s.chars().any(|c| c.is_ascii_uppercase()));
            for (is_ph, s) in segs {
                if !is_ph {
                    out.push_str(s);
                    continue;
                }
                let v = b.get(s).ok_or_else(|| KbError::UnboundPlaceholder {
                    template: self.id.clone(),
                    placeholder: s.to_string(),
                })?;
                if self.fragments.contains(s) {
                    out.push_str(v);
                } else if upper {
                    out.push_str(&v.to_ascii_uppercase());
                } else {
                    out.push_str(&v.to_ascii_lowercase());
                }
            }
            token.clear();
            Ok(())
        };
        for c in self.body.chars() {
            if c.is_whitespace() || c == '(' || c == ')' {
                flush(&mut token, &mut out)?;
                out.push(c);
            } else {
                token.push(c);
            }
        }
        flush(&mut token, &mut out)?;
        Ok(out)
    }

    pub fn instantiate(&self, b: &Binding) -> Result<Instantiated> {
        let text = self.substitute(b)?;
        let frags = read_fragments(&text).map_err(|source| KbError::Pddl {
            template: self.id.clone(),
            source,
        })?;
        let mut out = Instantiated::default();
        for f in frags {
            match f {
                Fragment::Predicates(ps) => out.predicates.extend(ps),
                Fragment::Action(a) => out.actions.push(a),
                Fragment::Init(atoms) => out.init_facts.extend(atoms),
                Fragment::Trigger(params, f) => out.triggers.push((params, f)),
            }
        }
        Ok(out)
    }
}

/// All templates serving one (kind, key) pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateSet {
    pub templates: Vec<Template>,
}

impl TemplateSet {
    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.templates.iter().map(|t| t.id.as_str()).collect()
    }

    /// Union of the identifier and fragment placeholders of all members.
    pub fn placeholders(&self) -> BTreeSet<String> {
        self.templates
            .iter()
            .flat_map(|t| t.placeholders.iter().chain(&t.fragments).cloned())
            .collect()
    }
}

/// Instantiates every template of `set` with one binding.
pub fn instantiate(set: &TemplateSet, b: &Binding) -> Result<Instantiated> {
    let mut out = Instantiated::default();
    for t in &set.templates {
        out.extend(t.instantiate(b)?);
    }
    Ok(out)
}

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../kb/", $name, ".tpl")), include_str!(concat!("../../kb/", $name, ".test")))),*]
    };
}

const BUILTIN: &[(&str, &str, &str)] = builtin!(
    "base",
    "sprite-object",
    "sprite-static",
    "resource-counter",
    "timeout",
    "missile-phase",
    "missile-move",
    "missile-move-stop",
    "missile-move-stop-object",
    "missile-leave",
    "missile-stop-phase",
    "avatar-move",
    "avatar-nil",
    "avatar-use",
    "avatar-use-facing",
    "kill-sprite",
    "kill-both",
    "kill-if-from-above",
    "bounce-forward",
    "collect-resource",
    "kill-if-other-has-more",
    "step-back",
    "end-turn-interactions",
    "end-turn-sprites",
);

/// A loaded set of templates plus their micro-tests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    templates: Vec<Template>,
    /// Template id → micro-test source.
    tests: BTreeMap<String, String>,
}

impl KnowledgeBase {
    /// The templates shipped with the crate.
    pub fn builtin() -> KnowledgeBase {
        let mut kb = KnowledgeBase::default();
        for (name, tpl, test) in BUILTIN {
            let t = Template::parse(tpl, &format!("{name}.tpl"))
                .unwrap_or_else(|e| panic!("builtin template {name}: {e}"));
            kb.tests.insert(t.id.clone(), test.to_string());
            kb.templates.push(t);
        }
        kb
    }

    /// Loads every `*.tpl` in `dir` (sorted by file name) with its sibling `*.test`.
    pub fn load_dir(dir: &Path) -> Result<KnowledgeBase> {
        let io = |e: std::io::Error| KbError::Io {
            path: dir.display().to_string(),
            msg: e.to_string(),
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "tpl"))
            .collect();
        paths.sort();
        let mut kb = KnowledgeBase::default();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(io)?;
            let t = Template::parse(&text, &p.display().to_string())?;
            if kb.templates.iter().any(|o| o.id == t.id) {
                return Err(KbError::DuplicateTemplate(t.id));
            }
            if let Ok(test) = std::fs::read_to_string(p.with_extension("test")) {
                kb.tests.insert(t.id.clone(), test);
            }
            kb.templates.push(t);
        }
        Ok(kb)
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn micro_test(&self, id: &str) -> Option<&str> {
        self.tests.get(id).map(String::as_str)
    }

    pub fn get(&self, id: &str) -> Result<&Template> {
        self.templates
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| KbError::UnknownTemplate {
                kind: "any".into(),
                key: id.to_string(),
            })
    }

    /// Templates serving `key` (a VGDL type, interaction kind or control name).
    pub fn lookup(&self, kind: TemplateKind, key: &str) -> Result<TemplateSet> {
        let templates: Vec<Template> = self
            .templates
            .iter()
            .filter(|t| t.serves(kind, key))
            .cloned()
            .collect();
        if templates.is_empty() {
            return Err(KbError::UnknownTemplate {
                kind: kind.to_string(),
                key: key.to_string(),
            });
        }
        Ok(TemplateSet { templates })
    }

    /// Instantiates template `id`.
    pub fn instantiate(&self, id: &str, b: &Binding) -> Result<Instantiated> {
        self.get(id)?.instantiate(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb() -> KnowledgeBase {
        KnowledgeBase::builtin()
    }

    #[test]
    fn builtin_micro_tests_pass() {
        let report = validate(&kb());
        let failures: Vec<String> = report
            .failures()
            .map(|r| format!("{}: {}", r.template, r.message))
            .collect();
        assert!(failures.is_empty(), "{failures:#?}");
        assert_eq!(report.results.len(), BUILTIN.len());
    }

    #[test]
    fn collect_resource_matches_hand_written_action() {
        let inst = kb()
            .instantiate("collect-resource", &binding([("S1", "shoes"), ("S2", "user")]))
            .unwrap();
        let expected = crate::pddl::read_action(
            "(:action SHOES_USER_COLLECTRESOURCE
               :parameters (?o1 - shoes ?o2 - user ?x ?y ?r ?r_next - num)
               :precondition (and (turn-interactions) (not (= ?o1 ?o2))
                 (at ?x ?y ?o1) (at ?x ?y ?o2)
                 (got-resource-shoes ?r) (next ?r ?r_next))
               :effect (and (not (at ?x ?y ?o1)) (dead ?o1)
                 (not (got-resource-shoes ?r)) (got-resource-shoes ?r_next)))",
        )
        .unwrap();
        assert_eq!(inst.actions, vec![expected]);
        let a = &inst.actions[0];
        assert_eq!(a.params.len(), 6);
        assert_eq!(a.precondition.conjuncts().len(), 6);
        assert_eq!(a.effect.parts().len(), 4);
    }

    #[test]
    fn missing_binding_is_reported() {
        let err = kb()
            .instantiate("collect-resource", &binding([("S1", "shoes")]))
            .unwrap_err();
        assert_eq!(
            err,
            KbError::UnboundPlaceholder {
                template: "collect-resource".into(),
                placeholder: "S2".into()
            }
        );
    }

    #[test]
    fn missile_move_down() {
        let b = binding([
            ("T", "rock"),
            ("O", "down"),
            ("NEW", "?new_y"),
            ("STEP", "(next ?y ?new_y)"),
            ("DEST", "?x ?new_y"),
            ("BOUND", "(row ?new_y)"),
            ("FREE", ""),
        ]);
        let a = &kb().instantiate("missile-move", &b).unwrap().actions[0];
        assert_eq!(a.name, "ROCK_MOVE_DOWN");
        let pre = a.precondition.to_string();
        assert!(pre.contains("(oriented-down ?o)"), "{pre}");
        assert!(pre.contains("(next ?y ?new_y)"), "{pre}");
    }

    #[test]
    fn lookups() {
        let kb = kb();
        let missile = kb.lookup(TemplateKind::SpriteBehaviour, "Missile").unwrap();
        let ids = missile.ids();
        for id in ["missile-phase", "missile-move", "missile-move-stop"] {
            assert!(ids.contains(&id), "{ids:?}");
        }
        let preds = missile
            .templates
            .iter()
            .find(|t| t.id == "missile-phase")
            .unwrap()
            .instantiate(&binding([("T", "rock")]))
            .unwrap()
            .predicates;
        let names: Vec<_> = preds.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["rock-moved", "turn-rock-move", "finished-turn-rock-move"]);

        let immovable = kb.lookup(TemplateKind::SpriteBehaviour, "Immovable").unwrap();
        for t in &immovable.templates {
            let b: Binding = t.placeholders.iter().map(|p| (p.clone(), "w".to_string())).collect();
            assert!(t.instantiate(&b).unwrap().actions.is_empty());
        }
        assert!(matches!(
            kb.lookup(TemplateKind::Interaction, "transformTo"),
            Err(KbError::UnknownTemplate { .. })
        ));
        assert!(kb.lookup(TemplateKind::Interaction, "collectresource").is_ok());
    }

    #[test]
    fn case_rule() {
        let t = Template::parse(
            "id: t\nkind: Interaction\nkey: x\nplaceholders: A\nfragments: F\n\n(:action <A>_GO :parameters (?o - <A>) :precondition (and (is-<A> ?o) <F>) :effect (and))\n",
            "t.tpl",
        )
        .unwrap();
        let s = t.substitute(&binding([("A", "Box"), ("F", "(Keep ?o)")])).unwrap();
        assert!(s.contains("BOX_GO"));
        assert!(s.contains("?o - box"));
        assert!(s.contains("(is-box ?o)"));
        assert!(s.contains("(Keep ?o)"));
    }

    #[test]
    fn undeclared_placeholder_rejected() {
        let err = Template::parse("id: t\nkind: TurnControl\nkey: x\n\n(:predicates (p-<Q>))\n", "t.tpl").unwrap_err();
        assert!(matches!(err, KbError::UndeclaredPlaceholder { .. }));
    }

    #[test]
    fn bad_identifier_rejected() {
        let err = kb()
            .instantiate("kill-sprite", &binding([("S1", "a b"), ("S2", "c")]))
            .unwrap_err();
        assert!(matches!(err, KbError::InvalidIdentifier { .. }));
    }

    #[test]
    fn flipped_effect_fails_only_its_test() {
        let dir = tempfile::tempdir().unwrap();
        for (name, tpl, test) in BUILTIN {
            let tpl = if *name == "kill-sprite" {
                tpl.replace("(dead ?o1)))", "(not (dead ?o1))))")
            } else {
                tpl.to_string()
            };
            std::fs::write(dir.path().join(format!("{name}.tpl")), tpl).unwrap();
            std::fs::write(dir.path().join(format!("{name}.test")), test).unwrap();
        }
        let kb = KnowledgeBase::load_dir(dir.path()).unwrap();
        let report = validate(&kb);
        let failed: Vec<_> = report.failures().map(|r| r.template.as_str()).collect();
        assert_eq!(failed, ["kill-sprite"]);
    }

    #[test]
    fn empty_kb_passes_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let report = validate(&KnowledgeBase::load_dir(dir.path()).unwrap());
        assert!(report.all_passed());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn shipped_directory_matches_builtin() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("kb");
        let on_disk = KnowledgeBase::load_dir(&dir).unwrap();
        let mut a: Vec<_> = on_disk.templates().to_vec();
        let mut b: Vec<_> = kb().templates().to_vec();
        a.sort_by(|x, y| x.id.cmp(&y.id));
        b.sort_by(|x, y| x.id.cmp(&y.id));
        assert_eq!(a, b);
    }
}
