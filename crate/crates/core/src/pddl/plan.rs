use std::fmt;

use super::{PddlError, Result};

/// One step of a sequential plan, e.g. `(AVATAR_ACTION_MOVE_UP avatar n1 n2 n1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanStep {
    pub name: String,
    pub args: Vec<String>,
}

impl PlanStep {
    pub fn new(name: impl Into<String>, args: Vec<String>) -> PlanStep {
        PlanStep {
            name: name.into(),
            args,
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Parses IPC plan text: one parenthesised step per line, optionally prefixed
/// by `time:` and suffixed by `[duration]`. `;` starts a comment.
pub fn parse_plan(text: &str) -> Result<Vec<PlanStep>> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (open, close) = match (line.find('('), line.find(')')) {
            (Some(o), Some(c)) if o < c => (o, c),
            _ => {
                return Err(PddlError::Syntax {
                    line: i + 1,
                    col: 1,
                    msg: format!("expected `(action args...)`, found `{line}`"),
                })
            }
        };
        let mut words = line[open + 1..close].split_whitespace();
        let name = words.next().ok_or_else(|| PddlError::Syntax {
            line: i + 1,
            col: open + 1,
            msg: "empty plan step".into(),
        })?;
        steps.push(PlanStep::new(name, words.map(str::to_string).collect()));
    }
    Ok(steps)
}

pub fn write_plan(steps: &[PlanStep]) -> String {
    let mut out = String::new();
    for s in steps {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out.push_str(&format!("; cost = {} (unit cost)\n", steps.len()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let steps = vec![
            PlanStep::new("A", vec!["x".into(), "y".into()]),
            PlanStep::new("end-turn", vec![]),
        ];
        assert_eq!(parse_plan(&write_plan(&steps)).unwrap(), steps);
    }

    #[test]
    fn ipc_timestamps() {
        let p = parse_plan("0.000: (move a b) [1]\n1: (NIL avatar)\n").unwrap();
        assert_eq!(p[0].name, "move");
        assert_eq!(p[1].args, vec!["avatar"]);
    }

    #[test]
    fn garbage_is_an_error() {
        assert!(parse_plan("move a b\n").is_err());
        assert!(parse_plan("()\n").is_err());
    }
}
