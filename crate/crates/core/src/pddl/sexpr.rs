use super::{PddlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Sym(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Sym(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn sym(&self) -> Option<&str> {
        match self {
            SExpr::Sym(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Sym(..) => None,
        }
    }

    /// Head symbol of a list, lowercased.
    pub fn head(&self) -> Option<String> {
        self.list()
            .and_then(|l| l.first())
            .and_then(SExpr::sym)
            .map(str::to_ascii_lowercase)
    }
}

pub fn syntax(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

/// Reads every top-level expression. `;` starts a comment running to end of line.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        col += 1;
        let pos = Pos { line, col };
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            ';' => {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => stack.push((Vec::new(), pos)),
            ')' => {
                let (items, start) = stack
                    .pop()
                    .ok_or_else(|| syntax(pos, "unbalanced `)`"))?;
                let expr = SExpr::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(expr),
                    None => top.push(expr),
                }
            }
            c if c.is_whitespace() => {}
            _ => {
                let mut sym = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    sym.push(n);
                    chars.next();
                    col += 1;
                }
                let expr = SExpr::Sym(sym, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(expr),
                    None => top.push(expr),
                }
            }
        }
    }
    if let Some((_, start)) = stack.pop() {
        return Err(syntax(start, "unclosed `(`"));
    }
    Ok(top)
}

pub fn parse_one(text: &str) -> Result<SExpr> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(syntax(Pos { line: 1, col: 1 }, "empty input")),
        _ => Err(syntax(all[1].pos(), "trailing input after expression")),
    }
}
