use std::collections::BTreeMap;

use super::{
    GameModel, InteractionDef, InteractionKind, Result, SpriteDef, TerminationDef,
    TerminationKind, VgdlError, VgdlType,
};

const SECTIONS: [&str; 4] = ["SpriteSet", "LevelMapping", "InteractionSet", "TerminationSet"];

struct Line<'a> {
    no: usize,
    indent: usize,
    text: &'a str,
}

fn indent_of(raw: &str) -> usize {
    let mut width = 0;
    for c in raw.chars() {
        match c {
            ' ' => width += 1,
            '\t' => width += 4,
            _ => break,
        }
    }
    width
}

/// Splits `lhs > rhs` (or `lhs < rhs`) at the first separator.
fn split_arrow(text: &str) -> Option<(&str, &str)> {
    let idx = text.find(['>', '<'])?;
    Some((text[..idx].trim(), text[idx + 1..].trim()))
}

fn parse_params(
    tokens: &[&str],
    line: usize,
) -> Result<BTreeMap<String, String>> {
    let mut params = BTreeMap::new();
    for tok in tokens {
        let Some((k, v)) = tok.split_once('=') else {
            return Err(VgdlError::Syntax {
                line,
                msg: format!("expected key=value, found `{tok}`"),
            });
        };
        params.insert(k.to_string(), v.to_string());
    }
    Ok(params)
}

struct RawSprite {
    line: usize,
    name: String,
    vgdl_type: Option<VgdlType>,
    params: BTreeMap<String, String>,
    parent: Option<usize>,
}

/// Parses a GDF into a hierarchy-resolved, validated [`GameModel`].
///
/// Nesting in `SpriteSet` follows strictly increasing indentation (tabs count
/// as four spaces). A leading `BasicGame` header line is accepted and ignored.
/// Comments are not part of the accepted syntax.
pub fn parse_gdf(text: &str) -> Result<GameModel> {
    let lines: Vec<Line> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| Line {
            no: i + 1,
            indent: indent_of(l),
            text: l.trim(),
        })
        .collect();
    if lines.is_empty() {
        return Err(VgdlError::Empty);
    }

    let mut bodies: BTreeMap<&str, (usize, Vec<&Line>)> = BTreeMap::new();
    let mut current: Option<(&str, usize)> = None;
    for line in &lines {
        let head = line.text.split_whitespace().next().unwrap_or("");
        if let Some(sec) = SECTIONS.iter().find(|s| **s == head) {
            if bodies.contains_key(sec) {
                return Err(VgdlError::Syntax {
                    line: line.no,
                    msg: format!("section {sec} declared twice"),
                });
            }
            bodies.insert(sec, (line.indent, Vec::new()));
            current = Some((sec, line.indent));
            continue;
        }
        match current {
            Some((sec, ind)) if line.indent > ind => bodies.get_mut(sec).unwrap().1.push(line),
            _ if head == "BasicGame" && current.is_none() => {}
            _ => {
                return Err(VgdlError::Syntax {
                    line: line.no,
                    msg: format!("line outside of any section: `{}`", line.text),
                })
            }
        }
    }
    for sec in SECTIONS {
        if !bodies.contains_key(sec) {
            return Err(VgdlError::MissingSection(sec.to_string()));
        }
    }

    let sprites = parse_sprites(&bodies["SpriteSet"].1)?;
    let (sprites, sprite_lines) = resolve_sprites(sprites)?;
    let mut model = GameModel {
        sprites,
        level_mapping: BTreeMap::new(),
        interactions: Vec::new(),
        terminations: Vec::new(),
    };
    let declared = |name: &str, line: usize| -> Result<()> {
        if sprite_lines.contains_key(name) {
            Ok(())
        } else {
            Err(VgdlError::DanglingReference {
                line,
                name: name.to_string(),
            })
        }
    };

    for s in &model.sprites {
        if let Some(stype) = s.param("stype") {
            declared(stype, sprite_lines[&s.name])?;
        }
    }

    for line in &bodies["LevelMapping"].1 {
        let (lhs, rhs) = split_arrow(line.text).ok_or_else(|| VgdlError::Syntax {
            line: line.no,
            msg: "expected `char > sprites`".into(),
        })?;
        let mut chars = lhs.chars();
        let (Some(ch), None) = (chars.next(), chars.next()) else {
            return Err(VgdlError::Syntax {
                line: line.no,
                msg: format!("level mapping key must be one character, found `{lhs}`"),
            });
        };
        let names: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
        if names.is_empty() {
            return Err(VgdlError::Syntax {
                line: line.no,
                msg: "level mapping without sprites".into(),
            });
        }
        for n in &names {
            declared(n, line.no)?;
        }
        model.level_mapping.insert(ch, names);
    }

    for line in &bodies["InteractionSet"].1 {
        let (lhs, rhs) = split_arrow(line.text).ok_or_else(|| VgdlError::Syntax {
            line: line.no,
            msg: "expected `receiver producer > kind`".into(),
        })?;
        let names: Vec<&str> = lhs.split_whitespace().collect();
        if names.len() < 2 {
            return Err(VgdlError::Syntax {
                line: line.no,
                msg: "an interaction needs a receiver and a producer".into(),
            });
        }
        let rtoks: Vec<&str> = rhs.split_whitespace().collect();
        let Some(kind_tok) = rtoks.first() else {
            return Err(VgdlError::Syntax {
                line: line.no,
                msg: "missing interaction kind".into(),
            });
        };
        let kind: InteractionKind =
            kind_tok
                .parse()
                .map_err(|_| VgdlError::UnknownInteractionType {
                    line: line.no,
                    name: kind_tok.to_string(),
                })?;
        let params = parse_params(&rtoks[1..], line.no)?;
        for p in kind.required_params() {
            if !params.contains_key(*p) {
                return Err(VgdlError::MissingParam {
                    line: line.no,
                    kind: kind.to_string(),
                    param: p.to_string(),
                });
            }
        }
        if let Some(res) = params.get("resource") {
            declared(res, line.no)?;
        }
        if let Some(limit) = params.get("limit") {
            limit.parse::<u32>().map_err(|_| VgdlError::Syntax {
                line: line.no,
                msg: format!("limit must be a nonnegative integer, found `{limit}`"),
            })?;
        }
        let receiver = names[0];
        declared(receiver, line.no)?;
        for producer in &names[1..] {
            declared(producer, line.no)?;
            if *producer == receiver {
                return Err(VgdlError::SelfInteraction {
                    line: line.no,
                    name: receiver.to_string(),
                });
            }
            model.interactions.push(InteractionDef {
                receiver: receiver.to_string(),
                producer: producer.to_string(),
                kind,
                params: params.clone(),
            });
        }
    }

    for line in &bodies["TerminationSet"].1 {
        let toks: Vec<&str> = line.text.split_whitespace().collect();
        let kind = match toks[0] {
            t if t.eq_ignore_ascii_case("SpriteCounter") => TerminationKind::SpriteCounter,
            t if t.eq_ignore_ascii_case("Timeout") => TerminationKind::Timeout,
            other => {
                return Err(VgdlError::UnknownTerminationType {
                    line: line.no,
                    name: other.to_string(),
                })
            }
        };
        let params = parse_params(&toks[1..], line.no)?;
        let limit = match params.get("limit") {
            Some(l) => l.parse::<u32>().map_err(|_| VgdlError::Syntax {
                line: line.no,
                msg: format!("limit must be a nonnegative integer, found `{l}`"),
            })?,
            None => 0,
        };
        let win = match params.get("win") {
            Some(w) if w.eq_ignore_ascii_case("true") => true,
            Some(w) if w.eq_ignore_ascii_case("false") => false,
            Some(w) => {
                return Err(VgdlError::Syntax {
                    line: line.no,
                    msg: format!("win must be True or False, found `{w}`"),
                })
            }
            None => false,
        };
        let stype = params.get("stype").cloned();
        match (kind, &stype) {
            (TerminationKind::SpriteCounter, None) => {
                return Err(VgdlError::Syntax {
                    line: line.no,
                    msg: "SpriteCounter requires stype".into(),
                })
            }
            (TerminationKind::Timeout, Some(_)) => {
                return Err(VgdlError::Syntax {
                    line: line.no,
                    msg: "Timeout takes no stype".into(),
                })
            }
            (_, Some(s)) => declared(s, line.no)?,
            _ => {}
        }
        model.terminations.push(TerminationDef {
            kind,
            stype,
            limit,
            win,
        });
    }

    if model.avatar().is_none() {
        return Err(VgdlError::NoAvatar);
    }
    if !model.terminations.iter().any(|t| t.win) {
        return Err(VgdlError::NoWinTermination);
    }
    Ok(model)
}

fn parse_sprites(lines: &[&Line]) -> Result<Vec<RawSprite>> {
    let mut out: Vec<RawSprite> = Vec::new();
    // open levels: (indent, index into out)
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let base = lines.first().map(|l| l.indent).unwrap_or(0);
    for line in lines {
        match stack.last() {
            Some(&(ind, _)) if line.indent > ind => {}
            _ => {
                while matches!(stack.last(), Some(&(ind, _)) if ind > line.indent) {
                    stack.pop();
                }
                match stack.last() {
                    Some(&(ind, _)) if ind == line.indent => {
                        stack.pop();
                    }
                    Some(_) => {
                        return Err(VgdlError::IndentationError {
                            line: line.no,
                            msg: "dedent does not match any enclosing level".into(),
                        })
                    }
                    None if line.indent != base => {
                        return Err(VgdlError::IndentationError {
                            line: line.no,
                            msg: "sprite is not aligned with the first sprite".into(),
                        })
                    }
                    None => {}
                }
            }
        }
        let parent = stack.last().map(|&(_, idx)| idx);

        let (name, rhs) = match split_arrow(line.text) {
            Some((n, r)) => (n, r),
            None => (line.text, ""),
        };
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(VgdlError::Syntax {
                line: line.no,
                msg: format!("invalid sprite declaration `{}`", line.text),
            });
        }
        let toks: Vec<&str> = rhs.split_whitespace().collect();
        let (vgdl_type, ptoks) = match toks.first() {
            Some(t) if !t.contains('=') => {
                let ty: VgdlType = t.parse().map_err(|_| VgdlError::UnknownSpriteType {
                    line: line.no,
                    name: t.to_string(),
                })?;
                (Some(ty), &toks[1..])
            }
            _ => (None, &toks[..]),
        };
        let params = parse_params(ptoks, line.no)?;
        out.push(RawSprite {
            line: line.no,
            name: name.to_string(),
            vgdl_type,
            params,
            parent,
        });
        stack.push((line.indent, out.len() - 1));
    }
    Ok(out)
}

fn resolve_sprites(raw: Vec<RawSprite>) -> Result<(Vec<SpriteDef>, BTreeMap<String, usize>)> {
    let mut lines = BTreeMap::new();
    for s in &raw {
        if lines.insert(s.name.clone(), s.line).is_some() {
            return Err(VgdlError::DuplicateSprite {
                line: s.line,
                name: s.name.clone(),
            });
        }
    }
    let mut resolved: Vec<SpriteDef> = Vec::with_capacity(raw.len());
    for s in &raw {
        // parents always precede children in pre-order
        let (vgdl_type, params) = match s.parent {
            Some(p) => {
                let parent = &resolved[p];
                let mut params = parent.params.clone();
                params.extend(s.params.clone());
                (s.vgdl_type.unwrap_or(parent.vgdl_type), params)
            }
            None => {
                let ty = s.vgdl_type.ok_or_else(|| VgdlError::UnknownSpriteType {
                    line: s.line,
                    name: String::new(),
                })?;
                (ty, s.params.clone())
            }
        };
        resolved.push(SpriteDef {
            name: s.name.clone(),
            vgdl_type,
            params,
            parent: s.parent.map(|p| raw[p].name.clone()),
            children: Vec::new(),
        });
    }
    for (i, s) in raw.iter().enumerate() {
        if let Some(p) = s.parent {
            let child = resolved[i].name.clone();
            resolved[p].children.push(child);
        }
    }
    Ok((resolved, lines))
}
