use std::collections::BTreeMap;
use std::fmt::Write;

use super::{GameModel, SpriteDef, TerminationKind};

fn params_str(params: &BTreeMap<String, String>) -> String {
    params
        .iter()
        .map(|(k, v)| format!(" {k}={v}"))
        .collect()
}

fn write_sprite(out: &mut String, model: &GameModel, sprite: &SpriteDef, depth: usize) {
    let _ = writeln!(
        out,
        "{}{} > {}{}",
        "    ".repeat(depth + 1),
        sprite.name,
        sprite.vgdl_type,
        params_str(&sprite.params)
    );
    for child in &sprite.children {
        if let Some(c) = model.sprite(child) {
            write_sprite(out, model, c, depth + 1);
        }
    }
}

/// Renders a model back to GDF text. Inherited parameters are written out
/// explicitly on every sprite, so re-parsing yields an equal model.
pub fn print_gdf(model: &GameModel) -> String {
    let mut out = String::from("SpriteSet\n");
    for sprite in model.sprites.iter().filter(|s| s.parent.is_none()) {
        write_sprite(&mut out, model, sprite, 0);
    }
    out.push_str("\nLevelMapping\n");
    for (ch, names) in &model.level_mapping {
        let _ = writeln!(out, "    {ch} > {}", names.join(" "));
    }
    out.push_str("\nInteractionSet\n");
    for i in &model.interactions {
        let _ = writeln!(
            out,
            "    {} {} > {}{}",
            i.receiver,
            i.producer,
            i.kind,
            params_str(&i.params)
        );
    }
    out.push_str("\nTerminationSet\n");
    for t in &model.terminations {
        let kind = match t.kind {
            TerminationKind::SpriteCounter => "SpriteCounter",
            TerminationKind::Timeout => "Timeout",
        };
        let stype = t
            .stype
            .as_ref()
            .map(|s| format!(" stype={s}"))
            .unwrap_or_default();
        let win = if t.win { "True" } else { "False" };
        let _ = writeln!(out, "    {kind}{stype} limit={} win={win}", t.limit);
    }
    out
}
