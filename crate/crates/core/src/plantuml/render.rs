use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::model::{normalize, ActorKind, UseCaseModel, Violation};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' {
            out.push('"');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Renders the canonical PlantUML source for `model`.
///
/// The model is normalized first, so element order and whitespace in names
/// never depend on how the model was built.
pub fn render_model(model: &UseCaseModel) -> Result<String, Vec<Violation>> {
    let m = normalize(model)?;
    let mut out = String::new();
    // writes to a String cannot fail
    let _ = writeln!(out, "@startuml");
    let _ = writeln!(out, "left to right direction");
    for a in &m.actors {
        let _ = write!(out, "actor {} as {}", quote(&a.name), a.id);
        if a.kind != ActorKind::Human {
            let _ = write!(out, " <<{}>>", a.kind.as_str());
        }
        out.push('\n');
    }
    let _ = writeln!(out, "rectangle {} {{", quote(&m.system_name));
    for uc in &m.use_cases {
        let _ = writeln!(out, "  usecase {} as {}", quote(&uc.title), uc.id);
    }
    let _ = writeln!(out, "}}");
    for assoc in &m.associations {
        let _ = writeln!(out, "{} --> {}", assoc.actor_id, assoc.usecase_id);
    }
    for rel in &m.relations {
        let _ = writeln!(out, "{} ..> {} : <<{}>>", rel.from_id, rel.to_id, rel.kind.as_str());
    }
    let _ = writeln!(out, "@enduml");
    Ok(out)
}
