use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::scan::{scan, DeclKind, Endpoint, Statement};
use super::{LintCode, LintFinding};

struct Declared {
    kind: DeclKind,
    name: String,
    key: String,
    line: usize,
}

fn finding(code: LintCode, line: usize, message: impl Into<String>) -> LintFinding {
    LintFinding {
        code,
        severity: code.severity(),
        message: message.into(),
        line,
    }
}

/// Lints arbitrary source. Findings are sorted by line, then code.
pub fn lint(src: &str) -> Vec<LintFinding> {
    let statements = scan(src);
    let mut out = Vec::new();
    let last_line = statements.len().max(1);

    if !statements.iter().any(|(_, s)| *s == Statement::Start) {
        out.push(finding(LintCode::NoStart, 1, "missing @startuml"));
    }
    if !statements.iter().any(|(_, s)| *s == Statement::End) {
        out.push(finding(LintCode::NoEnd, last_line, "missing @enduml"));
    }

    let mut declared: Vec<Declared> = Vec::new();
    let mut aliases: BTreeMap<String, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    for (line, stmt) in &statements {
        let line = *line;
        match stmt {
            Statement::Decl(d) => {
                if d.name.is_empty() {
                    out.push(finding(LintCode::EmptyName, line, "element has an empty name"));
                }
                let key = match &d.alias {
                    Some(alias) => {
                        if let Some(&first) = aliases.get(alias) {
                            out.push(finding(
                                LintCode::DupAlias,
                                line,
                                format!("alias `{alias}` already declared on line {first}"),
                            ));
                        } else {
                            aliases.insert(alias.clone(), line);
                        }
                        alias.clone()
                    }
                    None => format!("#{line}"),
                };
                declared.push(Declared {
                    kind: d.kind,
                    name: d.name.clone(),
                    key,
                    line,
                });
            }
            Statement::RectOpen(name) if name.trim().is_empty() => {
                out.push(finding(LintCode::EmptyName, line, "system boundary has an empty name"));
            }
            Statement::Edge(e) => edges.push((line, e)),
            Statement::Directive(d) => {
                out.push(finding(LintCode::Directive, line, format!("decorative directive `{d}`")));
            }
            Statement::Unknown(msg) => out.push(finding(LintCode::Syntax, line, msg.clone())),
            _ => {}
        }
    }

    let resolve = |ep: &Endpoint| -> Option<&Declared> {
        let by_name = |n: &str, hint: Option<DeclKind>| {
            let n = crate::text::collapse_ws(n);
            declared
                .iter()
                .find(|d| d.name == n && hint.is_none_or(|k| k == d.kind))
        };
        match ep {
            Endpoint::Ident(w) => declared
                .iter()
                .find(|d| &d.key == w)
                .or_else(|| by_name(w, None)),
            Endpoint::Name(n, hint) => by_name(n, *hint),
        }
    };

    let mut associated: BTreeSet<&str> = BTreeSet::new();
    for (line, edge) in edges {
        let left = resolve(&edge.left);
        let right = resolve(&edge.right);
        if edge.relation_kind().is_some() {
            for (ep, res) in [(&edge.left, left), (&edge.right, right)] {
                if res.is_none() {
                    out.push(finding(
                        LintCode::DanglingRel,
                        line,
                        format!("relation endpoint `{}` is not declared", ep.display()),
                    ));
                }
            }
            continue;
        }
        for (ep, res) in [(&edge.left, left), (&edge.right, right)] {
            if res.is_none() {
                out.push(finding(
                    LintCode::UndefRef,
                    line,
                    format!("`{}` is never declared", ep.display()),
                ));
            }
        }
        if let (Some(l), Some(r)) = (left, right) {
            match (l.kind, r.kind) {
                (DeclKind::Actor, DeclKind::Actor) => out.push(finding(
                    LintCode::ActorActor,
                    line,
                    format!("association between actors `{}` and `{}`", l.key, r.key),
                )),
                (DeclKind::UseCase, DeclKind::UseCase) => out.push(finding(
                    LintCode::Syntax,
                    line,
                    "solid edge between two use cases",
                )),
                _ => {
                    associated.insert(l.key.as_str());
                    associated.insert(r.key.as_str());
                }
            }
        }
    }

    let mut reported: BTreeSet<&str> = BTreeSet::new();
    for d in &declared {
        if d.kind == DeclKind::UseCase
            && !associated.contains(d.key.as_str())
            && reported.insert(d.key.as_str())
        {
            out.push(finding(
                LintCode::OrphanUseCase,
                d.line,
                format!("use case `{}` has no associated actor", d.name),
            ));
        }
    }

    out.sort_by(|a, b| a.line.cmp(&b.line).then(a.code.as_str().cmp(b.code.as_str())));
    out
}
