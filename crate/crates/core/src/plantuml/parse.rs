use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::scan::{scan, DeclKind, Endpoint, Statement};
use super::{ParseCode, ParseError};
use crate::model::{
    normalize, Actor, ActorKind, Association, UseCase, UseCaseModel, UseCaseRelation,
};

const DEFAULT_SYSTEM: &str = "System";

struct Element {
    kind: DeclKind,
    id: String,
    name: String,
}

struct Symbols {
    elements: Vec<Element>,
    by_alias: BTreeMap<String, usize>,
}

impl Symbols {
    fn resolve(&self, ep: &Endpoint) -> Option<&Element> {
        match ep {
            Endpoint::Ident(w) => self
                .by_alias
                .get(w)
                .map(|&i| &self.elements[i])
                .or_else(|| self.by_name(w, None)),
            Endpoint::Name(n, hint) => self.by_name(n, *hint),
        }
    }

    fn by_name(&self, name: &str, hint: Option<DeclKind>) -> Option<&Element> {
        let name = crate::text::collapse_ws(name);
        self.elements
            .iter()
            .find(|e| e.name == name && hint.is_none_or(|k| k == e.kind))
    }
}

fn next_free(prefix: &str, taken: &BTreeSet<String>, counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let candidate = format!("{prefix}{counter}");
        if !taken.contains(&candidate) {
            return candidate;
        }
    }
}

/// Parses PlantUML use case diagram source into a normalized model.
///
/// Text before `@startuml` and after `@enduml` is ignored. Declarations
/// without `as <alias>` get the next free `A<n>` / `UC<n>` alias; edges may
/// refer to elements declared later in the file.
pub fn parse_model(src: &str) -> Result<UseCaseModel, ParseError> {
    let statements = scan(src);
    let start = statements
        .iter()
        .position(|(_, s)| *s == Statement::Start)
        .ok_or_else(|| ParseError::new(ParseCode::NoStart, 1, "missing @startuml"))?;
    let end = statements[start..]
        .iter()
        .position(|(_, s)| *s == Statement::End)
        .map(|p| p + start)
        .ok_or_else(|| {
            let last = statements.len().max(1);
            ParseError::new(ParseCode::NoEnd, last, "missing @enduml")
        })?;
    let end_line = statements[end].0;
    let body = &statements[start + 1..end];

    let taken: BTreeSet<String> = body
        .iter()
        .filter_map(|(_, s)| match s {
            Statement::Decl(d) => d.alias.clone(),
            _ => None,
        })
        .collect();

    let mut symbols = Symbols {
        elements: Vec::new(),
        by_alias: BTreeMap::new(),
    };
    let mut kinds: BTreeMap<String, ActorKind> = BTreeMap::new();
    let mut system_name: Option<String> = None;
    let mut in_rect = false;
    let mut actor_counter = 0;
    let mut uc_counter = 0;
    let mut edges = Vec::new();

    for (line, stmt) in body {
        let line = *line;
        match stmt {
            Statement::Blank | Statement::Direction | Statement::Directive(_) => {}
            Statement::Start => {
                return Err(ParseError::new(ParseCode::Syntax, line, "nested @startuml"));
            }
            Statement::End => unreachable!("body ends before the first @enduml"),
            Statement::RectOpen(name) => {
                if in_rect || system_name.is_some() {
                    return Err(ParseError::new(
                        ParseCode::Syntax,
                        line,
                        "only one system boundary rectangle is supported",
                    ));
                }
                let name = crate::text::collapse_ws(name);
                if name.is_empty() {
                    return Err(ParseError::new(ParseCode::Syntax, line, "empty system name"));
                }
                system_name = Some(name);
                in_rect = true;
            }
            Statement::RectClose => {
                if !in_rect {
                    return Err(ParseError::new(ParseCode::Syntax, line, "unbalanced `}`"));
                }
                in_rect = false;
            }
            Statement::Decl(decl) => {
                if decl.name.is_empty() {
                    return Err(ParseError::new(ParseCode::Syntax, line, "empty element name"));
                }
                let id = match &decl.alias {
                    Some(a) => a.clone(),
                    None => match decl.kind {
                        DeclKind::Actor => next_free("A", &taken, &mut actor_counter),
                        DeclKind::UseCase => next_free("UC", &taken, &mut uc_counter),
                    },
                };
                if symbols.by_alias.contains_key(&id) {
                    return Err(ParseError::new(
                        ParseCode::Syntax,
                        line,
                        format!("alias `{id}` declared twice"),
                    ));
                }
                if decl.kind == DeclKind::Actor {
                    let kind = decl
                        .stereotype
                        .as_deref()
                        .and_then(ActorKind::from_name)
                        .unwrap_or_default();
                    kinds.insert(id.clone(), kind);
                }
                symbols.by_alias.insert(id.clone(), symbols.elements.len());
                symbols.elements.push(Element {
                    kind: decl.kind,
                    id,
                    name: decl.name.clone(),
                });
            }
            Statement::Edge(edge) => edges.push((line, edge)),
            Statement::Unknown(msg) => {
                return Err(ParseError::new(ParseCode::Syntax, line, msg.clone()));
            }
        }
    }
    if in_rect {
        return Err(ParseError::new(ParseCode::Syntax, end_line, "unclosed rectangle"));
    }

    let mut associations = Vec::new();
    let mut relations = Vec::new();
    for (line, edge) in edges {
        let resolve = |ep: &Endpoint| {
            symbols.resolve(ep).ok_or_else(|| {
                ParseError::new(
                    ParseCode::UndefRef,
                    line,
                    format!("`{}` is never declared", ep.display()),
                )
            })
        };
        let left = resolve(&edge.left)?;
        let right = resolve(&edge.right)?;
        match edge.relation_kind() {
            Some(Ok(kind)) => {
                if left.kind != DeclKind::UseCase || right.kind != DeclKind::UseCase {
                    return Err(ParseError::new(
                        ParseCode::Syntax,
                        line,
                        "include/extend must connect two use cases",
                    ));
                }
                let (from, to) = if edge.reversed { (right, left) } else { (left, right) };
                if from.id == to.id {
                    return Err(ParseError::new(ParseCode::Syntax, line, "relation to itself"));
                }
                relations.push(UseCaseRelation {
                    from_id: from.id.clone(),
                    to_id: to.id.clone(),
                    kind,
                });
            }
            Some(Err(())) => {
                return Err(ParseError::new(
                    ParseCode::Syntax,
                    line,
                    "dotted arrow needs an <<include>> or <<extend>> label",
                ));
            }
            None => {
                let (actor, uc) = match (left.kind, right.kind) {
                    (DeclKind::Actor, DeclKind::UseCase) => (left, right),
                    (DeclKind::UseCase, DeclKind::Actor) => (right, left),
                    (DeclKind::Actor, DeclKind::Actor) => {
                        return Err(ParseError::new(
                            ParseCode::Syntax,
                            line,
                            "association between two actors",
                        ));
                    }
                    (DeclKind::UseCase, DeclKind::UseCase) => {
                        return Err(ParseError::new(
                            ParseCode::Syntax,
                            line,
                            "solid edge between two use cases",
                        ));
                    }
                };
                associations.push(Association::new(actor.id.clone(), uc.id.clone()));
            }
        }
    }

    let mut model = UseCaseModel::empty(system_name.unwrap_or_else(|| DEFAULT_SYSTEM.into()));
    for el in &symbols.elements {
        match el.kind {
            DeclKind::Actor => model.actors.push(
                Actor::new(el.id.clone(), el.name.clone())
                    .with_kind(kinds.get(&el.id).copied().unwrap_or_default()),
            ),
            DeclKind::UseCase => model.use_cases.push(UseCase::new(
                el.id.clone(),
                el.name.clone(),
                Vec::<String>::new(),
            )),
        }
    }
    model.associations = associations;
    model.relations = relations;
    model.sync_actor_links();
    normalize(&model).map_err(|v| {
        let first = &v[0];
        ParseError::new(ParseCode::Syntax, end_line, format!("{first}"))
    })
}
