//! Line scanner shared by the parser and the linter.
//!
//! Each source line becomes one [`Statement`]. Block comments, `note` /
//! `legend` blocks and `skinparam { ... }` blocks are folded into
//! directives so neither consumer has to track them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::text::{collapse_ws, is_alias};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Quoted(String),
    Paren(String),
    ColonName(String),
    Stereo(String),
    Arrow(String),
    Label(String),
    At(String),
    LBrace,
    RBrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DeclKind {
    Actor,
    UseCase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Endpoint {
    /// Bare identifier: an alias, or failing that a bare-word name.
    Ident(String),
    /// Quoted, `(paren)` or `:colon:` name, with the kind the form implies.
    Name(String, Option<DeclKind>),
}

impl Endpoint {
    pub(crate) fn display(&self) -> &str {
        match self {
            Endpoint::Ident(s) | Endpoint::Name(s, _) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Decl {
    pub kind: DeclKind,
    pub name: String,
    pub alias: Option<String>,
    pub stereotype: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Edge {
    pub left: Endpoint,
    pub right: Endpoint,
    pub dotted: bool,
    /// Arrow head on the left (`<--`), so the edge runs right to left.
    pub reversed: bool,
    pub label: Option<String>,
}

impl Edge {
    /// `Some` when the edge is written as an include/extend relation.
    pub(crate) fn relation_kind(&self) -> Option<Result<crate::model::RelationKind, ()>> {
        use crate::model::RelationKind;
        let label = self.label.as_deref().map(str::to_ascii_lowercase);
        match label.as_deref() {
            Some(l) if l.contains("include") => Some(Ok(RelationKind::Include)),
            Some(l) if l.contains("extend") => Some(Ok(RelationKind::Extend)),
            _ if self.dotted => Some(Err(())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Statement {
    Blank,
    Start,
    End,
    Direction,
    RectOpen(String),
    RectClose,
    Decl(Decl),
    Edge(Edge),
    Directive(String),
    Unknown(String),
}

const DIRECTIVES: &[&str] = &[
    "skinparam",
    "title",
    "hide",
    "show",
    "scale",
    "caption",
    "header",
    "footer",
    "!theme",
    "!pragma",
    "allowmixing",
    "autonumber",
    "newpage",
];

#[derive(Clone, Copy)]
enum Block {
    None,
    Comment,
    Note,
    Legend,
    Skinparam(usize),
}

/// Scans `src` into `(1-based line, statement)` pairs, one per line.
pub(crate) fn scan(src: &str) -> Vec<(usize, Statement)> {
    let mut out = Vec::new();
    let mut block = Block::None;
    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        let stmt = match block {
            Block::Comment => {
                if line.ends_with("'/") {
                    block = Block::None;
                }
                Statement::Blank
            }
            Block::Note => {
                if line.eq_ignore_ascii_case("end note") || line.eq_ignore_ascii_case("endnote") {
                    block = Block::None;
                }
                Statement::Directive("note".into())
            }
            Block::Legend => {
                if line.eq_ignore_ascii_case("endlegend") || line.eq_ignore_ascii_case("end legend") {
                    block = Block::None;
                }
                Statement::Directive("legend".into())
            }
            Block::Skinparam(depth) => {
                let opened = line.matches('{').count();
                let closed = line.matches('}').count();
                let depth = (depth + opened).saturating_sub(closed);
                block = if depth == 0 { Block::None } else { Block::Skinparam(depth) };
                Statement::Directive("skinparam".into())
            }
            Block::None => {
                if let Some(rest) = line.strip_prefix("/'") {
                    if !rest.ends_with("'/") {
                        block = Block::Comment;
                    }
                    Statement::Blank
                } else if line.is_empty() || line.starts_with('\'') {
                    Statement::Blank
                } else {
                    let first = line.split_whitespace().next().unwrap_or("").to_ascii_lowercase();
                    if first == "note" && !line.contains(':') {
                        block = Block::Note;
                        Statement::Directive("note".into())
                    } else if first == "note" {
                        Statement::Directive("note".into())
                    } else if first == "legend" {
                        block = Block::Legend;
                        Statement::Directive("legend".into())
                    } else if first == "skinparam" && line.ends_with('{') {
                        block = Block::Skinparam(1);
                        Statement::Directive("skinparam".into())
                    } else {
                        classify(line)
                    }
                }
            }
        };
        out.push((line_no, stmt));
    }
    out
}

fn classify(line: &str) -> Statement {
    let tokens = match tokenize(line) {
        Ok(t) => t,
        Err(msg) => return Statement::Unknown(msg),
    };
    match tokens.as_slice() {
        [] => Statement::Blank,
        [Token::At(a), ..] if a.eq_ignore_ascii_case("startuml") => Statement::Start,
        [Token::At(a)] if a.eq_ignore_ascii_case("enduml") => Statement::End,
        [Token::RBrace] => Statement::RectClose,
        [Token::Word(a), Token::Word(b), Token::Word(c), Token::Word(d)]
            if b.eq_ignore_ascii_case("to")
                && d.eq_ignore_ascii_case("direction")
                && matches!(
                    (a.to_ascii_lowercase().as_str(), c.to_ascii_lowercase().as_str()),
                    ("left", "right") | ("top", "bottom")
                ) =>
        {
            Statement::Direction
        }
        [first, Token::Arrow(arrow), rest @ ..] => classify_edge(first, arrow, rest),
        [Token::Word(kw), rest @ ..] if kw.eq_ignore_ascii_case("rectangle") => classify_rect(rest),
        [Token::Word(kw), rest @ ..] if kw.eq_ignore_ascii_case("actor") => {
            classify_decl(DeclKind::Actor, rest)
        }
        [Token::Word(kw), rest @ ..] if kw.eq_ignore_ascii_case("usecase") => {
            classify_decl(DeclKind::UseCase, rest)
        }
        [Token::ColonName(_), ..] => classify_decl(DeclKind::Actor, &tokens),
        [Token::Paren(_), ..] => classify_decl(DeclKind::UseCase, &tokens),
        [Token::Word(w), ..] if DIRECTIVES.iter().any(|d| w.eq_ignore_ascii_case(d)) => {
            Statement::Directive(w.to_ascii_lowercase())
        }
        [Token::At(a), ..] => Statement::Unknown(format!("unsupported directive `@{a}`")),
        _ => Statement::Unknown(format!("unrecognized statement `{line}`")),
    }
}

fn endpoint(tok: &Token) -> Option<Endpoint> {
    match tok {
        Token::Word(w) => Some(Endpoint::Ident(w.clone())),
        Token::Quoted(q) => Some(Endpoint::Name(q.clone(), None)),
        Token::Paren(p) => Some(Endpoint::Name(p.clone(), Some(DeclKind::UseCase))),
        Token::ColonName(c) => Some(Endpoint::Name(c.clone(), Some(DeclKind::Actor))),
        _ => None,
    }
}

fn classify_edge(first: &Token, arrow: &str, rest: &[Token]) -> Statement {
    let (right, label) = match rest {
        [r] => (r, None),
        [r, Token::Label(l)] => (r, Some(l.clone())),
        _ => return Statement::Unknown("malformed edge".into()),
    };
    let (Some(left), Some(right)) = (endpoint(first), endpoint(right)) else {
        return Statement::Unknown("edge endpoints must be ids or names".into());
    };
    let head_left = arrow.starts_with('<');
    let head_right = arrow.ends_with('>');
    let body = arrow.trim_start_matches('<').trim_end_matches('>');
    let valid_body = !body.is_empty() && (body.chars().all(|c| c == '-') || body.chars().all(|c| c == '.'));
    if !valid_body || (head_left && head_right) {
        return Statement::Unknown(format!("unsupported arrow `{arrow}`"));
    }
    Statement::Edge(Edge {
        left,
        right,
        dotted: body.starts_with('.'),
        reversed: head_left,
        label,
    })
}

fn classify_rect(rest: &[Token]) -> Statement {
    let (name, tail) = match rest {
        [Token::Quoted(n), tail @ ..] | [Token::Word(n), tail @ ..] => (n, tail),
        _ => return Statement::Unknown("rectangle needs a name".into()),
    };
    let tail: Vec<&Token> = tail.iter().filter(|t| !matches!(t, Token::Stereo(_))).collect();
    match tail.as_slice() {
        [Token::LBrace] => Statement::RectOpen(name.clone()),
        [Token::Word(kw), Token::Word(_), Token::LBrace] if kw.eq_ignore_ascii_case("as") => {
            Statement::RectOpen(name.clone())
        }
        _ => Statement::Unknown("rectangle must open a `{` block".into()),
    }
}

fn classify_decl(kind: DeclKind, rest: &[Token]) -> Statement {
    let mut it = rest.iter().peekable();
    let mut stereotype = None;
    let mut take_stereo = |it: &mut core::iter::Peekable<core::slice::Iter<'_, Token>>| {
        while let Some(Token::Stereo(s)) = it.peek() {
            stereotype = Some(s.clone());
            it.next();
        }
    };
    let head = it.next();
    take_stereo(&mut it);
    let mut alias = None;
    let name = match head {
        Some(Token::Quoted(n)) => n.clone(),
        Some(Token::Paren(n)) if kind == DeclKind::UseCase => n.clone(),
        Some(Token::ColonName(n)) if kind == DeclKind::Actor => n.clone(),
        Some(Token::Word(w)) => {
            // `actor A1 as "Customer"` puts the alias first.
            let mut look = it.clone();
            match (look.next(), look.next()) {
                (Some(Token::Word(kw)), Some(Token::Quoted(n))) if kw.eq_ignore_ascii_case("as") => {
                    it = look;
                    alias = Some(w.clone());
                    n.clone()
                }
                _ => w.clone(),
            }
        }
        _ => return Statement::Unknown("declaration needs a name".into()),
    };
    take_stereo(&mut it);
    if alias.is_none() {
        if let Some(Token::Word(kw)) = it.peek() {
            if kw.eq_ignore_ascii_case("as") {
                it.next();
                match it.next() {
                    Some(Token::Word(a)) if is_alias(a) => alias = Some(a.clone()),
                    Some(other) => {
                        return Statement::Unknown(format!("invalid alias {:?}", other));
                    }
                    None => return Statement::Unknown("missing alias after `as`".into()),
                }
            }
        }
    }
    take_stereo(&mut it);
    if let Some(extra) = it.next() {
        return Statement::Unknown(format!("unexpected {:?} in declaration", extra));
    }
    Statement::Decl(Decl {
        kind,
        name: collapse_ws(&name),
        alias,
        stereotype,
    })
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '"' | '(' | ')' | '{' | '}' | ':' | '<' | '>' | '-' | '.')
}

fn tokenize(line: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') if chars.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Token::Quoted(s));
        } else if c == '(' {
            let end = chars[i + 1..]
                .iter()
                .position(|&ch| ch == ')')
                .ok_or_else(|| String::from("unterminated `(`"))?;
            out.push(Token::Paren(chars[i + 1..i + 1 + end].iter().collect()));
            i += end + 2;
        } else if c == ':' {
            let next = chars.get(i + 1).copied();
            let close = chars[i + 1..].iter().position(|&ch| ch == ':');
            let name_position = out.is_empty() || matches!(out.last(), Some(Token::Arrow(_)));
            let name_start = next.is_some_and(|n| !n.is_whitespace() && n != '<');
            match close {
                Some(end) if name_position && name_start && end > 0 => {
                    out.push(Token::ColonName(chars[i + 1..i + 1 + end].iter().collect()));
                    i += end + 2;
                }
                _ => {
                    let rest: String = chars[i + 1..].iter().collect();
                    let label = rest.trim();
                    let label = label
                        .strip_prefix("<<")
                        .and_then(|l| l.strip_suffix(">>"))
                        .unwrap_or(label);
                    out.push(Token::Label(label.trim().to_string()));
                    i = chars.len();
                }
            }
        } else if c == '<' && chars.get(i + 1) == Some(&'<') {
            let rest: String = chars[i + 2..].iter().collect();
            let end = rest.find(">>").ok_or_else(|| String::from("unterminated `<<`"))?;
            out.push(Token::Stereo(rest[..end].trim().to_string()));
            i += 2 + rest[..end].chars().count() + 2;
        } else if matches!(c, '-' | '.' | '<' | '>') {
            let start = i;
            while i < chars.len() && matches!(chars[i], '-' | '.' | '<' | '>') {
                // stop before a `<<` stereotype
                if chars[i] == '<' && i > start {
                    break;
                }
                i += 1;
            }
            out.push(Token::Arrow(chars[start..i].iter().collect()));
        } else if c == '{' {
            out.push(Token::LBrace);
            i += 1;
        } else if c == '}' {
            out.push(Token::RBrace);
            i += 1;
        } else if c == ')' {
            return Err("unbalanced `)`".into());
        } else if c == '@' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            out.push(Token::At(chars[start..i].iter().collect()));
            // `@startuml name` may carry a diagram name; ignore the rest
            i = chars.len();
        } else {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            out.push(Token::Word(chars[start..i].iter().collect()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn one(line: &str) -> Statement {
        classify(line)
    }

    #[test]
    fn declarations() {
        assert_eq!(
            one(r#"actor "Customer" as A1"#),
            Statement::Decl(Decl {
                kind: DeclKind::Actor,
                name: "Customer".into(),
                alias: Some("A1".into()),
                stereotype: None
            })
        );
        let Statement::Decl(d) = one(r#"actor "Bank" as A2 <<external_system>>"#) else {
            panic!()
        };
        assert_eq!(d.stereotype.as_deref(), Some("external_system"));
        let Statement::Decl(d) = one("actor Clerk") else { panic!() };
        assert_eq!((d.name.as_str(), d.alias), ("Clerk", None));
        let Statement::Decl(d) = one(r#"actor A3 as "Store Clerk""#) else { panic!() };
        assert_eq!((d.name.as_str(), d.alias.as_deref()), ("Store Clerk", Some("A3")));
        let Statement::Decl(d) = one("(Place Order) as UC1") else { panic!() };
        assert_eq!((d.kind, d.name.as_str()), (DeclKind::UseCase, "Place Order"));
        let Statement::Decl(d) = one(":Bank Clerk: as A4") else { panic!() };
        assert_eq!((d.kind, d.alias.as_deref()), (DeclKind::Actor, Some("A4")));
        let Statement::Decl(d) = one(r#"usecase "Say ""hi""" as UC2"#) else { panic!() };
        assert_eq!(d.name, r#"Say "hi""#);
    }

    #[test]
    fn edges() {
        let Statement::Edge(e) = one("A1 --> UC1") else { panic!() };
        assert!(!e.dotted && !e.reversed);
        let Statement::Edge(e) = one("UC1 <- A1") else { panic!() };
        assert!(e.reversed);
        let Statement::Edge(e) = one("UC1 ..> UC2 : <<include>>") else { panic!() };
        assert!(e.dotted);
        assert_eq!(e.label.as_deref(), Some("include"));
        let Statement::Edge(e) = one(":Customer: -- (Place Order)") else { panic!() };
        assert_eq!(e.left, Endpoint::Name("Customer".into(), Some(DeclKind::Actor)));
        assert_eq!(e.right, Endpoint::Name("Place Order".into(), Some(DeclKind::UseCase)));
        let Statement::Edge(e) = one("A1-->UC1") else { panic!() };
        assert_eq!(e.right, Endpoint::Ident("UC1".into()));
        assert!(matches!(one("A1 <--> UC1"), Statement::Unknown(_)));
        assert!(matches!(one("A1 -.-> UC1"), Statement::Unknown(_)));
    }

    #[test]
    fn structure_lines() {
        assert_eq!(one("@startuml"), Statement::Start);
        assert_eq!(one("@startuml my_diagram"), Statement::Start);
        assert_eq!(one("@enduml"), Statement::End);
        assert_eq!(one("left to right direction"), Statement::Direction);
        assert_eq!(one(r#"rectangle "Shop" {"#), Statement::RectOpen("Shop".into()));
        assert_eq!(one("rectangle Shop {"), Statement::RectOpen("Shop".into()));
        assert_eq!(one("}"), Statement::RectClose);
        assert!(matches!(one("skinparam monochrome true"), Statement::Directive(_)));
        assert!(matches!(one("class Foo"), Statement::Unknown(_)));
        assert!(matches!(one(r#"actor "open"#), Statement::Unknown(_)));
    }

    #[test]
    fn blocks_fold_into_directives() {
        let src = "/' multi\nline '/\nnote right of A1\n  text\nend note\nskinparam actor {\n  Color red\n}\n' c\nA1 --> UC1";
        let kinds: Vec<bool> = scan(src)
            .into_iter()
            .map(|(_, s)| matches!(s, Statement::Blank | Statement::Directive(_)))
            .collect();
        assert_eq!(kinds, vec![true, true, true, true, true, true, true, true, true, false]);
    }
}
