//! The `.pgs` schema language.
//!
//! ```text
//! NODE Person { name: STRING, age: INTEGER? }
//! NODE Employee : Person { parkingSpot: STRING }
//! EDGE (Person)-[WORKS_AT<0..*> { since: DATE }]-><0..1>(Company)
//! ```
//!
//! The cardinality right after the edge label bounds incoming edges per
//! target node; the one after `]->` bounds outgoing edges per source node.
//! Identifiers that are not plain `[A-Za-z_][A-Za-z0-9_]*` are written in
//! backticks, and the bare name `_Unlabeled` stands for the empty label set.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::schema::{
    canonicalize, Cardinality, DataType, EdgeKey, EdgeType, LabelSet, NodeType, PropertyDef,
    SchemaGraph, UNLABELED,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Node,
    Edge,
}

/// Byte range `[start, end)` of one top-level declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub element: String,
    pub kind: ElementKind,
    pub name: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// Byte offset into the input.
    pub offset: usize,
    pub message: String,
    pub expected: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} parse error(s); first: {}", .0.len(), .0.first().map(|e| e.to_string()).unwrap_or_default())]
pub struct ParseErrors(pub Vec<ParseError>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident { text: String, quoted: bool },
    Int(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Question,
    Amp,
    Lt,
    Gt,
    DotDot,
    Star,
    EdgeOpen,
    EdgeClose,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident { text, .. } => write!(f, "`{text}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Question => f.write_str("`?`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Star => f.write_str("`*`"),
            Tok::EdgeOpen => f.write_str("`-[`"),
            Tok::EdgeClose => f.write_str("`]->`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    line_start: bool,
}

struct Positions {
    line_starts: Vec<usize>,
    len: usize,
}

impl Positions {
    fn new(text: &str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Positions {
            line_starts,
            len: text.len(),
        }
    }

    fn error(&self, text: &str, offset: usize, message: String, expected: Option<&str>) -> ParseError {
        // clamp onto the last character so the position stays inside the input
        let mut offset = offset.min(self.len.saturating_sub(1));
        while offset > 0 && !text.is_char_boundary(offset) {
            offset -= 1;
        }
        let line_idx = self.line_starts.partition_point(|&s| s <= offset) - 1;
        let line_start = self.line_starts[line_idx];
        ParseError {
            line: line_idx + 1,
            column: text[line_start..offset].chars().count() + 1,
            offset,
            message,
            expected: expected.map(str::to_string),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str, pos: &Positions, errors: &mut Vec<ParseError>) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut line_start = true;
    while let Some((i, c)) = chars.next() {
        if c == '\n' {
            line_start = true;
            continue;
        }
        if c.is_whitespace() {
            continue;
        }
        let single = |tok| Some((tok, i + c.len_utf8()));
        let lexed = match c {
            '/' if text[i..].starts_with("//") => {
                while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                    chars.next();
                }
                continue;
            }
            '{' => single(Tok::LBrace),
            '}' => single(Tok::RBrace),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            ',' => single(Tok::Comma),
            ':' => single(Tok::Colon),
            '?' => single(Tok::Question),
            '&' => single(Tok::Amp),
            '<' => single(Tok::Lt),
            '>' => single(Tok::Gt),
            '*' => single(Tok::Star),
            '.' if text[i..].starts_with("..") => {
                chars.next();
                Some((Tok::DotDot, i + 2))
            }
            '-' if text[i..].starts_with("-[") => {
                chars.next();
                Some((Tok::EdgeOpen, i + 2))
            }
            ']' if text[i..].starts_with("]->") => {
                chars.next();
                chars.next();
                Some((Tok::EdgeClose, i + 3))
            }
            '`' => {
                let mut value = String::new();
                let mut end = None;
                while let Some((j, d)) = chars.next() {
                    if d == '`' {
                        if chars.peek().is_some_and(|&(_, e)| e == '`') {
                            chars.next();
                            value.push('`');
                        } else {
                            end = Some(j + 1);
                            break;
                        }
                    } else {
                        value.push(d);
                    }
                }
                match end {
                    Some(end) => Some((
                        Tok::Ident {
                            text: value,
                            quoted: true,
                        },
                        end,
                    )),
                    None => {
                        errors.push(pos.error(text, i, "unterminated quoted identifier".into(), Some("`")));
                        None
                    }
                }
            }
            c if c.is_ascii_digit() => {
                let mut end = i + 1;
                while let Some(&(j, d)) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    chars.next();
                    end = j + 1;
                }
                match text[i..end].parse::<u64>() {
                    Ok(n) => Some((Tok::Int(n), end)),
                    Err(_) => {
                        errors.push(pos.error(text, i, "integer out of range".into(), None));
                        None
                    }
                }
            }
            c if is_ident_start(c) => {
                let mut end = i + 1;
                while let Some(&(j, d)) = chars.peek() {
                    if !is_ident_char(d) {
                        break;
                    }
                    chars.next();
                    end = j + 1;
                }
                Some((
                    Tok::Ident {
                        text: text[i..end].to_string(),
                        quoted: false,
                    },
                    end,
                ))
            }
            other => {
                errors.push(pos.error(text, i, format!("unexpected character {other:?}"), None));
                None
            }
        };
        if let Some((tok, _end)) = lexed {
            tokens.push(Token {
                tok,
                start: i,
                line_start,
            });
            line_start = false;
        }
    }
    tokens
}

#[derive(Debug)]
struct Located<T> {
    value: T,
    at: usize,
}

struct PropDecl {
    def: PropertyDef,
    at: usize,
}

struct NodeDecl {
    name: Located<LabelSet>,
    supertype: Option<Located<LabelSet>>,
    props: Vec<PropDecl>,
}

struct EdgeDecl {
    src: Located<LabelSet>,
    label: Located<LabelSet>,
    in_card: Option<Located<Cardinality>>,
    out_card: Option<Located<Cardinality>>,
    props: Vec<PropDecl>,
    dst: Located<LabelSet>,
}

enum Decl {
    Node(NodeDecl),
    Edge(EdgeDecl),
}

struct Parser<'a> {
    text: &'a str,
    pos: &'a Positions,
    tokens: Vec<Token>,
    idx: usize,
    // names of node declarations that started, including ones that failed
    declared: Vec<LabelSet>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.text.len(), |t| t.start)
    }

    fn err(&self, message: impl Into<String>, expected: &str) -> ParseError {
        let found = match self.peek() {
            Some(t) => format!(", found {}", t.tok),
            None => ", found end of input".to_string(),
        };
        self.pos.error(
            self.text,
            self.offset(),
            format!("{}{found}", message.into()),
            Some(expected),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<usize> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                let at = t.start;
                self.idx += 1;
                Ok(at)
            }
            _ => Err(self.err(format!("expected {tok}"), &tok.to_string())),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().is_some_and(|t| &t.tok == tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, bool, usize)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident { text, quoted },
                start,
                ..
            }) => {
                let out = (text.clone(), *quoted, *start);
                self.idx += 1;
                Ok(out)
            }
            _ => Err(self.err(format!("expected {what}"), "identifier")),
        }
    }

    fn keyword(&self) -> Option<&str> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident {
                    text,
                    quoted: false,
                },
                ..
            }) => Some(text.as_str()),
            _ => None,
        }
    }

    fn name(&mut self) -> PResult<Located<LabelSet>> {
        let (first, quoted, at) = self.ident("type name")?;
        if !quoted && first == UNLABELED && !self.peek().is_some_and(|t| t.tok == Tok::Amp) {
            return Ok(Located {
                value: LabelSet::default(),
                at,
            });
        }
        let mut labels = vec![first];
        while self.eat(&Tok::Amp) {
            labels.push(self.ident("label after `&`")?.0);
        }
        Ok(Located {
            value: LabelSet::new(labels),
            at,
        })
    }

    fn props(&mut self) -> PResult<Vec<PropDecl>> {
        self.expect(Tok::LBrace)?;
        let mut props = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(props);
        }
        loop {
            let (key, _, at) = self.ident("property name")?;
            self.expect(Tok::Colon)?;
            let dtype = match self.peek() {
                Some(Token {
                    tok: Tok::Ident {
                        text,
                        quoted: false,
                    },
                    ..
                }) => DataType::from_keyword(text),
                _ => None,
            };
            let Some(datatype) = dtype else {
                return Err(self.err(
                    "expected a datatype",
                    "STRING, INTEGER, FLOAT, BOOLEAN, DATE or ANY",
                ));
            };
            self.idx += 1;
            let required = !self.eat(&Tok::Question);
            props.push(PropDecl {
                def: PropertyDef::new(key, datatype, required),
                at,
            });
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RBrace)?;
            return Ok(props);
        }
    }

    fn card(&mut self) -> PResult<Option<Located<Cardinality>>> {
        if self.peek().map(|t| &t.tok) != Some(&Tok::Lt) {
            return Ok(None);
        }
        let at = self.expect(Tok::Lt)?;
        let min = self.int()?;
        self.expect(Tok::DotDot)?;
        let max = if self.eat(&Tok::Star) {
            None
        } else {
            Some(self.int()?)
        };
        self.expect(Tok::Gt)?;
        Ok(Some(Located {
            value: Cardinality { min, max },
            at,
        }))
    }

    fn int(&mut self) -> PResult<u64> {
        match self.peek() {
            Some(Token { tok: Tok::Int(n), .. }) => {
                let n = *n;
                self.idx += 1;
                Ok(n)
            }
            _ => Err(self.err("expected an integer", "integer")),
        }
    }

    fn node(&mut self) -> PResult<NodeDecl> {
        self.idx += 1;
        let name = self.name()?;
        self.declared.push(name.value.clone());
        let supertype = if self.eat(&Tok::Colon) {
            Some(self.name()?)
        } else {
            None
        };
        let props = self.props()?;
        Ok(NodeDecl {
            name,
            supertype,
            props,
        })
    }

    fn edge(&mut self) -> PResult<EdgeDecl> {
        self.idx += 1;
        self.expect(Tok::LParen)?;
        let src = self.name()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::EdgeOpen)?;
        let label = self.name()?;
        let in_card = self.card()?;
        let props = if self.peek().map(|t| &t.tok) == Some(&Tok::LBrace) {
            self.props()?
        } else {
            Vec::new()
        };
        self.expect(Tok::EdgeClose)?;
        let out_card = self.card()?;
        self.expect(Tok::LParen)?;
        let dst = self.name()?;
        self.expect(Tok::RParen)?;
        Ok(EdgeDecl {
            src,
            label,
            in_card,
            out_card,
            props,
            dst,
        })
    }

    /// Skips to the next `NODE`/`EDGE` keyword that begins a line.
    fn recover(&mut self, start: usize) {
        if self.idx <= start {
            self.idx = start + 1;
        }
        while let Some(t) = self.peek() {
            if t.line_start && matches!(self.keyword(), Some("NODE" | "EDGE")) {
                return;
            }
            self.idx += 1;
        }
    }

    fn decls(&mut self, errors: &mut Vec<ParseError>) -> Vec<Decl> {
        let mut decls = Vec::new();
        while self.peek().is_some() {
            let start = self.idx;
            let res = match self.keyword() {
                Some("NODE") => self.node().map(Decl::Node),
                Some("EDGE") => self.edge().map(Decl::Edge),
                _ => Err(self.err("expected a declaration", "NODE or EDGE")),
            };
            match res {
                Ok(d) => decls.push(d),
                Err(e) => {
                    errors.push(e);
                    self.recover(start);
                }
            }
        }
        decls
    }
}

/// Parses schema text, reporting every error found in one pass.
pub fn parse_schema(text: &str) -> Result<SchemaGraph, Vec<ParseError>> {
    let pos = Positions::new(text);
    let mut errors = Vec::new();
    let tokens = lex(text, &pos, &mut errors);
    let mut parser = Parser {
        text,
        pos: &pos,
        tokens,
        idx: 0,
        declared: Vec::new(),
    };
    let decls = parser.decls(&mut errors);
    let broken: Vec<LabelSet> = parser.declared;
    let at = |offset: usize, message: String| pos.error(text, offset, message, None);

    let mut nodes: Vec<NodeType> = Vec::new();
    let mut node_at: Vec<usize> = Vec::new();
    let mut ids: HashMap<LabelSet, String> = HashMap::new();
    let mut edges_src = Vec::new();
    let mut supertypes = Vec::new();
    for decl in decls {
        match decl {
            Decl::Node(n) => {
                if ids.contains_key(&n.name.value) {
                    errors.push(at(n.name.at, format!("duplicate node type `{}`", n.name.value)));
                    continue;
                }
                let id = format!("n{}", nodes.len() + 1);
                ids.insert(n.name.value.clone(), id.clone());
                let owner = n.name.value.display_name();
                let props = dedupe_props(n.props, &owner, &mut |o, m| errors.push(at(o, m)));
                supertypes.push(n.supertype);
                node_at.push(n.name.at);
                nodes.push(NodeType::new(id, n.name.value).with_properties(props));
            }
            Decl::Edge(e) => edges_src.push(e),
        }
    }
    for (node, sup) in nodes.iter_mut().zip(supertypes) {
        if let Some(sup) = sup {
            match ids.get(&sup.value) {
                Some(id) => node.supertype = Some(id.clone()),
                None if broken.contains(&sup.value) => {}
                None => errors.push(at(sup.at, format!("unknown supertype `{}`", sup.value))),
            }
        }
    }
    // cycles
    let by_id: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let mut cyclic = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        let mut cur = node.supertype.as_deref();
        let mut steps = 0;
        while let Some(id) = cur {
            if id == node.id {
                cyclic.push(i);
                break;
            }
            steps += 1;
            if steps > nodes.len() {
                break;
            }
            cur = nodes[by_id[id]].supertype.as_deref();
        }
    }
    for i in cyclic {
        errors.push(at(node_at[i], format!("supertype cycle through `{}`", nodes[i].labels)));
        nodes[i].supertype = None;
    }

    let mut edges = Vec::new();
    let mut seen = HashMap::new();
    for e in edges_src {
        let mut endpoint = |name: &Located<LabelSet>| match ids.get(&name.value) {
            Some(id) => Some(id.clone()),
            None if broken.contains(&name.value) => None,
            None => {
                errors.push(at(name.at, format!("unknown node type `{}`", name.value)));
                None
            }
        };
        let (src, dst) = (endpoint(&e.src), endpoint(&e.dst));
        let mut card = |c: Option<Located<Cardinality>>| match c {
            None => Cardinality::ANY,
            Some(c) => match c.value.check() {
                Ok(()) => c.value,
                Err(err) => {
                    errors.push(at(c.at, err.to_string()));
                    Cardinality::ANY
                }
            },
        };
        let in_card = card(e.in_card);
        let out_card = card(e.out_card);
        let (Some(src), Some(dst)) = (src, dst) else {
            continue;
        };
        let key = EdgeKey::new(e.label.value.clone(), e.src.value, e.dst.value);
        if seen.insert(key.clone(), ()).is_some() {
            errors.push(at(e.label.at, format!("duplicate edge type `{}`", key.subject())));
            continue;
        }
        let props = dedupe_props(e.props, &key.subject(), &mut |o, m| errors.push(at(o, m)));
        edges.push(
            EdgeType::new(format!("e{}", edges.len() + 1), e.label.value, src, dst)
                .with_properties(props)
                .with_cardinality(out_card, in_card),
        );
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.offset);
        return Err(errors);
    }
    SchemaGraph::new(nodes, edges).map_err(|e| vec![at(0, e.to_string())])
}

fn dedupe_props(
    props: Vec<PropDecl>,
    owner: &str,
    report: &mut dyn FnMut(usize, String),
) -> Vec<PropertyDef> {
    let mut out: Vec<PropertyDef> = Vec::with_capacity(props.len());
    for p in props {
        if out.iter().any(|q| q.name == p.def.name) {
            report(p.at, format!("duplicate property `{}` on `{owner}`", p.def.name));
        } else {
            out.push(p.def);
        }
    }
    out
}

fn write_ident(out: &mut String, ident: &str) {
    let plain = ident.chars().next().is_some_and(is_ident_start)
        && ident.chars().all(is_ident_char)
        && ident != UNLABELED;
    if plain {
        out.push_str(ident);
    } else {
        out.push('`');
        out.push_str(&ident.replace('`', "``"));
        out.push('`');
    }
}

fn write_name(out: &mut String, labels: &LabelSet) {
    if labels.is_empty() {
        out.push_str(UNLABELED);
        return;
    }
    for (i, label) in labels.iter().enumerate() {
        if i > 0 {
            out.push('&');
        }
        write_ident(out, label);
    }
}

fn write_props(out: &mut String, props: &[PropertyDef]) {
    let write_prop = |out: &mut String, p: &PropertyDef| {
        write_ident(out, &p.name);
        out.push_str(": ");
        out.push_str(p.datatype.keyword());
        if !p.required {
            out.push('?');
        }
    };
    match props.len() {
        0 => out.push_str("{}"),
        1 | 2 => {
            out.push_str("{ ");
            for (i, p) in props.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_prop(out, p);
            }
            out.push_str(" }");
        }
        _ => {
            out.push_str("{\n");
            for (i, p) in props.iter().enumerate() {
                out.push_str("  ");
                write_prop(out, p);
                if i + 1 < props.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push('}');
        }
    }
}

fn write_card(out: &mut String, card: Cardinality) {
    if card != Cardinality::ANY {
        let _ = write!(out, "<{card}>");
    }
}

/// Canonical text plus the byte span of every declaration.
pub fn serialize_schema(s: &SchemaGraph) -> (String, Vec<SourceSpan>) {
    let s = canonicalize(s);
    let mut out = String::new();
    let mut spans = Vec::new();
    for node in s.node_types() {
        let start = out.len();
        out.push_str("NODE ");
        write_name(&mut out, &node.labels);
        if let Some(sup) = s.supertype_of(node) {
            out.push_str(" : ");
            write_name(&mut out, &sup.labels);
        }
        out.push(' ');
        write_props(&mut out, &node.properties);
        spans.push(SourceSpan {
            element: node.id.clone(),
            kind: ElementKind::Node,
            name: node.display_name(),
            start,
            end: out.len(),
        });
        out.push('\n');
    }
    if !s.node_types().is_empty() && !s.edge_types().is_empty() {
        out.push('\n');
    }
    for edge in s.edge_types() {
        let key = s.key_of(edge);
        let start = out.len();
        out.push_str("EDGE (");
        write_name(&mut out, &key.src);
        out.push_str(")-[");
        write_name(&mut out, &edge.labels);
        write_card(&mut out, edge.in_card);
        if !edge.properties.is_empty() {
            out.push(' ');
            write_props(&mut out, &edge.properties);
        }
        out.push_str("]->");
        write_card(&mut out, edge.out_card);
        out.push('(');
        write_name(&mut out, &key.dst);
        out.push(')');
        spans.push(SourceSpan {
            element: edge.id.clone(),
            kind: ElementKind::Edge,
            name: key.subject(),
            start,
            end: out.len(),
        });
        out.push('\n');
    }
    (out, spans)
}

pub fn schema_text(s: &SchemaGraph) -> String {
    serialize_schema(s).0
}

pub fn span_of<'a>(spans: &'a [SourceSpan], element: &str) -> Result<&'a SourceSpan, SpanError> {
    spans
        .iter()
        .find(|s| s.element == element)
        .ok_or_else(|| SpanError::UnknownElement(element.to_string()))
}
