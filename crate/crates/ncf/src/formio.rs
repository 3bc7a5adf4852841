//! The NCF/1 text format: a line-oriented, canonical description of a form
//! or preform.
//!
//! ```text
//! ncf 1 form
//! root: []
//! player 1: a b
//! player 2: c d
//! edge: [] a [a]
//! ...
//! ```
//!
//! Preform documents carry a single `choices:` line instead of `player`
//! lines. Nodes are written `@ident`, `[c1,c2,...]`, or `{c1,c2,...}`; the
//! node set is recovered from the root line plus the edges. `#` starts a
//! comment and blank lines are skipped, but neither survives serialization:
//! output is canonical, with players sorted, choices sorted within each
//! player, edges sorted by (serialized source, choice), and a single
//! trailing newline. Parsing a document always validates the result, so a
//! successfully parsed object carries its derived bundle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::form::{Form, FormError};
use crate::node::{Label, NodeValue, SeqNode, SetNode};
use crate::preform::{Edge, Preform, PreformError};

/// A parsed NCF/1 document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Form(Form),
    Preform(Preform),
}

impl Document {
    pub fn serialize(&self) -> String {
        match self {
            Document::Form(f) => serialize_form(f),
            Document::Preform(p) => serialize_preform(p),
        }
    }
}

/// Validation failure at either object level, with the violated axiom inside.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Preform(PreformError),
    #[error(transparent)]
    Form(FormError),
    #[error("root line names {declared}, but the edges make {actual} the root")]
    RootMismatch { declared: NodeValue, actual: NodeValue },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error(transparent)]
    Invalid(ValidationError),
}

struct LineCtx {
    line: usize,
}

impl LineCtx {
    fn err(&self, col: usize, message: impl fmt::Display) -> ParseError {
        ParseError::Syntax { line: self.line, col, message: message.to_string() }
    }
}

/// Parses and validates a document.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if !content.trim().is_empty() {
            lines.push((idx + 1, content.trim_end()));
        }
    }
    let Some(&(first_line, header)) = lines.first() else {
        return Err(ParseError::Syntax {
            line: 1,
            col: 1,
            message: "empty document".into(),
        });
    };

    let ctx = LineCtx { line: first_line };
    let kind = match header.trim() {
        "ncf 1 form" => Kind::Form,
        "ncf 1 preform" => Kind::Preform,
        other => {
            return Err(ctx.err(1, format!(
                "expected `ncf 1 form` or `ncf 1 preform`, found {other:?}"
            )))
        }
    };

    let mut root: Option<NodeValue> = None;
    let mut players: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
    let mut choices: Option<BTreeSet<Label>> = None;
    let mut edges: Vec<Edge> = Vec::new();

    for &(line, text) in &lines[1..] {
        let ctx = LineCtx { line };
        let text = text.trim_start();
        if let Some(rest) = text.strip_prefix("root:") {
            if root.is_some() {
                return Err(ctx.err(1, "duplicate root line"));
            }
            root = Some(parse_node(rest.trim(), &ctx)?);
        } else if let Some(rest) = text.strip_prefix("player ") {
            if kind != Kind::Form {
                return Err(ctx.err(1, "player line in a preform document"));
            }
            let colon = rest
                .find(':')
                .ok_or_else(|| ctx.err(1, "player line without `:`"))?;
            let id = parse_label(rest[..colon].trim(), &ctx)?;
            let mut owned = BTreeSet::new();
            for token in rest[colon + 1..].split_whitespace() {
                if !owned.insert(parse_label(token, &ctx)?) {
                    return Err(ctx.err(1, format!("choice {token} listed twice")));
                }
            }
            if players.insert(id.clone(), owned).is_some() {
                return Err(ctx.err(1, format!("duplicate player {id}")));
            }
        } else if let Some(rest) = text.strip_prefix("choices:") {
            if kind != Kind::Preform {
                return Err(ctx.err(1, "choices line in a form document"));
            }
            if choices.is_some() {
                return Err(ctx.err(1, "duplicate choices line"));
            }
            let mut set = BTreeSet::new();
            for token in rest.split_whitespace() {
                if !set.insert(parse_label(token, &ctx)?) {
                    return Err(ctx.err(1, format!("choice {token} listed twice")));
                }
            }
            choices = Some(set);
        } else if let Some(rest) = text.strip_prefix("edge:") {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(ctx.err(1, "edge line needs `edge: <node> <choice> <node>`"));
            }
            edges.push(Edge::new(
                parse_node(tokens[0], &ctx)?,
                parse_label(tokens[1], &ctx)?,
                parse_node(tokens[2], &ctx)?,
            ));
        } else {
            return Err(ctx.err(1, format!("unrecognized line {text:?}")));
        }
    }

    let last = LineCtx { line: lines.last().expect("nonempty").0 };
    let declared_root =
        root.ok_or_else(|| last.err(1, "missing root line"))?;
    let mut nodes: BTreeSet<NodeValue> = [declared_root.clone()].into();
    for edge in &edges {
        nodes.insert(edge.source.clone());
        nodes.insert(edge.result.clone());
    }

    let doc = match kind {
        Kind::Preform => {
            let choices =
                choices.ok_or_else(|| last.err(1, "missing choices line"))?;
            let pf = Preform::validate(nodes, choices, edges)
                .map_err(|e| ParseError::Invalid(ValidationError::Preform(e)))?;
            check_root(&declared_root, pf.root())?;
            Document::Preform(pf)
        }
        Kind::Form => {
            if players.is_empty() {
                return Err(last.err(1, "missing player lines"));
            }
            let f = Form::validate(players, nodes, edges)
                .map_err(|e| ParseError::Invalid(ValidationError::Form(e)))?;
            check_root(&declared_root, f.root())?;
            Document::Form(f)
        }
    };
    Ok(doc)
}

fn check_root(declared: &NodeValue, actual: &NodeValue) -> Result<(), ParseError> {
    if declared != actual {
        return Err(ParseError::Invalid(ValidationError::RootMismatch {
            declared: declared.clone(),
            actual: actual.clone(),
        }));
    }
    Ok(())
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Kind {
    Form,
    Preform,
}

fn parse_label(token: &str, ctx: &LineCtx) -> Result<Label, ParseError> {
    Label::new(token).map_err(|e| ctx.err(1, e))
}

/// Parses a single node token: `@ident`, `[a,b]`, `[]`, `{a,b}`, or `{}`.
pub fn parse_node_token(token: &str) -> Result<NodeValue, String> {
    let ctx = LineCtx { line: 0 };
    parse_node(token, &ctx).map_err(|e| e.to_string())
}

fn parse_node(token: &str, ctx: &LineCtx) -> Result<NodeValue, ParseError> {
    if let Some(ident) = token.strip_prefix('@') {
        return Ok(NodeValue::Atom(parse_label(ident, ctx)?));
    }
    if let Some(inner) = token.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| ctx.err(1, format!("unterminated sequence node {token:?}")))?;
        let items = parse_items(inner, ctx)?;
        return Ok(NodeValue::Seq(SeqNode::new(items)));
    }
    if let Some(inner) = token.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| ctx.err(1, format!("unterminated set node {token:?}")))?;
        let items = parse_items(inner, ctx)?;
        let mut set = BTreeSet::new();
        for item in &items {
            if !set.insert(item.clone()) {
                return Err(ctx.err(1, format!("set node {token:?} repeats {item}")));
            }
        }
        return Ok(NodeValue::Set(SetNode::new(set)));
    }
    Err(ctx.err(1, format!("node token {token:?} must start with `@`, `[`, or `{{`")))
}

fn parse_items(inner: &str, ctx: &LineCtx) -> Result<Vec<Label>, ParseError> {
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|item| parse_label(item.trim(), ctx))
        .collect()
}

/// Canonical text for a form: one line per player in sorted order, then the
/// edges sorted by (serialized source, choice).
pub fn serialize_form(form: &Form) -> String {
    let mut out = String::from("ncf 1 form\n");
    out.push_str(&format!("root: {}\n", form.root()));
    for (player, owned) in form.assignment() {
        out.push_str(&format!("player {player}:"));
        for choice in owned {
            out.push_str(&format!(" {choice}"));
        }
        out.push('\n');
    }
    push_edges(&mut out, form.edges());
    out
}

/// Canonical text for a preform.
pub fn serialize_preform(preform: &Preform) -> String {
    let mut out = String::from("ncf 1 preform\n");
    out.push_str(&format!("root: {}\n", preform.root()));
    out.push_str("choices:");
    for choice in preform.choices() {
        out.push_str(&format!(" {choice}"));
    }
    out.push('\n');
    push_edges(&mut out, preform.edges());
    out
}

fn push_edges(out: &mut String, edges: &BTreeSet<Edge>) {
    let mut lines: Vec<(String, &Label, String)> = edges
        .iter()
        .map(|e| (e.source.to_string(), &e.choice, e.result.to_string()))
        .collect();
    lines.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    for (source, choice, result) in lines {
        out.push_str(&format!("edge: {source} {choice} {result}\n"));
    }
}
