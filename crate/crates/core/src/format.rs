//! Line-oriented model file format.
//!
//! ```text
//! model counterexample
//! states:  x1, x2
//! params:  mu1, mu2
//! inputs:                      # optional; empty allowed
//! eq x1' = 0
//! eq x2' = x1*x2 + mu1*x1 + mu2
//! out y = x2
//! ```
//!
//! `#` starts a comment. Lines may appear in any order, but each section
//! header at most once.

use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::{is_identifier, parse_expr, Expr};
use crate::model::{Model, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        column,
        message: message.into(),
    }
}

#[derive(Default)]
struct Section {
    names: Vec<String>,
    line: Option<usize>,
}

struct Equation {
    target: String,
    expr: Expr,
    line: usize,
    column: usize,
    text: String,
}

/// Column (1-based) of the first character of `needle` in `line`, or of the
/// first non-blank character when absent.
fn column_of(line: &str, needle: &str) -> usize {
    line.find(needle)
        .map(|b| line[..b].chars().count() + 1)
        .unwrap_or_else(|| line.len() - line.trim_start().len() + 1)
}

/// Column of `word` as a whole identifier token inside `text`.
fn token_column(text: &str, word: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let is_ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut start = 0;
    while let Some(off) = text[start..].find(word) {
        let b = start + off;
        let e = b + word.len();
        let before_ok = b == 0 || !is_ident(bytes[b - 1]);
        let after_ok = e == bytes.len() || !is_ident(bytes[e]);
        if before_ok && after_ok {
            return Some(text[..b].chars().count() + 1);
        }
        start = b + 1;
    }
    None
}

pub fn parse_model(text: &str) -> Result<Model, FormatError> {
    let mut name: Option<String> = None;
    let mut states = Section::default();
    let mut params = Section::default();
    let mut inputs = Section::default();
    let mut eqs: Vec<Equation> = Vec::new();
    let mut outs: Vec<Equation> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let keyword_end = trimmed
            .find(|c: char| c.is_whitespace() || c == ':')
            .unwrap_or(trimmed.len());
        let keyword = &trimmed[..keyword_end];
        let rest_offset = indent + keyword_end;
        let rest = &content[rest_offset..];

        match keyword {
            "model" => {
                if name.is_some() {
                    return Err(err(line_no, indent + 1, "duplicate `model` line"));
                }
                let n = rest.trim();
                if !is_identifier(n) {
                    return Err(err(line_no, column_of(raw, n.split_whitespace().next().unwrap_or(n)), format!("invalid model name `{n}`")));
                }
                name = Some(n.to_string());
            }
            "states" | "params" | "inputs" => {
                let section = match keyword {
                    "states" => &mut states,
                    "params" => &mut params,
                    _ => &mut inputs,
                };
                if section.line.is_some() {
                    return Err(err(line_no, indent + 1, format!("duplicate `{keyword}:` section")));
                }
                let list = rest.trim_start();
                let Some(list) = list.strip_prefix(':') else {
                    return Err(err(line_no, rest_offset + 1, format!("expected `:` after `{keyword}`")));
                };
                section.line = Some(line_no);
                if list.trim().is_empty() {
                    continue;
                }
                for item in list.split(',') {
                    let item = item.trim();
                    if !is_identifier(item) {
                        let col = if item.is_empty() { rest_offset + 1 } else { column_of(raw, item) };
                        return Err(err(line_no, col, format!("invalid identifier `{item}`")));
                    }
                    section.names.push(item.to_string());
                }
            }
            "eq" | "out" => {
                let Some((lhs, rhs)) = rest.split_once('=') else {
                    return Err(err(line_no, rest_offset + 1, "expected `=`"));
                };
                let lhs_t = lhs.trim();
                let target = if keyword == "eq" {
                    match lhs_t.strip_suffix('\'') {
                        Some(t) => t.trim(),
                        None => {
                            return Err(err(
                                line_no,
                                column_of(raw, lhs_t),
                                format!("expected `{lhs_t}'` on the left of an equation"),
                            ))
                        }
                    }
                } else {
                    lhs_t
                };
                if !is_identifier(target) {
                    return Err(err(line_no, column_of(raw, lhs_t), format!("invalid identifier `{target}`")));
                }
                let rhs_offset = rest_offset + lhs.len() + 1;
                let rhs_col0 = content[..rhs_offset].chars().count();
                let expr = parse_expr(rhs).map_err(|e| err(line_no, rhs_col0 + e.column, e.message))?;
                let target_col = column_of(raw, target);
                let entry = Equation {
                    target: target.to_string(),
                    expr,
                    line: line_no,
                    column: target_col,
                    text: raw.to_string(),
                };
                if keyword == "eq" {
                    eqs.push(entry);
                } else {
                    outs.push(entry);
                }
            }
            other => {
                return Err(err(line_no, indent + 1, format!("unknown directive `{other}`")));
            }
        }
    }

    let mut rhs: Vec<Option<Expr>> = vec![None; states.names.len()];
    for eq in &eqs {
        let Some(i) = states.names.iter().position(|s| *s == eq.target) else {
            return Err(err(eq.line, eq.column, format!("equation for undeclared state `{}`", eq.target)));
        };
        if rhs[i].is_some() {
            return Err(err(eq.line, eq.column, format!("second equation for `{}`", eq.target)));
        }
        rhs[i] = Some(eq.expr.clone());
    }
    if let Some(i) = rhs.iter().position(Option::is_none) {
        let line = states.line.unwrap_or(1);
        return Err(err(line, 1, format!("missing equation for state `{}`", states.names[i])));
    }

    let model = Model {
        name: name.unwrap_or_else(|| "unnamed".to_string()),
        states: states.names.clone(),
        params: params.names.clone(),
        inputs: inputs.names.clone(),
        outputs: outs.iter().map(|o| (o.target.clone(), o.expr.clone())).collect(),
        rhs: rhs.into_iter().map(Option::unwrap).collect(),
    };
    model.validate().map_err(|e| locate(&e, &eqs, &outs, [&states, &params, &inputs]))?;
    Ok(model)
}

fn locate(e: &ModelError, eqs: &[Equation], outs: &[Equation], sections: [&Section; 3]) -> FormatError {
    match e {
        ModelError::Undeclared { name, .. } => {
            for eq in eqs.iter().chain(outs) {
                if eq.expr.free_variables().contains(name) {
                    let col = token_column(&eq.text, name).unwrap_or(eq.column);
                    return err(eq.line, col, e.to_string());
                }
            }
            err(1, 1, e.to_string())
        }
        ModelError::Duplicate(name) => {
            for o in outs {
                if o.target == *name {
                    return err(o.line, o.column, e.to_string());
                }
            }
            let line = sections.iter().rev().find(|s| s.names.contains(name)).and_then(|s| s.line).unwrap_or(1);
            err(line, 1, e.to_string())
        }
        _ => err(1, 1, e.to_string()),
    }
}

pub fn print_model(model: &Model) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model {}", model.name);
    let list = |v: &[String]| {
        if v.is_empty() {
            String::new()
        } else {
            format!(" {}", v.join(", "))
        }
    };
    let _ = writeln!(s, "states:{}", list(&model.states));
    let _ = writeln!(s, "params:{}", list(&model.params));
    let _ = writeln!(s, "inputs:{}", list(&model.inputs));
    for (x, f) in model.states.iter().zip(&model.rhs) {
        let _ = writeln!(s, "eq {x}' = {f}");
    }
    for (y, g) in &model.outputs {
        let _ = writeln!(s, "out {y} = {g}");
    }
    s
}
