//! Text formats: graphon and config JSON, edge lists and part files.

use std::fmt::Write as _;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernelcore::{FiniteGraph, StepGraphon};
use crate::pipeline::RunConfig;

fn looks_decimal(s: &str) -> bool {
    let t = s.trim();
    !t.is_empty()
        && t.chars().any(|c| c.is_ascii_digit())
        && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
}

/// Replaces decimal strings such as `"0.35"` by numbers, recursively.
fn normalize_decimals(v: Value) -> Result<Value> {
    Ok(match v {
        Value::String(s) if looks_decimal(&s) => {
            let x: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
            if s.trim().chars().all(|c| c.is_ascii_digit()) {
                if let Ok(u) = s.trim().parse::<u64>() {
                    return Ok(Value::from(u));
                }
            }
            serde_json::Number::from_f64(x)
                .map(Value::Number)
                .ok_or_else(|| Error::Parse(format!("non-finite decimal {s:?}")))?
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_decimals).collect::<Result<_>>()?),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, v)| Ok((k, normalize_decimals(v)?)))
                .collect::<Result<_>>()?,
        ),
        other => other,
    })
}

pub fn parse_graphon(text: &str) -> Result<StepGraphon> {
    let v = normalize_decimals(serde_json::from_str(text)?)?;
    Ok(serde_json::from_value(v)?)
}

pub fn graphon_to_json(w: &StepGraphon) -> Result<String> {
    Ok(serde_json::to_string_pretty(w)?)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let v = normalize_decimals(serde_json::from_str(text)?)?;
    Ok(serde_json::from_value(v)?)
}

/// Header `n m`, then one `u v` line per edge with `u < v`.
pub fn edge_list(g: &FiniteGraph) -> String {
    let mut out = String::with_capacity(12 * g.edge_count() + 16);
    writeln!(out, "{} {}", g.n(), g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

fn numbers(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Parse(format!("line {lineno}: {t:?} is not a vertex index")))
        })
        .collect()
}

pub fn parse_edge_list(text: &str) -> Result<FiniteGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (no, header) = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))?;
    let h = numbers(header, no)?;
    let [n, m] = h[..] else {
        return Err(Error::Parse(format!("line {no}: header must be `n m`")));
    };
    let mut edges = Vec::with_capacity(m);
    for (no, line) in lines {
        match numbers(line, no)?[..] {
            [u, v] => edges.push((u, v)),
            _ => return Err(Error::Parse(format!("line {no}: expected `u v`"))),
        }
    }
    if edges.len() != m {
        return Err(Error::Parse(format!("header announces {m} edges, found {}", edges.len())));
    }
    FiniteGraph::from_edges(n, edges)
}

/// One part index per line, vertex order.
pub fn part_file(part_of: &[usize]) -> String {
    let mut out = String::with_capacity(4 * part_of.len());
    for p in part_of {
        writeln!(out, "{p}").unwrap();
    }
    out
}

pub fn parse_part_file(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: {l:?} is not a part index", i + 1)))
        })
        .collect()
}

/// Integers separated by whitespace or commas.
pub fn parse_int_list(text: &str) -> Result<Vec<usize>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("{t:?} is not a nonnegative integer"))))
        .collect()
}
