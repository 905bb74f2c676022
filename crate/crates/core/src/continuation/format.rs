//! Text format for flow continuations: two flow categories followed by
//! cross counts.
//!
//! ```text
//! source
//! point a mu=1
//! target
//! point b mu=0
//! cross a b 1
//! ```
//!
//! Cross lines name a source point first and a target point second.

use std::fmt::Write as _;

use super::FlowContinuation;
use crate::flowcat::format::{parse_category_lines, write_category_into};
use crate::format::ParseError;

pub fn write_continuation(fc: &FlowContinuation) -> String {
    let mut out = String::from("source\n");
    write_category_into(&mut out, fc.source());
    out.push_str("target\n");
    write_category_into(&mut out, fc.target());
    for ((i, j), n) in fc.cross_counts() {
        writeln!(out, "cross {} {} {n}", fc.source().name(i), fc.target().name(j)).unwrap();
    }
    out
}

#[derive(PartialEq)]
enum Section {
    None,
    Source,
    Target,
}

pub fn parse_continuation(text: &str) -> Result<FlowContinuation, ParseError> {
    let mut section = Section::None;
    let mut source_lines = Vec::new();
    let mut target_lines = Vec::new();
    let mut cross_lines = Vec::new();
    let mut seen_source = false;
    let mut seen_target = false;
    for (n, raw) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "source" if !seen_source => {
                seen_source = true;
                section = Section::Source;
            }
            "target" if !seen_target => {
                seen_target = true;
                section = Section::Target;
            }
            "source" | "target" => return Err(ParseError::new(lineno, format!("duplicate `{line}` section"))),
            _ if line.starts_with("cross ") || line == "cross" => cross_lines.push((lineno, line)),
            _ => match section {
                Section::Source => source_lines.push((lineno, line)),
                Section::Target => target_lines.push((lineno, line)),
                Section::None => return Err(ParseError::new(lineno, "expected `source` section first")),
            },
        }
    }
    if !seen_source || !seen_target {
        return Err(ParseError::new(0, "continuation needs `source` and `target` sections"));
    }
    let source = parse_category_lines(&source_lines)?;
    let target = parse_category_lines(&target_lines)?;
    let mut cross = Vec::new();
    for &(lineno, line) in &cross_lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 4 {
            return Err(ParseError::new(lineno, "expected `cross <source point> <target point> <n>`"));
        }
        let i = source
            .index_of(words[1])
            .ok_or_else(|| ParseError::new(lineno, format!("unknown source point `{}`", words[1])))?;
        let j = target
            .index_of(words[2])
            .ok_or_else(|| ParseError::new(lineno, format!("unknown target point `{}`", words[2])))?;
        let n = words[3]
            .parse::<i64>()
            .map_err(|_| ParseError::new(lineno, format!("bad count `{}`", words[3])))?;
        if cross.iter().any(|&(p, _)| p == (i, j)) {
            return Err(ParseError::new(lineno, "duplicate cross count"));
        }
        FlowContinuation::new(source.clone(), target.clone(), [((i, j), n)])
            .map_err(|e| ParseError::new(lineno, e.to_string()))?;
        cross.push(((i, j), n));
    }
    FlowContinuation::new(source, target, cross).map_err(|e| ParseError::new(0, e.to_string()))
}
