//! Line-oriented text format for flow categories.
//!
//! ```text
//! # comment
//! point <name> mu=<int>          in the total order of the category
//! count <from> <to> <n>          signed flow-line count
//! cardinality <from> <to> <n>    optional unsigned number of flow lines
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use super::GradedFlowCategory;
use crate::format::ParseError;

pub fn write_category(cat: &GradedFlowCategory) -> String {
    let mut out = String::new();
    write_category_into(&mut out, cat);
    out
}

pub(crate) fn write_category_into(out: &mut String, cat: &GradedFlowCategory) {
    for (name, mu) in cat.names().iter().zip(cat.grading()) {
        writeln!(out, "point {name} mu={mu}").unwrap();
    }
    for ((i, j), n) in cat.counts() {
        writeln!(out, "count {} {} {n}", cat.name(i), cat.name(j)).unwrap();
    }
    for ((i, j), n) in cat.cardinalities() {
        writeln!(out, "cardinality {} {} {n}", cat.name(i), cat.name(j)).unwrap();
    }
}

pub fn parse_category(text: &str) -> Result<GradedFlowCategory, ParseError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    parse_category_lines(&lines)
}

/// Parses pre-split `(line number, content)` pairs; shared with the
/// continuation format.
pub(crate) fn parse_category_lines(lines: &[(usize, &str)]) -> Result<GradedFlowCategory, ParseError> {
    let mut points: Vec<(String, i64)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut counts = Vec::new();
    let mut cards = Vec::new();
    let mut count_lines = Vec::new();
    let mut card_lines = Vec::new();

    for &(lineno, line) in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "point" => {
                if words.len() != 3 {
                    return Err(ParseError::new(lineno, "expected `point <name> mu=<int>`"));
                }
                let mu = words[2]
                    .strip_prefix("mu=")
                    .and_then(|m| m.parse::<i64>().ok())
                    .ok_or_else(|| ParseError::new(lineno, format!("bad grading `{}`", words[2])))?;
                if index.insert(words[1].to_string(), points.len()).is_some() {
                    return Err(ParseError::new(lineno, format!("duplicate point `{}`", words[1])));
                }
                points.push((words[1].to_string(), mu));
            }
            kw @ ("count" | "cardinality") => {
                if words.len() != 4 {
                    return Err(ParseError::new(lineno, format!("expected `{kw} <from> <to> <n>`")));
                }
                let lookup = |w: &str| {
                    index
                        .get(w)
                        .copied()
                        .ok_or_else(|| ParseError::new(lineno, format!("unknown point `{w}`")))
                };
                let (i, j) = (lookup(words[1])?, lookup(words[2])?);
                if kw == "count" {
                    let n = words[3]
                        .parse::<i64>()
                        .map_err(|_| ParseError::new(lineno, format!("bad count `{}`", words[3])))?;
                    if counts.iter().any(|&(p, _)| p == (i, j)) {
                        return Err(ParseError::new(lineno, "duplicate count"));
                    }
                    // validate eagerly so the error carries this line
                    GradedFlowCategory::new(points.clone(), [((i, j), n)])
                        .map_err(|e| ParseError::new(lineno, e.to_string()))?;
                    counts.push(((i, j), n));
                    count_lines.push(lineno);
                } else {
                    let n = words[3]
                        .parse::<u64>()
                        .map_err(|_| ParseError::new(lineno, format!("bad cardinality `{}`", words[3])))?;
                    cards.push(((i, j), n));
                    card_lines.push(lineno);
                }
            }
            other => return Err(ParseError::new(lineno, format!("unknown keyword `{other}`"))),
        }
    }
    let cat = GradedFlowCategory::new(points, counts).map_err(|e| ParseError::new(0, e.to_string()))?;
    if cards.is_empty() {
        return Ok(cat);
    }
    let first = card_lines.first().copied().unwrap_or(0);
    cat.with_cardinalities(cards).map_err(|e| ParseError::new(first, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const RP2: &str = "\
# projective plane
point a mu=2
point b mu=1
point c mu=0
count a b 2
count b c 0
";

    #[test]
    fn round_trip() {
        let cat = parse_category(RP2).unwrap();
        assert_eq!(cat.grading(), &[2, 1, 0]);
        assert_eq!(cat.count(0, 1), 2);
        let text = write_category(&cat);
        assert_eq!(parse_category(&text).unwrap(), cat);
        let with_card = format!("{RP2}cardinality a b 2\n");
        let cat = parse_category(&with_card).unwrap();
        assert_eq!(parse_category(&write_category(&cat)).unwrap(), cat);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_category("point a mu=2\npoint b mu=0\ncount a b 1\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_category("point a mu=2\n\ncount a z 1\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_category("point a mu=x\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_category("point a mu=1\npoint a mu=0\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_category("vertex a\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_category(&format!("{RP2}cardinality a b 3\n")).unwrap_err();
        assert_eq!(e.line, 7);
    }

    #[test]
    fn d_squared_failure_still_parses() {
        let cat = parse_category("point a mu=2\npoint b mu=1\npoint c mu=0\ncount a b 1\ncount b c 1\n").unwrap();
        assert_eq!(cat.check_d_squared().len(), 1);
    }
}
