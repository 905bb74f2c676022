//! Line-oriented text format for chain complexes.
//!
//! ```text
//! # comment
//! degrees <k_min> <k_max>
//! rank <k> <n>                         one line per degree
//! d <k> : <rows> <cols> : <e11 e12 ...> row-major entries of d_k : C_k -> C_{k-1}
//! ```
//!
//! `k_max < k_min` denotes the empty complex. Missing `rank` lines mean rank
//! zero and missing `d` lines mean a zero differential. Blank lines and text
//! after `#` are ignored.

use std::fmt::Write as _;

use num_bigint::BigInt;

use super::{ChainComplex, IntegerMatrix};
use crate::format::ParseError;

pub fn write_complex(c: &ChainComplex) -> String {
    let mut out = String::new();
    let (lo, hi) = if c.is_empty() { (0, -1) } else { (c.k_min(), c.k_max()) };
    writeln!(out, "degrees {lo} {hi}").unwrap();
    for k in c.degrees() {
        writeln!(out, "rank {k} {}", c.rank(k)).unwrap();
    }
    for k in c.degrees().skip(1) {
        let d = c.differential(k);
        write!(out, "d {k} : {} {} :", d.rows(), d.cols()).unwrap();
        for e in d.entries() {
            write!(out, " {e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_complex(text: &str) -> Result<ChainComplex, ParseError> {
    let mut range: Option<(i64, i64)> = None;
    let mut ranks: Vec<Option<usize>> = Vec::new();
    let mut diffs: Vec<(usize, i64, usize, usize, Vec<BigInt>)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("degrees") => {
                if range.is_some() {
                    return Err(ParseError::new(lineno, "duplicate degrees line"));
                }
                let lo = parse_int(words.next(), lineno, "k_min")?;
                let hi = parse_int(words.next(), lineno, "k_max")?;
                expect_end(words, lineno)?;
                let n = if hi < lo { 0 } else { (hi - lo + 1) as usize };
                ranks = vec![None; n];
                range = Some((lo, hi));
            }
            Some("rank") => {
                let (lo, hi) = range.ok_or_else(|| ParseError::new(lineno, "rank before degrees"))?;
                let k = parse_int(words.next(), lineno, "degree")?;
                let n: usize = parse_int(words.next(), lineno, "rank")?
                    .try_into()
                    .map_err(|_| ParseError::new(lineno, "negative rank"))?;
                expect_end(words, lineno)?;
                if k < lo || k > hi {
                    return Err(ParseError::new(lineno, format!("degree {k} outside [{lo}, {hi}]")));
                }
                let slot = &mut ranks[(k - lo) as usize];
                if slot.is_some() {
                    return Err(ParseError::new(lineno, format!("duplicate rank for degree {k}")));
                }
                *slot = Some(n);
            }
            Some("d") => {
                let k = parse_int(words.next(), lineno, "degree")?;
                let rest: Vec<&str> = words.collect();
                let parts: Vec<&[&str]> = rest.split(|w| *w == ":").collect();
                if parts.len() != 3 || !parts[0].is_empty() {
                    return Err(ParseError::new(lineno, "expected `d <k> : <rows> <cols> : <entries>`"));
                }
                let shape = parts[1];
                if shape.len() != 2 {
                    return Err(ParseError::new(lineno, "expected `<rows> <cols>`"));
                }
                let r = parse_usize(shape[0], lineno)?;
                let c = parse_usize(shape[1], lineno)?;
                let entries = parts[2]
                    .iter()
                    .map(|w| w.parse::<BigInt>().map_err(|_| ParseError::new(lineno, format!("bad entry `{w}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if entries.len() != r * c {
                    return Err(ParseError::new(
                        lineno,
                        format!("{} entries for a {r}x{c} matrix", entries.len()),
                    ));
                }
                diffs.push((lineno, k, r, c, entries));
            }
            Some(other) => return Err(ParseError::new(lineno, format!("unknown keyword `{other}`"))),
            None => unreachable!(),
        }
    }

    let (lo, hi) = range.ok_or_else(|| ParseError::new(0, "missing degrees line"))?;
    if hi < lo {
        if let Some((lineno, ..)) = diffs.first() {
            return Err(ParseError::new(*lineno, "differential in an empty complex"));
        }
        return Ok(ChainComplex::empty());
    }
    let ranks: Vec<usize> = ranks.into_iter().map(|r| r.unwrap_or(0)).collect();
    let mut matrices: Vec<Option<IntegerMatrix>> = vec![None; ranks.len()];
    for (lineno, k, r, c, entries) in diffs {
        if k <= lo || k > hi {
            return Err(ParseError::new(lineno, format!("differential degree {k} outside ({lo}, {hi}]")));
        }
        let idx = (k - lo) as usize;
        if (r, c) != (ranks[idx - 1], ranks[idx]) {
            return Err(ParseError::new(
                lineno,
                format!("d_{k} is {r}x{c}, ranks require {}x{}", ranks[idx - 1], ranks[idx]),
            ));
        }
        if matrices[idx].is_some() {
            return Err(ParseError::new(lineno, format!("duplicate differential d_{k}")));
        }
        matrices[idx] = IntegerMatrix::from_entries(r, c, entries);
    }
    let matrices = matrices
        .into_iter()
        .enumerate()
        .map(|(idx, m)| {
            m.unwrap_or_else(|| IntegerMatrix::zeros(if idx == 0 { 0 } else { ranks[idx - 1] }, ranks[idx]))
        })
        .collect();
    ChainComplex::new(lo, ranks, matrices).map_err(|e| ParseError::new(0, e.to_string()))
}

fn parse_int(word: Option<&str>, lineno: usize, what: &str) -> Result<i64, ParseError> {
    let w = word.ok_or_else(|| ParseError::new(lineno, format!("missing {what}")))?;
    w.parse().map_err(|_| ParseError::new(lineno, format!("bad {what} `{w}`")))
}

fn parse_usize(w: &str, lineno: usize) -> Result<usize, ParseError> {
    w.parse().map_err(|_| ParseError::new(lineno, format!("bad count `{w}`")))
}

fn expect_end<'a>(mut words: impl Iterator<Item = &'a str>, lineno: usize) -> Result<(), ParseError> {
    match words.next() {
        Some(w) => Err(ParseError::new(lineno, format!("unexpected `{w}`"))),
        None => Ok(()),
    }
}
