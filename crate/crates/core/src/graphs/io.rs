//! Edge-list text format: a header line `n m` followed by `m` lines `u v`
//! (0-indexed, `u < v`). Blank lines and lines starting with `#` are skipped.

use std::io::{BufRead, Write};

use super::Graph;
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", g.n(), g.edge_count())?;
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (a, b) = parse_pair(trimmed, lineno)?;
        match header {
            None => header = Some((a, b)),
            Some(_) => {
                if a >= b {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("edge ({a}, {b}) must satisfy u < v"),
                    });
                }
                edges.push((a, b));
            }
        }
    }
    let (n, m) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing 'n m' header".into(),
    })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    Graph::new(n, edges)
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| Error::Parse {
            line: lineno,
            msg: "expected two integers".into(),
        })?;
        tok.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("not a non-negative integer: {tok:?}"),
        })
    };
    let pair = (next()?, next()?);
    if it.next().is_some() {
        return Err(Error::Parse {
            line: lineno,
            msg: "trailing tokens".into(),
        });
    }
    Ok(pair)
}
