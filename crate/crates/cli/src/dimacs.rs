//! DIMACS CNF reading and writing.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use geosat::genmodel::{Clause, Formula, Literal};
use geosat::{Error, Result};

/// Writes `f` with each entry of `comments` as a `c` line before the header.
/// Literals keep their draw order.
pub fn emit_dimacs<W: Write>(f: &Formula, comments: &[String], mut out: W) -> io::Result<()> {
    out.write_all(to_dimacs_string(f, comments).as_bytes())
}

pub fn to_dimacs_string(f: &Formula, comments: &[String]) -> String {
    let mut s = String::with_capacity(16 * f.len() + 64);
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(s, "c {line}");
        }
    }
    let _ = writeln!(s, "p cnf {} {}", f.num_vars(), f.len());
    for clause in f.clauses() {
        for l in clause.literals() {
            let _ = write!(s, "{} ", l.to_dimacs());
        }
        s.push_str("0\n");
    }
    s
}

pub fn write_dimacs_file(f: &Formula, comments: &[String], path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    emit_dimacs(f, comments, &mut w)?;
    w.flush()
}

fn parse_error(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

/// Parses a DIMACS CNF whose clauses all have the same width. Clauses may
/// span lines; `c` lines and a trailing `%` line are ignored.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() || parts.len() != 4 || parts[1] != "cnf" {
                return Err(parse_error(line_no, "expected a single `p cnf <vars> <clauses>` header"));
            }
            let n = parts[2].parse().map_err(|_| parse_error(line_no, "bad variable count"))?;
            let m = parts[3].parse().map_err(|_| parse_error(line_no, "bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or_else(|| parse_error(line_no, "clause before header"))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| parse_error(line_no, format!("`{tok}` is not an integer")))?;
            if lit == 0 {
                clauses.push(Clause::new(current.drain(..)));
                continue;
            }
            if lit.unsigned_abs() as usize > n {
                return Err(parse_error(line_no, format!("literal {lit} exceeds {n} variables")));
            }
            current.push(Literal::from_dimacs(lit)?);
        }
    }
    let (n, m) = header.ok_or_else(|| parse_error(0, "missing `p cnf` header"))?;
    if !current.is_empty() {
        return Err(parse_error(0, "last clause is not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(parse_error(0, format!("header announces {m} clauses, found {}", clauses.len())));
    }
    let k = clauses.first().map_or(0, Clause::len);
    Formula::new(n, k, clauses)
}

pub fn read_dimacs_file(path: &Path) -> anyhow::Result<Formula> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_dimacs(&text)?)
}
