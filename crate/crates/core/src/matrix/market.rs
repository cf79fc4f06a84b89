//! Matrix Market and edge-list readers.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::SparseMatrix;
use crate::formats::Reference;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

fn parse_index(tok: &str, bound: usize, line: usize, what: &str) -> Result<usize, ParseError> {
    match tok.parse::<usize>() {
        Ok(i) if i >= 1 && i <= bound => Ok(i - 1),
        Ok(i) => fail(line, format!("{what} index {i} outside 1..={bound}")),
        Err(_) => fail(line, format!("invalid {what} index `{tok}`")),
    }
}

fn parse_value(tok: &str, line: usize) -> Result<Reference, ParseError> {
    match Reference::parse_decimal(tok) {
        Ok(v) if v.is_finite() => Ok(v),
        _ => fail(line, format!("non-numeric value `{tok}`")),
    }
}

/// Parse a coordinate Matrix Market file (real, integer or pattern; general
/// or symmetric). Symmetric storage is expanded and duplicates are summed.
pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = match lines.next() {
        Some(h) => h,
        None => return fail(1, "empty input"),
    };
    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return fail(1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`");
    }
    if words[2] != "coordinate" {
        return fail(1, format!("unsupported storage `{}`", words[2]));
    }
    let field = match words[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        f => return fail(1, format!("unsupported field `{f}`")),
    };
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        s => return fail(1, format!("unsupported symmetry `{s}`")),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = match body.next() {
        Some(s) => s,
        None => return fail(text.lines().count().max(1), "missing size line"),
    };
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .or_else(|_| fail(size_line, "invalid size line"))?;
    let [n_rows, n_cols, nnz] = dims[..] else {
        return fail(size_line, "size line needs rows, columns and entry count");
    };
    if symmetric && n_rows != n_cols {
        return fail(size_line, "symmetric matrix must be square");
    }

    let width = if field == Field::Pattern { 2 } else { 3 };
    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0usize;
    for (line, l) in body {
        if seen == nnz {
            return fail(line, format!("more than the declared {nnz} entries"));
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != width {
            return fail(line, format!("expected {width} fields, found {}", toks.len()));
        }
        let i = parse_index(toks[0], n_rows, line, "row")?;
        let j = parse_index(toks[1], n_cols, line, "column")?;
        let v = match field {
            Field::Pattern => Reference::ONE,
            Field::Integer => match toks[2].parse::<i64>() {
                Ok(k) => Reference::from_i64(k),
                Err(_) => return fail(line, format!("non-integer value `{}`", toks[2])),
            },
            Field::Real => parse_value(toks[2], line)?,
        };
        triplets.push((i, j, v));
        if symmetric && i != j {
            triplets.push((j, i, v));
        }
        seen += 1;
    }
    if seen < nnz {
        return fail(text.lines().count(), format!("declared {nnz} entries, found {seen}"));
    }
    Ok(SparseMatrix::from_triplets(n_rows, n_cols, triplets))
}

/// Parse `u v [w]` lines. The index base is 0 if any endpoint is 0 and 1
/// otherwise; missing weights are 1 and repeated edges are summed.
pub fn parse_edge_list(text: &str) -> Result<SparseMatrix, ParseError> {
    let mut edges = Vec::new();
    let mut has_zero = false;
    let mut max = 0usize;
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if toks.len() != 2 && toks.len() != 3 {
            return fail(line, format!("expected `u v [w]`, found {} fields", toks.len()));
        }
        let mut ends = [0usize; 2];
        for (k, tok) in toks[..2].iter().enumerate() {
            ends[k] = match tok.parse::<usize>() {
                Ok(v) if v <= u32::MAX as usize => v,
                Ok(_) => return fail(line, format!("vertex `{tok}` too large")),
                Err(_) => return fail(line, format!("invalid vertex `{tok}`")),
            };
            has_zero |= ends[k] == 0;
            max = max.max(ends[k]);
        }
        let w = match toks.get(2) {
            Some(tok) => parse_value(tok, line)?,
            None => Reference::ONE,
        };
        edges.push((ends[0], ends[1], w));
    }
    if edges.is_empty() {
        return Ok(SparseMatrix::zeros(0, 0));
    }
    let base = if has_zero { 0 } else { 1 };
    let n = max + 1 - base;
    Ok(SparseMatrix::from_triplets(
        n,
        n,
        edges.into_iter().map(|(u, v, w)| (u - base, v - base, w)),
    ))
}

/// Read a file, choosing the parser from its first line.
pub fn read_matrix_file(path: &Path) -> Result<SparseMatrix, ReadError> {
    let text = fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = if text.trim_start().starts_with("%%MatrixMarket") {
        parse_matrix_market(&text)
    } else {
        parse_edge_list(&text)
    };
    parsed.map_err(|source| ReadError::Parse {
        path: path.to_path_buf(),
        source,
    })
}
