//! Portable archive of prepared matrices.
//!
//! ```text
//! <root>/manifest
//! <root>/<class>/<name>
//! ```
//!
//! The manifest starts with `eigenformats-archive <version>` followed by one
//! tab-separated line per matrix: name, category, class, symmetric flag and
//! the SHA-256 of the payload. Payloads are coordinate listings with 1-based
//! indices and exact hexadecimal values (see [`Reference::to_hex`]). Entries
//! are written in name order, so equal sets produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Class, SparseMatrix, TestMatrix};
use crate::formats::Reference;

pub const ARCHIVE_VERSION: u32 = 1;
const MAGIC: &str = "eigenformats-archive";
const PAYLOAD_HEADER: &str = "%%MatrixMarket matrix coordinate real general";

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("duplicate matrix name `{0}`")]
    DuplicateName(String),
    #[error("invalid matrix name `{0}`")]
    InvalidName(String),
    #[error("unsupported archive version `{0}`")]
    Version(String),
    #[error("checksum mismatch for `{0}`")]
    Checksum(String),
    #[error("malformed {what} at line {line}")]
    Malformed { what: String, line: usize },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ArchiveError + '_ {
    move |source| ArchiveError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(what: &str, line: usize) -> ArchiveError {
    ArchiveError::Malformed {
        what: what.to_string(),
        line,
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name != "manifest"
        && !name.chars().any(|c| c == '/' || c == '\\' || c.is_whitespace() || c.is_control())
}

/// Canonical text of a matrix.
pub(crate) fn payload(m: &SparseMatrix) -> String {
    let mut s = String::new();
    writeln!(s, "{PAYLOAD_HEADER}").unwrap();
    writeln!(s, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz()).unwrap();
    for e in m.entries() {
        writeln!(s, "{} {} {}", e.row + 1, e.col + 1, e.value.to_hex()).unwrap();
    }
    s
}

fn parse_payload(text: &str, name: &str) -> Result<SparseMatrix, ArchiveError> {
    let what = format!("payload `{name}`");
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, PAYLOAD_HEADER)) => {}
        _ => return Err(malformed(&what, 1)),
    }
    let (line, size) = lines.next().ok_or_else(|| malformed(&what, 2))?;
    let dims: Vec<usize> = size
        .split(' ')
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|_| malformed(&what, line))?;
    let [n_rows, n_cols, nnz] = dims[..] else {
        return Err(malformed(&what, line));
    };
    let mut triplets = Vec::with_capacity(nnz);
    for (line, l) in lines {
        let mut toks = l.split(' ');
        let (Some(i), Some(j), Some(v), None) = (toks.next(), toks.next(), toks.next(), toks.next()) else {
            return Err(malformed(&what, line));
        };
        let i: usize = i.parse().map_err(|_| malformed(&what, line))?;
        let j: usize = j.parse().map_err(|_| malformed(&what, line))?;
        let v = Reference::parse_hex(v).map_err(|_| malformed(&what, line))?;
        if i == 0 || j == 0 || i > n_rows || j > n_cols {
            return Err(malformed(&what, line));
        }
        triplets.push((i - 1, j - 1, v));
    }
    if triplets.len() != nnz {
        return Err(malformed(&what, text.lines().count()));
    }
    Ok(SparseMatrix::from_triplets(n_rows, n_cols, triplets))
}

/// Write `set` below `root`, replacing any existing manifest.
pub fn archive_write(set: &[TestMatrix], root: &Path) -> Result<(), ArchiveError> {
    let mut order: Vec<&TestMatrix> = set.iter().collect();
    order.sort_by(|a, b| a.name.cmp(&b.name));
    for w in order.windows(2) {
        if w[0].name == w[1].name {
            return Err(ArchiveError::DuplicateName(w[0].name.clone()));
        }
    }
    fs::create_dir_all(root).map_err(io_err(root))?;
    let mut manifest = format!("{MAGIC} {ARCHIVE_VERSION}\n");
    for m in order {
        if !valid_name(&m.name) || !valid_name(&m.category) {
            return Err(ArchiveError::InvalidName(m.name.clone()));
        }
        let dir = root.join(m.class.name());
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let text = payload(&m.matrix);
        let path = dir.join(&m.name);
        fs::write(&path, &text).map_err(io_err(&path))?;
        writeln!(
            manifest,
            "{}\t{}\t{}\t{}\t{}",
            m.name,
            m.category,
            m.class,
            m.symmetric as u8,
            sha256_hex(text.as_bytes())
        )
        .unwrap();
    }
    let path = root.join("manifest");
    fs::write(&path, manifest).map_err(io_err(&path))
}

/// Load every matrix listed in the manifest, verifying checksums.
pub fn archive_read(root: &Path) -> Result<Vec<TestMatrix>, ArchiveError> {
    let path = root.join("manifest");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut lines = text.lines();
    let head = lines.next().unwrap_or("");
    match head.split_once(' ') {
        Some((MAGIC, v)) if v == ARCHIVE_VERSION.to_string() => {}
        _ => return Err(ArchiveError::Version(head.to_string())),
    }
    let mut set = Vec::new();
    for (i, l) in lines.enumerate() {
        let line = i + 2;
        let f: Vec<&str> = l.split('\t').collect();
        let [name, category, class, symmetric, sum] = f[..] else {
            return Err(malformed("manifest", line));
        };
        if !valid_name(name) {
            return Err(ArchiveError::InvalidName(name.to_string()));
        }
        let class: Class = class.parse().map_err(|_| malformed("manifest", line))?;
        let symmetric = match symmetric {
            "0" => false,
            "1" => true,
            _ => return Err(malformed("manifest", line)),
        };
        let p = root.join(class.name()).join(name);
        let body = fs::read_to_string(&p).map_err(io_err(&p))?;
        if sha256_hex(body.as_bytes()) != sum {
            return Err(ArchiveError::Checksum(name.to_string()));
        }
        let matrix = parse_payload(&body, name)?;
        let m = TestMatrix::new(name, category, class, matrix);
        if m.symmetric != symmetric {
            return Err(malformed("manifest", line));
        }
        set.push(m);
    }
    set.sort_by(|a, b| a.name.cmp(&b.name));
    for w in set.windows(2) {
        if w[0].name == w[1].name {
            return Err(ArchiveError::DuplicateName(w[0].name.clone()));
        }
    }
    Ok(set)
}
