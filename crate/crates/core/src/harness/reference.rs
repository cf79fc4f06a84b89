//! Reference eigenpairs and their on-disk cache.
//!
//! A cache file is plain text:
//!
//! ```text
//! eigenformats-reference 1
//! checksum <sha256 of the matrix payload>
//! tolerance <hex>
//! seed <u64>
//! pairs <m> <n>
//! value <hex>                    (m lines)
//! vector <hex> ... <hex>         (m lines, n values each)
//! anchor <index> <0|1>           (m lines)
//! ```
//!
//! An entry is reused only if checksum, tolerance, seed and pair count all
//! match the current run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use log::warn;
use thiserror::Error;

use super::RunConfig;
use crate::align::{anchors, SignAnchor};
use crate::arnoldi::{extract_eigenpairs, partial_schur, SolverConfig, SolverError};
use crate::formats::Reference;
use crate::matrix::{payload, sha256_hex, SparseMatrix, TestMatrix};

const MAGIC: &str = "eigenformats-reference 1";

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension {n} does not exceed the {want} requested pairs")]
    TooSmall { n: usize, want: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("reference solve did not converge in {restarts} restarts")]
    NotConverged { restarts: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceEntry {
    pub checksum: String,
    pub tolerance: Reference,
    pub seed: u64,
    pub values: Vec<Reference>,
    pub vectors: Vec<Vec<Reference>>,
    pub anchors: Vec<SignAnchor>,
}

/// Reference results by matrix name.
#[derive(Debug, Default)]
pub struct ReferenceStore {
    pub entries: BTreeMap<String, Result<ReferenceEntry, ReferenceError>>,
}

pub fn matrix_checksum(m: &SparseMatrix) -> String {
    sha256_hex(payload(m).as_bytes())
}

/// Leading `count + buffer` pairs of `m` computed in reference arithmetic.
pub fn run_reference(m: &TestMatrix, cfg: &RunConfig) -> Result<ReferenceEntry, ReferenceError> {
    if !m.symmetric {
        return Err(ReferenceError::NotSymmetric);
    }
    let n = m.matrix.n_rows();
    let want = cfg.want();
    if n <= want {
        return Err(ReferenceError::TooSmall { n, want });
    }
    let a = m.matrix.to_csr::<Reference>();
    let tolerance = cfg.tolerances.reference;
    let scfg = SolverConfig::new(want, tolerance, n).with_seed(cfg.seed);
    let res = partial_schur(|x: &[Reference], y: &mut [Reference]| a.matvec(x, y), n, &scfg)?;
    if !res.converged {
        return Err(ReferenceError::NotConverged {
            restarts: res.restarts_used,
        });
    }
    let pairs = extract_eigenpairs(&res, want, scfg.ordering)?;
    Ok(ReferenceEntry {
        checksum: matrix_checksum(&m.matrix),
        tolerance,
        seed: cfg.seed,
        anchors: anchors(&pairs.vectors),
        values: pairs.values,
        vectors: pairs.vectors,
    })
}

impl ReferenceEntry {
    pub fn to_text(&self) -> String {
        let n = self.vectors.first().map_or(0, Vec::len);
        let mut s = String::new();
        writeln!(s, "{MAGIC}").unwrap();
        writeln!(s, "checksum {}", self.checksum).unwrap();
        writeln!(s, "tolerance {}", self.tolerance.to_hex()).unwrap();
        writeln!(s, "seed {}", self.seed).unwrap();
        writeln!(s, "pairs {} {n}", self.values.len()).unwrap();
        for v in &self.values {
            writeln!(s, "value {}", v.to_hex()).unwrap();
        }
        for col in &self.vectors {
            s.push_str("vector");
            for x in col {
                write!(s, " {}", x.to_hex()).unwrap();
            }
            s.push('\n');
        }
        for a in &self.anchors {
            writeln!(s, "anchor {} {}", a.index, u8::from(a.negative)).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Option<ReferenceEntry> {
        let mut lines = text.lines();
        if lines.next()? != MAGIC {
            return None;
        }
        let mut field = |key: &str| {
            let l = lines.next()?;
            let rest = l.strip_prefix(key)?.strip_prefix(' ')?;
            Some(rest.split(' ').map(str::to_owned).collect::<Vec<_>>())
        };
        let checksum = field("checksum")?.pop()?;
        let tolerance = Reference::parse_hex(&field("tolerance")?.pop()?).ok()?;
        let seed = field("seed")?.pop()?.parse().ok()?;
        let dims = field("pairs")?;
        let [m, n] = &dims[..] else {
            return None;
        };
        let (m, n): (usize, usize) = (m.parse().ok()?, n.parse().ok()?);
        let hex = |t: &String| Reference::parse_hex(t).ok();
        let mut values = Vec::with_capacity(m);
        for _ in 0..m {
            let f = field("value")?;
            values.push(hex(f.first()?)?);
        }
        let mut vectors = Vec::with_capacity(m);
        for _ in 0..m {
            let f = field("vector")?;
            if f.len() != n {
                return None;
            }
            vectors.push(f.iter().map(hex).collect::<Option<Vec<_>>>()?);
        }
        let mut anchors = Vec::with_capacity(m);
        for _ in 0..m {
            let f = field("anchor")?;
            let [i, neg] = &f[..] else {
                return None;
            };
            let index: usize = i.parse().ok()?;
            if index >= n {
                return None;
            }
            let negative = match neg.as_str() {
                "0" => false,
                "1" => true,
                _ => return None,
            };
            anchors.push(SignAnchor { index, negative });
        }
        if lines.next().is_some() {
            return None;
        }
        Some(ReferenceEntry {
            checksum,
            tolerance,
            seed,
            values,
            vectors,
            anchors,
        })
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_text())
    }
}

/// Cached reference for `name` if it is still valid for `checksum` and `cfg`.
pub fn load_reference(dir: &Path, name: &str, checksum: &str, cfg: &RunConfig) -> Option<ReferenceEntry> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).ok()?;
    let Some(e) = ReferenceEntry::from_text(&text) else {
        warn!("ignoring unreadable reference cache {}", path.display());
        return None;
    };
    let valid = e.checksum == checksum
        && e.tolerance == cfg.tolerances.reference
        && e.seed == cfg.seed
        && e.values.len() == cfg.want();
    valid.then_some(e)
}
