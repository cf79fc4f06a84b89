//! Turning input files into test matrices.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use crate::laplacian::{prepare_graph, undirected, ClassMap, SUITESPARSE_CATEGORY};
use crate::matrix::{filter_suitesparse, parse_edge_list, parse_matrix_market, read_matrix_file, Class, SparseMatrix, TestMatrix};

/// One input file with the name and category it will be archived under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputFile {
    pub path: PathBuf,
    pub name: String,
    pub category: String,
}

impl InputFile {
    /// Name is the file stem. The category is the first directory below
    /// `root`, or for files directly in `root` the part of the stem before
    /// the first `-` or `_` (`bio-yeast` is in `bio`).
    pub fn from_path(root: &Path, path: &Path) -> InputFile {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let rel = path.strip_prefix(root).unwrap_or(path);
        let mut parts = rel.components();
        let first = parts.next();
        let category = match (first, parts.next()) {
            (Some(dir), Some(_)) => dir.as_os_str().to_string_lossy().into_owned(),
            _ => name.split(['-', '_']).next().unwrap_or_default().to_owned(),
        };
        InputFile {
            path: path.to_path_buf(),
            name,
            category,
        }
    }
}

#[derive(Debug, Default)]
pub struct PrepareReport {
    pub matrices: Vec<TestMatrix>,
    /// Inputs that were skipped, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

impl PrepareReport {
    fn skip(&mut self, path: &Path, why: String) {
        warn!("skipping {}: {why}", path.display());
        self.skipped.push((path.to_path_buf(), why));
    }
}

/// Matrix Market files are taken as written; edge lists describe undirected
/// graphs.
fn read_graph(path: &Path) -> Result<SparseMatrix, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    if text.trim_start().starts_with("%%MatrixMarket") {
        parse_matrix_market(&text).map_err(|e| e.to_string())
    } else {
        parse_edge_list(&text).map(|a| undirected(&a)).map_err(|e| e.to_string())
    }
}

/// Graph inputs become normalized Laplacians classified by category.
pub fn prepare_graphs(files: &[InputFile], classes: &ClassMap) -> PrepareReport {
    let mut rep = PrepareReport::default();
    for f in files {
        let class = match classes.class_of(&f.category) {
            Ok(c) => c,
            Err(e) => {
                rep.skip(&f.path, e.to_string());
                continue;
            }
        };
        let l = match read_graph(&f.path) {
            Ok(a) => prepare_graph(a),
            Err(e) => {
                rep.skip(&f.path, e.to_string());
                continue;
            }
        };
        match l {
            Ok(l) => rep.matrices.push(TestMatrix::new(&f.name, &f.category, class, l)),
            Err(e) => rep.skip(&f.path, e.to_string()),
        }
    }
    rep
}

/// General inputs are kept as read, then reduced to the symmetric ones
/// within the size bound.
pub fn prepare_general(files: &[InputFile]) -> PrepareReport {
    let mut rep = PrepareReport::default();
    for f in files {
        match read_matrix_file(&f.path) {
            Ok(a) => {
                let m = TestMatrix::new(&f.name, SUITESPARSE_CATEGORY, Class::General, a);
                match filter_suitesparse(vec![m]).pop() {
                    Some(m) => rep.matrices.push(m),
                    None => rep.skip(&f.path, "not symmetric or too many nonzeros".into()),
                }
            }
            Err(e) => rep.skip(&f.path, e.to_string()),
        }
    }
    rep
}
